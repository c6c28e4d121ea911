#pragma once

// Independent oracles shared by the unit tests and the acceptance runner.
// Nothing here calls into the interpreter, the parser or the metrics code.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "codesim/dsl.hpp"
#include "codesim/rng.hpp"

namespace testsupport {

/// Evaluates rendered source text line by line. Supports `a=1; b=2`,
/// `a = b = 1`, `a = b`, `a += x`, `a -= x`, `a &= b`, `a |= b` and
/// `for _ in range(n):` blocks.
class TextEvaluator {
 public:
  std::map<std::string, std::int64_t> run(std::string_view source) {
    vars_.clear();
    lines_.clear();
    std::istringstream in{std::string(source)};
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(' ') == std::string::npos) continue;
      const auto indent = line.find_first_not_of(' ');
      lines_.push_back({indent / 4, line.substr(indent)});
    }
    block(0, lines_.size(), 0);
    return vars_;
  }

 private:
  struct Line {
    std::size_t depth;
    std::string text;
  };

  static std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(' '));
    s.erase(s.find_last_not_of(' ') + 1);
    return s;
  }

  std::int64_t operand(const std::string& text) {
    const auto t = trim(text);
    if (!t.empty() && (t[0] == '-' || std::isdigit(static_cast<unsigned char>(t[0])))) return std::stoll(t);
    auto it = vars_.find(t);
    if (it == vars_.end()) throw std::runtime_error("read of unset " + t);
    return it->second;
  }

  void simple(const std::string& stmt) {
    for (const char* op : {"+=", "-=", "&=", "|="}) {
      const auto pos = stmt.find(op);
      if (pos == std::string::npos) continue;
      const auto dst = trim(stmt.substr(0, pos));
      const auto src = operand(stmt.substr(pos + 2));
      auto& d = vars_.at(dst);
      switch (op[0]) {
        case '+':
          d += src;
          break;
        case '-':
          d -= src;
          break;
        case '&':
          d = (d != 0 && src != 0) ? 1 : 0;
          break;
        default:
          d = (d != 0 || src != 0) ? 1 : 0;
          break;
      }
      return;
    }
    // Chained assignment: every name left of the last '=' receives the value.
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (auto pos = stmt.find('='); pos != std::string::npos; pos = stmt.find('=', start)) {
      parts.push_back(trim(stmt.substr(start, pos - start)));
      start = pos + 1;
    }
    const auto value = operand(stmt.substr(start));
    for (const auto& p : parts) vars_[p] = value;
  }

  void block(std::size_t begin, std::size_t end, std::size_t depth) {
    for (std::size_t i = begin; i < end;) {
      const auto& l = lines_[i];
      if (l.text.rfind("for _ in range(", 0) == 0) {
        const auto count = std::stoll(l.text.substr(15, l.text.find(')') - 15));
        std::size_t j = i + 1;
        while (j < end && lines_[j].depth > depth) ++j;
        for (std::int64_t r = 0; r < count; ++r) block(i + 1, j, depth + 1);
        i = j;
        continue;
      }
      std::size_t start = 0;
      for (auto pos = l.text.find(';'); ; pos = l.text.find(';', start)) {
        simple(l.text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      ++i;
    }
  }

  std::map<std::string, std::int64_t> vars_;
  std::vector<Line> lines_;
};

inline std::int64_t eval_target(std::string_view source, codesim::dsl::VarId v) {
  return TextEvaluator{}.run(source).at("a" + std::to_string(v.index));
}

/// Full-matrix Wagner-Fischer edit distance.
template <typename T>
std::size_t edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

/// Random loop-free program built directly from AST nodes: every variable is
/// initialised first, then `n_ops` mixed operations follow.
inline codesim::dsl::Program random_program(codesim::Rng& rng, std::size_t n_vars, std::size_t n_ops) {
  using namespace codesim::dsl;
  Program p{n_vars, {}};
  for (std::size_t v = 0; v < n_vars; ++v) p.body.emplace_back(Init{VarId{v}, rng.uniform(-9, 9)});
  for (std::size_t i = 0; i < n_ops; ++i) {
    const VarId dst{rng.index(n_vars)};
    const VarId src{rng.index(n_vars)};
    switch (rng.index(5)) {
      case 0:
        p.body.emplace_back(Assign{dst, src});
        break;
      case 1:
        p.body.emplace_back(AddAssign{dst, src});
        break;
      case 2:
        p.body.emplace_back(SubAssign{dst, src});
        break;
      case 3:
        p.body.emplace_back(AddAssign{dst, rng.uniform(-9, 9)});
        break;
      default:
        p.body.emplace_back(Init{dst, rng.uniform(-9, 9)});
        break;
    }
  }
  return p;
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag) {
    static std::mt19937_64 gen{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("codesim-" + std::string(tag) + "-" + std::to_string(gen() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
