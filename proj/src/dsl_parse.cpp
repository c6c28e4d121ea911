#include <algorithm>
#include <charconv>
#include <sstream>

#include "codesim/dsl.hpp"
#include "codesim/error.hpp"

namespace codesim::dsl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<VarId> parse_var(std::string_view s) {
  s = trim(s);
  if (s.size() < 2 || s[0] != 'a') return std::nullopt;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), idx);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return VarId{idx};
}

class Parser {
 public:
  explicit Parser(std::size_t line_no) : line_no_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + what);
  }

  VarId var(std::string_view s) const {
    auto v = parse_var(s);
    if (!v) fail("expected a variable, got '" + std::string(s) + "'");
    return *v;
  }

  Operand operand(std::string_view s) const {
    if (auto v = parse_var(s)) return *v;
    if (auto n = parse_int(s)) return *n;
    fail("expected a variable or integer, got '" + std::string(s) + "'");
  }

  Statement statement(std::string_view text) const {
    text = trim(text);
    static constexpr std::string_view kCompound[] = {"+=", "-=", "&=", "|="};
    for (auto op : kCompound) {
      const auto pos = text.find(op);
      if (pos == std::string_view::npos) continue;
      const auto dst = var(text.substr(0, pos));
      const auto rhs = text.substr(pos + 2);
      switch (op[0]) {
        case '+':
          return AddAssign{dst, operand(rhs)};
        case '-':
          return SubAssign{dst, operand(rhs)};
        case '&':
          return AndAssign{dst, var(rhs)};
        default:
          return OrAssign{dst, var(rhs)};
      }
    }
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t pos; (pos = text.find('=', start)) != std::string_view::npos; start = pos + 1)
      parts.push_back(text.substr(start, pos - start));
    parts.push_back(text.substr(start));
    if (parts.size() < 2) fail("expected an assignment, got '" + std::string(text) + "'");
    const auto rhs = parts.back();
    parts.pop_back();
    if (parts.size() == 1) {
      const auto dst = var(parts[0]);
      if (auto n = parse_int(rhs)) return Init{dst, *n};
      return Assign{dst, var(rhs)};
    }
    auto n = parse_int(rhs);
    if (!n) fail("chained assignment must end in an integer literal");
    MultiInit mi{{}, *n};
    for (auto p : parts) mi.vars.push_back(var(p));
    return mi;
  }

 private:
  std::size_t line_no_;
};

struct Line {
  std::size_t number;
  std::size_t indent;
  std::string_view text;
};

std::size_t max_index(const std::vector<Node>& nodes, std::size_t current) {
  for (const auto& node : nodes) {
    if (node.is_loop()) {
      current = max_index(node.loop().body, current);
      continue;
    }
    for (auto v : defs(node.statement())) current = std::max(current, v.index + 1);
    for (auto v : uses(node.statement())) current = std::max(current, v.index + 1);
  }
  return current;
}

std::vector<Node> parse_block(const std::vector<Line>& lines, std::size_t& pos, std::size_t indent) {
  std::vector<Node> out;
  while (pos < lines.size()) {
    const auto& line = lines[pos];
    if (line.indent < indent) break;
    Parser p(line.number);
    if (line.indent > indent) p.fail("unexpected indentation");
    constexpr std::string_view kFor = "for _ in range(";
    if (line.text.rfind(kFor, 0) == 0) {
      const auto close = line.text.find("):");
      if (close == std::string_view::npos || close + 2 != line.text.size()) p.fail("malformed loop header");
      auto count = parse_int(line.text.substr(kFor.size(), close - kFor.size()));
      if (!count || *count < 1) p.fail("loop count must be a positive integer");
      ++pos;
      Loop loop{*count, parse_block(lines, pos, indent + 1)};
      if (loop.body.empty()) p.fail("empty loop body");
      out.emplace_back(std::move(loop));
      continue;
    }
    std::size_t start = 0;
    while (start <= line.text.size()) {
      auto semi = line.text.find(';', start);
      if (semi == std::string_view::npos) semi = line.text.size();
      const auto piece = trim(line.text.substr(start, semi - start));
      if (!piece.empty()) out.emplace_back(p.statement(piece));
      start = semi + 1;
    }
    ++pos;
  }
  return out;
}

}  // namespace

Program parse_source(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto raw = text.substr(start, end - start);
    ++number;
    start = end + 1;
    std::size_t spaces = 0;
    while (spaces < raw.size() && raw[spaces] == ' ') ++spaces;
    auto body = trim(raw);
    if (body.empty() || body.front() == '#') continue;
    if (spaces % 4 != 0) Parser(number).fail("indentation must be a multiple of four spaces");
    lines.push_back({number, spaces / 4, body});
  }
  std::size_t pos = 0;
  Program program;
  program.body = parse_block(lines, pos, 0);
  if (pos != lines.size()) Parser(lines[pos].number).fail("unexpected indentation");
  program.var_count = max_index(program.body, 0);
  return program;
}

}  // namespace codesim::dsl
