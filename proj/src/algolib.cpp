#include "codesim/algolib.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "assets.hpp"
#include "codesim/error.hpp"
#include "oracles.hpp"

namespace codesim::algolib {

namespace {

using detail::Vec;

struct SortingRow {
  std::string_view name;
  Complexity iterative;
  Complexity recursive;
};

Complexity with_space(std::string worst, std::string average, std::string best, std::string space) {
  return {std::move(worst), std::move(average), std::move(best), std::move(space)};
}

std::vector<SortingRow> sorting_table() {
  const auto row = [](std::string_view name, const char* worst, const char* avg, const char* best,
                      const char* it_space, const char* rec_space) {
    return SortingRow{name, with_space(worst, avg, best, it_space), with_space(worst, avg, best, rec_space)};
  };
  return {
      row("insertion", "O(n^2)", "Theta(n^2)", "Omega(n)", "O(1)", "O(n)"),
      row("selection", "O(n^2)", "Theta(n^2)", "Omega(n^2)", "O(1)", "O(n)"),
      row("bubble", "O(n^2)", "Theta(n^2)", "Omega(n^2)", "O(1)", "O(n)"),
      row("adaptive_bubble", "O(n^2)", "Theta(n^2)", "Omega(n)", "O(1)", "O(n)"),
      row("quick", "O(n^2)", "Theta(n log n)", "Omega(n log n)", "O(n)", "O(n)"),
      row("merge", "O(n log n)", "Theta(n log n)", "Omega(n log n)", "O(n)", "O(n)"),
      row("tim", "O(n log n)", "Theta(n log n)", "Omega(n)", "O(1)", "O(n)"),
      row("heap", "O(n log n)", "Theta(n log n)", "Omega(n log n)", "O(1)", "O(log n)"),
  };
}

using VecFn = Vec (*)(Vec);
using IntFn = std::int64_t (*)(std::int64_t);

const std::map<std::string, std::variant<VecFn, IntFn>, std::less<>>& oracle_table() {
  static const std::map<std::string, std::variant<VecFn, IntFn>, std::less<>> table = {
      {"insertion_recursive", &detail::insertion_recursive},
      {"bubble_recursive", &detail::bubble_recursive},
      {"selection_recursive", &detail::selection_recursive},
      {"adaptive_bubble_recursive", &detail::adaptive_bubble_recursive},
      {"quick_recursive", &detail::quick_recursive},
      {"merge_recursive", &detail::merge_recursive},
      {"tim_recursive", &detail::tim_recursive},
      {"heap_recursive", &detail::heap_recursive},
      {"insertion_iterative", &detail::insertion_iterative},
      {"bubble_iterative", &detail::bubble_iterative},
      {"selection_iterative", &detail::selection_iterative},
      {"adaptive_bubble_iterative", &detail::adaptive_bubble_iterative},
      {"quick_iterative", &detail::quick_iterative},
      {"merge_iterative", &detail::merge_iterative},
      {"tim_iterative", &detail::tim_iterative},
      {"heap_iterative", &detail::heap_iterative},
      {"fibonacci", &detail::fibonacci},
      {"padovan", &detail::padovan},
      {"bubble_ascending", &detail::bubble_ascending},
      {"bubble_descending", &detail::bubble_descending},
      {"gauss_sum", &detail::gauss_sum},
      {"gauss_alternating", &detail::gauss_alternating},
      {"is_prime", &detail::is_prime},
      {"is_prime_successor", &detail::is_prime_successor},
      {"collatz_sum", &detail::collatz_sum},
      {"collatz_even_sum", &detail::collatz_even_sum},
  };
  return table;
}

std::vector<AlgorithmEntry> build_corpus() {
  std::vector<AlgorithmEntry> out;
  for (auto style : {Style::Recursive, Style::Iterative}) {
    for (const auto& row : sorting_table()) {
      const std::string id = std::string(row.name) + "_" + std::string(to_string(style));
      out.push_back({std::string(row.name), style, std::string(codesim::detail::asset("algorithms/" + id + ".py")),
                     style == Style::Iterative ? row.iterative : row.recursive, id});
    }
  }
  return out;
}

AlgorithmEntry classic(std::string_view id, Complexity complexity) {
  return {std::string(id), Style::Iterative,
          std::string(codesim::detail::asset("algorithms/" + std::string(id) + ".py")), std::move(complexity),
          std::string(id)};
}

// Inputs are enumerated in increasing size; the first disagreement wins.
Value find_witness(const AlgorithmEntry& base, const AlgorithmEntry& variant, bool vector_input,
                   std::int64_t first) {
  if (!vector_input) {
    for (std::int64_t n = first; n <= 20; ++n)
      if (oracle_run(base, Value{n}) != oracle_run(variant, Value{n})) return Value{n};
  } else {
    for (std::size_t length = 0; length <= 3; ++length) {
      std::size_t combos = 1;
      for (std::size_t i = 0; i < length; ++i) combos *= 3;
      for (std::size_t code = 0; code < combos; ++code) {
        Vec v(length);
        std::size_t c = code;
        for (std::size_t i = length; i-- > 0; c /= 3) v[i] = static_cast<std::int64_t>(c % 3);
        if (oracle_run(base, Value{v}) != oracle_run(variant, Value{v})) return Value{v};
      }
    }
  }
  throw Error("no divergence witness for " + base.name + " / " + variant.name);
}

std::vector<VariantPair> build_pairs() {
  const Complexity linear{"O(n)", "Theta(n)", "Omega(1)", "O(1)"};
  const Complexity gauss{"O(n)", "Theta(n)", "Omega(n)", "O(1)"};
  const Complexity quadratic{"O(n^2)", "Theta(n^2)", "Omega(n^2)", "O(1)"};
  const Complexity root{"O(sqrt n)", "O(sqrt n)", "Omega(1)", "O(1)"};
  const Complexity collatz{"unknown", "unknown", "Omega(1)", "O(1)"};
  struct Spec {
    std::string_view base, variant;
    Complexity complexity;
    bool vector_input;
    std::int64_t first;
  };
  const Spec specs[] = {
      {"fibonacci", "padovan", linear, false, 0},
      {"bubble_ascending", "bubble_descending", quadratic, true, 0},
      {"gauss_sum", "gauss_alternating", gauss, false, 0},
      {"is_prime", "is_prime_successor", root, false, 0},
      {"collatz_sum", "collatz_even_sum", collatz, false, 1},
  };
  std::vector<VariantPair> out;
  for (const auto& s : specs) {
    auto base = classic(s.base, s.complexity);
    auto variant = classic(s.variant, s.complexity);
    auto witness = find_witness(base, variant, s.vector_input, s.first);
    out.push_back({std::move(base), std::move(variant), std::move(witness)});
  }
  return out;
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

struct Token {
  std::size_t begin, end;
  bool identifier;
};

// Splits Python source into identifiers and opaque spans; strings and
// comments are never identifiers.
std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      const auto end = src.find('\n', i);
      const auto stop = end == std::string_view::npos ? src.size() : end;
      out.push_back({i, stop, false});
      i = stop;
    } else if (c == '"' || c == '\'') {
      const bool triple = src.substr(i, 3) == std::string(3, c);
      const std::string close = triple ? std::string(3, c) : std::string(1, c);
      std::size_t j = i + close.size();
      while (j < src.size() && src.substr(j, close.size()) != close) j += (src[j] == '\\') ? 2 : 1;
      j = std::min(src.size(), j + close.size());
      out.push_back({i, j, false});
      i = j;
    } else if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      out.push_back({i, j, true});
      i = j;
    } else if (c >= '0' && c <= '9') {
      std::size_t j = i;
      while (j < src.size() && (is_ident_char(src[j]) || src[j] == '.')) ++j;
      out.push_back({i, j, false});
      i = j;
    } else {
      out.push_back({i, i + 1, false});
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Style style) { return style == Style::Iterative ? "iterative" : "recursive"; }

Style style_from_string(std::string_view text) {
  if (text == "iterative") return Style::Iterative;
  if (text == "recursive") return Style::Recursive;
  throw UnknownAlgorithm("unknown style '" + std::string(text) + "'");
}

const std::vector<AlgorithmEntry>& corpus() {
  static const std::vector<AlgorithmEntry> entries = build_corpus();
  return entries;
}

const AlgorithmEntry& entry(std::string_view name, Style style) {
  for (const auto& e : corpus())
    if (e.name == name && e.style == style) return e;
  throw UnknownAlgorithm("no sorting routine '" + std::string(name) + "' (" + std::string(to_string(style)) + ")");
}

Value oracle_run(std::string_view oracle_id, const Value& input) {
  const auto& table = oracle_table();
  auto it = table.find(oracle_id);
  if (it == table.end()) throw UnknownAlgorithm("no oracle '" + std::string(oracle_id) + "'");
  if (const auto* fn = std::get_if<VecFn>(&it->second)) {
    const auto* v = std::get_if<Vec>(&input);
    if (v == nullptr) throw Error("oracle '" + std::string(oracle_id) + "' expects an integer sequence");
    return (*fn)(*v);
  }
  const auto* n = std::get_if<std::int64_t>(&input);
  if (n == nullptr) throw Error("oracle '" + std::string(oracle_id) + "' expects an integer");
  return std::get<IntFn>(it->second)(*n);
}

Value oracle_run(const AlgorithmEntry& e, const Value& input) { return oracle_run(e.oracle_id, input); }

const std::vector<VariantPair>& variant_pairs() {
  static const std::vector<VariantPair> pairs = build_pairs();
  return pairs;
}

std::string anonymise(std::string_view source, const std::map<std::string, std::string>& name_map) {
  std::set<std::string, std::less<>> targets;
  for (const auto& [from, to] : name_map) targets.insert(to);
  const auto tokens = tokenize(source);
  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    if (!tokens[t].identifier || source.substr(tokens[t].begin, tokens[t].end - tokens[t].begin) != "def") continue;
    std::size_t n = t + 1;
    while (n < tokens.size() && !tokens[n].identifier && source.substr(tokens[n].begin, 1) == " ") ++n;
    if (n >= tokens.size() || !tokens[n].identifier) continue;
    const auto name = std::string(source.substr(tokens[n].begin, tokens[n].end - tokens[n].begin));
    if (name_map.count(name) == 0 && targets.count(name) == 0)
      throw UnknownIdentifier("function '" + name + "' has no entry in the name map");
  }
  std::string out;
  out.reserve(source.size());
  for (const auto& tok : tokens) {
    const auto text = source.substr(tok.begin, tok.end - tok.begin);
    if (tok.identifier) {
      auto it = name_map.find(std::string(text));
      if (it != name_map.end()) {
        out += it->second;
        continue;
      }
    }
    out += text;
  }
  return out;
}

std::string value_to_text(const Value& v) {
  if (const auto* n = std::get_if<std::int64_t>(&v)) return std::to_string(*n);
  std::string out = "[";
  const auto& items = std::get<Vec>(v);
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + std::to_string(items[i]);
  return out + "]";
}

nlohmann::json corpus_to_json() {
  auto j = nlohmann::json::array();
  for (const auto& e : corpus()) {
    j.push_back({{"name", e.name},
                 {"style", to_string(e.style)},
                 {"complexity",
                  {{"worst", e.complexity.worst},
                   {"average", e.complexity.average},
                   {"best", e.complexity.best},
                   {"space", e.complexity.space}}},
                 {"source_text", e.source_text}});
  }
  return j;
}

}  // namespace codesim::algolib
