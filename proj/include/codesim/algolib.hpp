#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace codesim::algolib {

enum class Style { Iterative, Recursive };

std::string_view to_string(Style style);
Style style_from_string(std::string_view text);

/// Declared asymptotic classes, as printed in the complexity table.
struct Complexity {
  std::string worst;
  std::string average;
  std::string best;
  std::string space;
  bool operator==(const Complexity&) const = default;
};

/// Integer arguments or an integer vector; results share the shape.
using Value = std::variant<std::int64_t, std::vector<std::int64_t>>;

struct AlgorithmEntry {
  std::string name;
  Style style = Style::Iterative;
  std::string source_text;
  Complexity complexity;
  std::string oracle_id;
};

struct VariantPair {
  AlgorithmEntry base;
  AlgorithmEntry variant;
  Value divergence_witness;
};

/// The sixteen sorting routines (eight algorithms, iterative and recursive).
const std::vector<AlgorithmEntry>& corpus();

/// Throws UnknownAlgorithm.
const AlgorithmEntry& entry(std::string_view name, Style style);

/// Runs the native transliteration of the entry's source. Sorting routines are
/// called as `main(v, len(v))`; boolean results are returned as 0/1.
Value oracle_run(const AlgorithmEntry& entry, const Value& input);
Value oracle_run(std::string_view oracle_id, const Value& input);

/// The five base/variant pairs with their smallest diverging input.
const std::vector<VariantPair>& variant_pairs();

/// Renames function identifiers. Names that are already map targets are left
/// alone, so the operation is idempotent. Throws UnknownIdentifier when a
/// defined function is missing from the map.
std::string anonymise(std::string_view source, const std::map<std::string, std::string>& name_map);

nlohmann::json corpus_to_json();

std::string value_to_text(const Value& v);

}  // namespace codesim::algolib
