#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace codesim {

/// Shape of an expected answer. Tuples are fixed-arity results of independent
/// computations; sequences are ordered outputs such as a sorted vector.
enum class AnswerKind { Int, Sequence, Tuple, Label };

std::string_view to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(std::string_view text);

/// A ground-truth value or a value extracted from a model response.
struct Answer {
  AnswerKind kind = AnswerKind::Int;
  std::variant<std::int64_t, std::vector<std::int64_t>, std::string> value = std::int64_t{0};

  static Answer integer(std::int64_t v) { return {AnswerKind::Int, v}; }
  static Answer sequence(std::vector<std::int64_t> v) { return {AnswerKind::Sequence, std::move(v)}; }
  static Answer tuple(std::vector<std::int64_t> v) { return {AnswerKind::Tuple, std::move(v)}; }
  static Answer label(std::string v) { return {AnswerKind::Label, std::move(v)}; }

  std::int64_t as_int() const { return std::get<std::int64_t>(value); }
  const std::vector<std::int64_t>& as_items() const { return std::get<std::vector<std::int64_t>>(value); }
  const std::string& as_label() const { return std::get<std::string>(value); }

  /// Python-style rendering: `6`, `[1, 2, 3]`, `(4, -2)`, or the label.
  std::string to_text() const;

  bool operator==(const Answer& other) const;
};

void to_json(nlohmann::json& j, const Answer& a);
void from_json(const nlohmann::json& j, Answer& a);

/// Label comparison ignores case, surrounding whitespace and a leading article.
std::string normalise_label(std::string_view text);

}  // namespace codesim
