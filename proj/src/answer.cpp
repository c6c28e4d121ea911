#include "codesim/answer.hpp"

#include <algorithm>
#include <cctype>

#include "codesim/error.hpp"

namespace codesim {

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::Int:
      return "int";
    case AnswerKind::Sequence:
      return "sequence";
    case AnswerKind::Tuple:
      return "tuple";
    case AnswerKind::Label:
      return "label";
  }
  return "int";
}

AnswerKind answer_kind_from_string(std::string_view text) {
  for (auto k : {AnswerKind::Int, AnswerKind::Sequence, AnswerKind::Tuple, AnswerKind::Label})
    if (to_string(k) == text) return k;
  throw ParseError("unknown answer kind '" + std::string(text) + "'");
}

std::string Answer::to_text() const {
  switch (kind) {
    case AnswerKind::Int:
      return std::to_string(as_int());
    case AnswerKind::Label:
      return as_label();
    case AnswerKind::Sequence:
    case AnswerKind::Tuple: {
      const bool tuple = kind == AnswerKind::Tuple;
      std::string out = tuple ? "(" : "[";
      const auto& items = as_items();
      for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + std::to_string(items[i]);
      if (tuple && items.size() == 1) out += ",";
      return out + (tuple ? ")" : "]");
    }
  }
  return {};
}

bool Answer::operator==(const Answer& other) const {
  if (kind != other.kind) return false;
  if (kind == AnswerKind::Label) return normalise_label(as_label()) == normalise_label(other.as_label());
  return value == other.value;
}

std::string normalise_label(std::string_view text) {
  std::string out;
  for (char c : text) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto is_space = [](unsigned char c) { return std::isspace(c) || c == '.' || c == '"' || c == '\'' || c == '*'; };
  while (!out.empty() && is_space(static_cast<unsigned char>(out.back()))) out.pop_back();
  std::size_t start = 0;
  while (start < out.size() && is_space(static_cast<unsigned char>(out[start]))) ++start;
  out.erase(0, start);
  for (std::string_view article : {"the ", "a ", "an "}) {
    if (out.rfind(article, 0) == 0) {
      out.erase(0, article.size());
      break;
    }
  }
  // Collapse internal runs of whitespace.
  std::string collapsed;
  for (char c : out) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!collapsed.empty() && collapsed.back() != ' ') collapsed += ' ';
    } else {
      collapsed += c;
    }
  }
  return collapsed;
}

void to_json(nlohmann::json& j, const Answer& a) {
  j = nlohmann::json{{"kind", to_string(a.kind)}};
  switch (a.kind) {
    case AnswerKind::Int:
      j["value"] = a.as_int();
      break;
    case AnswerKind::Label:
      j["value"] = a.as_label();
      break;
    default:
      j["value"] = a.as_items();
      break;
  }
}

void from_json(const nlohmann::json& j, Answer& a) {
  const auto kind = answer_kind_from_string(j.at("kind").get<std::string>());
  const auto& v = j.at("value");
  switch (kind) {
    case AnswerKind::Int:
      a = Answer::integer(v.get<std::int64_t>());
      break;
    case AnswerKind::Label:
      a = Answer::label(v.get<std::string>());
      break;
    case AnswerKind::Sequence:
      a = Answer::sequence(v.get<std::vector<std::int64_t>>());
      break;
    case AnswerKind::Tuple:
      a = Answer::tuple(v.get<std::vector<std::int64_t>>());
      break;
  }
}

}  // namespace codesim
