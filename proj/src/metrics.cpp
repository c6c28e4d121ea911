#include "codesim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "codesim/error.hpp"

namespace codesim::metrics {

namespace {

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct IntToken {
  std::int64_t value;
  std::size_t begin, end;
};

// Integers that are not part of an identifier such as `a0`.
std::vector<IntToken> integers(std::string_view text, std::size_t from, std::size_t to) {
  std::vector<IntToken> out;
  std::size_t i = from;
  while (i < to) {
    const bool neg = text[i] == '-' && i + 1 < to && std::isdigit(static_cast<unsigned char>(text[i + 1]));
    const bool digit = std::isdigit(static_cast<unsigned char>(text[i]));
    if ((neg || digit) && (i == 0 || !is_word(text[i - 1]))) {
      std::size_t j = i + (neg ? 1 : 0);
      while (j < to && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      // Skip decimals and identifiers that start with digits.
      const bool decimal = j + 1 < to && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]));
      if (!decimal && (j == to || !is_word(text[j]))) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data() + i, text.data() + j, v);
        if (ec == std::errc() && p == text.data() + j) out.push_back({v, i, j});
      }
      while (j < to && (is_word(text[j]) || text[j] == '.')) ++j;
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

// Parses "[1, 2, 3]" / "(1, 2)" starting at an opening bracket. Only integers,
// commas and whitespace may appear inside.
std::optional<ExtractedAnswer> bracket_list(std::string_view text, std::size_t open, AnswerKind kind) {
  const char close = text[open] == '[' ? ']' : ')';
  const auto end = text.find(close, open + 1);
  if (end == std::string_view::npos) return std::nullopt;
  std::vector<std::int64_t> items;
  std::size_t i = open + 1;
  bool expect_value = true;
  while (i < end) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ',') {
      if (expect_value && !items.empty()) return std::nullopt;
      if (items.empty()) return std::nullopt;
      expect_value = true;
      ++i;
    } else {
      if (!expect_value) return std::nullopt;
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data() + i, text.data() + end, v);
      if (ec != std::errc()) return std::nullopt;
      items.push_back(v);
      i = static_cast<std::size_t>(p - text.data());
      expect_value = false;
    }
  }
  if (items.empty() && close == ')') return std::nullopt;
  Answer a = kind == AnswerKind::Tuple ? Answer::tuple(std::move(items)) : Answer::sequence(std::move(items));
  return ExtractedAnswer{std::move(a), open, end + 1};
}

std::optional<ExtractedAnswer> list_in(std::string_view text, std::size_t from, std::size_t to, AnswerKind kind,
                                       bool last) {
  std::optional<ExtractedAnswer> found;
  for (std::size_t i = from; i < to; ++i) {
    if (text[i] != '[' && text[i] != '(') continue;
    auto got = bracket_list(text.substr(0, to), i, kind);
    if (!got) continue;
    if (!last) return got;
    found = got;
    i = got->span_end - 1;
  }
  return found;
}

std::size_t find_marker(std::string_view text) {
  constexpr std::string_view marker = "answer:";
  std::size_t best = std::string_view::npos;
  for (std::size_t i = 0; i + marker.size() <= text.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < marker.size() && match; ++k)
      match = std::tolower(static_cast<unsigned char>(text[i + k])) == marker[k];
    if (match && (i == 0 || !is_word(text[i - 1]))) best = i + marker.size();
  }
  return best;
}

std::optional<ExtractedAnswer> after_marker(std::string_view text, std::size_t start, AnswerKind format) {
  auto line_end = text.find('\n', start);
  if (line_end == std::string_view::npos) line_end = text.size();
  // Allow the value on the following line, e.g. "Answer:\n6".
  if (text.substr(start, line_end - start).find_first_not_of(" \t*`") == std::string_view::npos &&
      line_end < text.size()) {
    start = line_end + 1;
    line_end = text.find('\n', start);
    if (line_end == std::string_view::npos) line_end = text.size();
  }
  switch (format) {
    case AnswerKind::Int: {
      const auto ints = integers(text, start, line_end);
      if (ints.empty()) return std::nullopt;
      return ExtractedAnswer{Answer::integer(ints.front().value), ints.front().begin, ints.front().end};
    }
    case AnswerKind::Sequence:
    case AnswerKind::Tuple: {
      if (auto got = list_in(text, start, line_end, format, false)) return got;
      // Bare comma-separated values.
      const auto ints = integers(text, start, line_end);
      if (ints.empty()) return std::nullopt;
      std::vector<std::int64_t> items;
      for (const auto& t : ints) items.push_back(t.value);
      Answer a = format == AnswerKind::Tuple ? Answer::tuple(std::move(items)) : Answer::sequence(std::move(items));
      return ExtractedAnswer{std::move(a), ints.front().begin, ints.back().end};
    }
    case AnswerKind::Label: {
      auto b = start;
      auto e = line_end;
      auto junk = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '*' || c == '`' || c == '.'; };
      while (b < e && junk(text[b])) ++b;
      while (e > b && junk(text[e - 1])) --e;
      if (b == e) return std::nullopt;
      return ExtractedAnswer{Answer::label(std::string(text.substr(b, e - b))), b, e};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<ExtractedAnswer> extract_answer(std::string_view response, AnswerKind format) {
  if (const auto marker = find_marker(response); marker != std::string_view::npos)
    if (auto got = after_marker(response, marker, format)) return got;
  switch (format) {
    case AnswerKind::Int: {
      const auto ints = integers(response, 0, response.size());
      if (ints.empty()) return std::nullopt;
      return ExtractedAnswer{Answer::integer(ints.back().value), ints.back().begin, ints.back().end};
    }
    case AnswerKind::Sequence:
    case AnswerKind::Tuple:
      return list_in(response, 0, response.size(), format, true);
    case AnswerKind::Label:
      return std::nullopt;
  }
  return std::nullopt;
}

double accuracy(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw EmptyInput("accuracy of an empty set");
  const auto hits = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.correct(); });
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

MaeReport mean_abs_error(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw EmptyInput("mean absolute error of an empty set");
  MaeReport report;
  double total = 0;
  for (const auto& o : outcomes) {
    if (o.truth.kind != AnswerKind::Int) throw Error("mean absolute error needs integer answers");
    if (!o.prediction || o.prediction->kind != AnswerKind::Int) {
      ++report.failures;
      continue;
    }
    total += std::abs(static_cast<double>(o.prediction->as_int()) - static_cast<double>(o.truth.as_int()));
    ++report.scored;
  }
  if (report.scored > 0) report.value = total / static_cast<double>(report.scored);
  return report;
}

std::size_t levenshtein_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const auto up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double levenshtein_similarity(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  const auto longest = std::max(pred.size(), truth.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein_distance(pred, truth)) / static_cast<double>(longest);
}

ApproximationScore approximation_delta(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth,
                                       std::size_t k) {
  if (pred.size() != k || truth.size() != k)
    throw LengthMismatch("approximation tuples must both have length " + std::to_string(k));
  if (k == 0) return {0.0, 1.0};
  std::size_t matches = 0;
  for (std::size_t i = 0; i < k; ++i) matches += pred[i] == truth[i] ? 1 : 0;
  ApproximationScore s;
  s.delta = 1.0 - static_cast<double>(matches) / static_cast<double>(k);
  s.exact_prob_model = matches == k ? 1.0 : std::pow(1.0 - s.delta, static_cast<double>(k));
  return s;
}

std::map<std::string, TokenStat> token_stats(const std::map<std::string, std::vector<TokenCounts>>& groups) {
  std::map<std::string, TokenStat> out;
  for (const auto& [name, counts] : groups) {
    if (counts.empty()) continue;
    TokenStat s;
    for (const auto& c : counts) {
      if (!c.input || !c.output) throw MissingTokenCounts("group '" + name + "' has a record without token counts");
      s.cumulative_input += *c.input;
      s.cumulative_output += *c.output;
    }
    s.n = counts.size();
    s.mean_input = static_cast<double>(s.cumulative_input) / static_cast<double>(s.n);
    s.mean_output = static_cast<double>(s.cumulative_output) / static_cast<double>(s.n);
    out.emplace(name, s);
  }
  return out;
}

bool skipped_repeated_elements(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  if (pred.size() >= truth.size()) return false;
  if (!std::is_sorted(pred.begin(), pred.end())) return false;
  std::vector<std::int64_t> t(truth.begin(), truth.end());
  std::sort(t.begin(), t.end());
  return std::includes(t.begin(), t.end(), pred.begin(), pred.end());
}

MeanStd mean_stddev(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("mean of an empty set");
  MeanStd m;
  m.n = values.size();
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m.n);
  if (m.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(m.n));
  }
  return m;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("pearson series differ in length");
  if (x.empty()) return std::nullopt;
  if (std::equal(x.begin(), x.end(), y.begin())) return 1.0;
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ScoreReport score_group(const std::vector<std::vector<Outcome>>& repeats) {
  std::vector<Outcome> all;
  std::vector<double> per_repeat;
  for (const auto& r : repeats) {
    if (r.empty()) continue;
    all.insert(all.end(), r.begin(), r.end());
    per_repeat.push_back(accuracy(r));
  }
  if (all.empty()) throw EmptyInput("no outcomes to score");
  ScoreReport report;
  report.n = all.size();
  report.accuracy = accuracy(all);
  report.failures = static_cast<std::size_t>(
      std::count_if(all.begin(), all.end(), [](const Outcome& o) { return !o.prediction.has_value(); }));
  report.accuracy_over_repeats = mean_stddev(per_repeat);
  const auto kind = all.front().truth.kind;
  const bool uniform = std::all_of(all.begin(), all.end(), [&](const Outcome& o) { return o.truth.kind == kind; });
  if (uniform && kind == AnswerKind::Int) {
    report.mean_abs_error = mean_abs_error(all).value;
  } else if (uniform && (kind == AnswerKind::Sequence || kind == AnswerKind::Tuple)) {
    double total = 0;
    std::size_t scored = 0;
    for (const auto& o : all) {
      if (!o.prediction) continue;
      total += levenshtein_similarity(o.prediction->as_items(), o.truth.as_items());
      ++scored;
    }
    if (scored > 0) report.levenshtein_similarity = total / static_cast<double>(scored);
  }
  return report;
}

void to_json(nlohmann::json& j, const MeanStd& m) {
  j = {{"mean", m.mean}, {"n", m.n}, {"stddev", m.stddev ? nlohmann::json(*m.stddev) : nlohmann::json()}};
}

void to_json(nlohmann::json& j, const ScoreReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  j = {{"accuracy", r.accuracy},
       {"mean_abs_error", opt(r.mean_abs_error)},
       {"levenshtein_similarity", opt(r.levenshtein_similarity)},
       {"n", r.n},
       {"failures", r.failures},
       {"accuracy_over_repeats", r.accuracy_over_repeats}};
}

}  // namespace codesim::metrics
