#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codesim/answer.hpp"

namespace codesim::metrics {

struct ExtractedAnswer {
  Answer answer;
  std::size_t span_begin = 0;  ///< character range of the value in the response
  std::size_t span_end = 0;
};

/// Prefers the last `Answer:` marker; otherwise falls back to the last integer
/// (Int) or the last bracketed integer list (Sequence/Tuple). Returns nullopt
/// when nothing parsable is found. The result always has the requested kind.
std::optional<ExtractedAnswer> extract_answer(std::string_view response, AnswerKind format);

/// One scored prediction; a missing prediction is an extraction failure.
struct Outcome {
  std::optional<Answer> prediction;
  Answer truth;

  bool correct() const { return prediction.has_value() && *prediction == truth; }
};

/// Fraction of exact matches; failures count as wrong. Throws EmptyInput.
double accuracy(std::span<const Outcome> outcomes);

struct MaeReport {
  std::optional<double> value;  ///< absent when every extraction failed
  std::size_t scored = 0;
  std::size_t failures = 0;
};

/// Mean absolute error over integer outcomes; failures are excluded and
/// counted. Throws EmptyInput.
MaeReport mean_abs_error(std::span<const Outcome> outcomes);

/// Unit-cost edit distance over whole integers.
std::size_t levenshtein_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

/// 1 - distance / max(|pred|, |truth|); two empty sequences score 1.
double levenshtein_similarity(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth);

struct ApproximationScore {
  double delta = 0;            ///< fraction of mismatching components
  double exact_prob_model = 1; ///< (1 - delta)^k
};

/// Throws LengthMismatch unless both tuples have length k.
ApproximationScore approximation_delta(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth,
                                       std::size_t k);

struct TokenCounts {
  std::optional<std::int64_t> input;
  std::optional<std::int64_t> output;
};

struct TokenStat {
  std::size_t n = 0;
  double mean_input = 0;
  double mean_output = 0;
  std::int64_t cumulative_input = 0;
  std::int64_t cumulative_output = 0;
};

/// Per-group means and totals. Empty groups are omitted. Throws
/// MissingTokenCounts if any record lacks counts.
std::map<std::string, TokenStat> token_stats(const std::map<std::string, std::vector<TokenCounts>>& groups);

/// Sorted prediction that is a strict sub-multiset of the truth: the model
/// dropped repeated elements.
bool skipped_repeated_elements(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth);

struct MeanStd {
  double mean = 0;
  std::optional<double> stddev;  ///< population stddev; needs two or more values
  std::size_t n = 0;
};

/// Throws EmptyInput.
MeanStd mean_stddev(std::span<const double> values);

/// Pearson correlation. Identical series give 1; otherwise absent when either
/// series has zero variance. Throws LengthMismatch.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Aggregate metrics for one group of outcomes partitioned into repeats.
struct ScoreReport {
  double accuracy = 0;
  std::optional<double> mean_abs_error;
  std::optional<double> levenshtein_similarity;
  std::size_t n = 0;
  std::size_t failures = 0;
  MeanStd accuracy_over_repeats;
};

/// Throws EmptyInput.
ScoreReport score_group(const std::vector<std::vector<Outcome>>& repeats);

void to_json(nlohmann::json& j, const MeanStd& m);
void to_json(nlohmann::json& j, const ScoreReport& r);

}  // namespace codesim::metrics
