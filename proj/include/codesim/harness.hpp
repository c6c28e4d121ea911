#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "codesim/answer.hpp"
#include "codesim/error.hpp"
#include "codesim/metrics.hpp"
#include "codesim/prompting.hpp"
#include "codesim/taskgen.hpp"

namespace codesim::harness {

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Backends

enum class BackendKind { HttpChat, PerfectOracle, Scripted };

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view text);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{16000};
};

struct BackendSpec {
  BackendKind kind = BackendKind::PerfectOracle;
  // http_chat
  std::string endpoint;  ///< full URL of the chat-completions route
  std::string model;
  double temperature = 0.0;
  int max_tokens = 4096;
  double presence_penalty = 0.0;
  std::string auth_env;  ///< environment variable holding the bearer token
  std::chrono::milliseconds timeout{120000};
  RetryPolicy retry;
  // scripted
  std::filesystem::path fixture_path;
  // capabilities
  bool returns_token_counts = true;
  bool returns_token_likelihoods = false;
};

void to_json(nlohmann::json& j, const BackendSpec& spec);
void from_json(const nlohmann::json& j, BackendSpec& spec);

struct BackendRequest {
  std::string key;  ///< instance id, rendering and style; scripted fixtures are keyed by it
  const prompting::PromptBundle& bundle;
  const Answer& truth;
};

struct BackendResponse {
  std::string text;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  std::optional<std::vector<double>> token_logprobs;
};

/// Raised by backends; `transient` failures are retried.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool transient) : Error(what), transient_(transient) {}
  bool transient() const { return transient_; }

 private:
  bool transient_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse complete(const BackendRequest& request) = 0;
  virtual const BackendSpec& spec() const = 0;
};

/// Throws ConfigError or FixtureMissing.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

/// Whitespace-delimited token count used where a backend reports none.
std::int64_t approx_token_count(std::string_view text);

/// Calls the backend, retrying transient failures with exponential backoff and
/// jitter. Rethrows the last error once attempts are exhausted.
BackendResponse complete_with_retry(Backend& backend, const BackendRequest& request);

// ---------------------------------------------------------------------------
// Configuration

/// One family with a parameter grid (cartesian product) and fixed overrides.
struct Experiment {
  taskgen::TaskFamily family = taskgen::TaskFamily::StraightLine;
  std::map<std::string, std::vector<nlohmann::json>> grid;
  std::map<std::string, nlohmann::json> fixed;

  std::vector<taskgen::GenParams> expand() const;
};

struct RunConfig {
  BackendSpec backend;
  std::vector<Experiment> experiments;
  std::vector<prompting::PromptStyle> styles{prompting::PromptStyle::CoT};
  std::vector<prompting::Rendering> renderings{prompting::Rendering::Synthetic};
  int repeats = 3;
  int batch_size = 30;
  std::uint64_t seed = 0;
  int max_in_flight = 4;
  std::filesystem::path output_dir;

  /// Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Records

namespace category {
inline constexpr std::string_view kNone = "none";
inline constexpr std::string_view kWrongAnswer = "wrong_answer";
inline constexpr std::string_view kExtractionFailure = "extraction_failure";
inline constexpr std::string_view kBackendError = "backend_error";
inline constexpr std::string_view kSkippedRepeats = "skipped_repeated_elements";
}  // namespace category

struct RunRecord {
  std::string instance_id;
  taskgen::TaskFamily family = taskgen::TaskFamily::StraightLine;
  std::string grid_label;
  std::string control_name;
  std::int64_t control_value = 0;
  int repeat = 0;
  prompting::Rendering rendering = prompting::Rendering::Synthetic;
  prompting::PromptStyle style = prompting::PromptStyle::CoT;
  std::string prompt;
  std::string response;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
  std::optional<std::vector<double>> token_logprobs;
  std::int64_t latency_ms = 0;
  Answer truth;
  std::optional<Answer> extracted;
  bool correct = false;
  std::string error_category{category::kNone};
  std::optional<std::string> held_out;

  bool operator==(const RunRecord&) const = default;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);

/// Extracts the answer from `response` and fills correctness and category.
void grade(RunRecord& record, AnswerKind format);

// ---------------------------------------------------------------------------
// Running

/// Generates every instance of the configured grid, prompts the backend with
/// bounded parallelism and returns the records sorted by instance id. When
/// `output_dir` is set each batch is persisted as it completes and existing
/// batch files are reused.
std::vector<RunRecord> run(const RunConfig& config);
/// Same, with a caller-supplied backend; `config.backend` is ignored.
std::vector<RunRecord> run(const RunConfig& config, Backend& backend);

/// `<instance id>|<rendering>|<style>`; scripted fixtures use it as the key.
std::string request_key(std::string_view instance_id, prompting::Rendering rendering, prompting::PromptStyle style);

/// The `batch_size` instances of one grid point and repeat, carrying the ids
/// used in run records. Throws ConfigError for infeasible parameters.
std::vector<taskgen::PairedInstance> generate_batch(const RunConfig& config, const taskgen::GenParams& point,
                                                    int repeat);

/// Seed of the instance at (grid point, repeat, index).
std::uint64_t instance_seed(const RunConfig& config, const taskgen::GenParams& params, int repeat, int index);

// ---------------------------------------------------------------------------
// Scoring

struct RunSummary {
  taskgen::TaskFamily family = taskgen::TaskFamily::StraightLine;
  std::string grid_label;
  std::string control_name;
  std::int64_t control_value = 0;
  prompting::Rendering rendering = prompting::Rendering::Synthetic;
  prompting::PromptStyle style = prompting::PromptStyle::CoT;
  metrics::ScoreReport report;
  std::optional<metrics::TokenStat> tokens;
  std::map<std::string, std::size_t> categories;
};

/// Synthetic vs naturalistic accuracy across the grid of one family and style.
struct Correlation {
  taskgen::TaskFamily family = taskgen::TaskFamily::StraightLine;
  prompting::PromptStyle style = prompting::PromptStyle::CoT;
  std::vector<std::string> grid_labels;
  std::vector<double> synthetic;
  std::vector<double> naturalistic;
  std::optional<double> pearson;
};

struct SummarySet {
  std::vector<RunSummary> groups;
  std::vector<Correlation> correlations;
};

/// Groups by (family, grid point, rendering, style). Throws EmptyInput.
SummarySet score(std::span<const RunRecord> records);

nlohmann::json summary_to_json(const SummarySet& summary);
/// family,grid,control,control_value,rendering,style,metric,mean,stddev,n
std::string summary_to_csv(const SummarySet& summary);
/// Per-group token statistics as CSV.
std::string token_stats_csv(const SummarySet& summary);

// ---------------------------------------------------------------------------
// Persistence

struct LogFile {
  int schema_version = kSchemaVersion;
  nlohmann::json config;
  std::vector<RunRecord> records;
};

/// `logs/<family>/<label>_n_instances-<n>_batch-<b>.json`, relative to the
/// output directory.
std::filesystem::path batch_log_path(const taskgen::GenParams& params, int batch_size, int repeat);

/// Writes one file per (family, grid point, repeat). Returns the files written.
std::vector<std::filesystem::path> persist(std::span<const RunRecord> records, const RunConfig& config);

/// Writes atomically (temporary file and rename). Throws IoError.
void write_log(const std::filesystem::path& path, const LogFile& log);
std::string serialise_log(const LogFile& log);

/// Loads a single log file or every `*.json` log below a directory, in path
/// order. Throws IoError or SchemaVersionMismatch.
LogFile load_file(const std::filesystem::path& path);
std::vector<RunRecord> load(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Memorisation probes

/// Mean of the lowest k% per-token log-likelihoods. Throws CapabilityMissing
/// when the record carries none.
double memorisation_min_k(const RunRecord& record, double k_percent);

/// Line-level longest-common-subsequence length divided by the number of
/// held-out lines.
double verbatim_recovery(std::string_view response, std::string_view held_out);

/// Prompts the backend with truncated sources of every base and variant
/// routine in the variant pairs.
std::vector<RunRecord> run_memorisation_probes(const BackendSpec& backend, double truncate_fraction);

}  // namespace codesim::harness
