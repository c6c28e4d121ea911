#include "codesim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>

#include "codesim/rng.hpp"

namespace codesim::harness {

using nlohmann::json;
using prompting::PromptStyle;
using prompting::Rendering;
using taskgen::GenParams;

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string instance_id(const GenParams& params, int repeat, int index) {
  char tail[32];
  std::snprintf(tail, sizeof tail, "/b%02d/i%04d", repeat + 1, index);
  return std::string(taskgen::slug(params.family)) + "/" + params.label() + tail;
}

struct Job {
  taskgen::PairedInstance instance;
  int repeat = 0;
  Rendering rendering = Rendering::Synthetic;
  PromptStyle style = PromptStyle::CoT;
  prompting::PromptBundle bundle;
};

RunRecord execute_job(Backend& backend, const Job& job) {
  RunRecord rec;
  const auto& inst = job.instance;
  rec.instance_id = inst.id;
  rec.family = inst.family;
  rec.grid_label = inst.params.label();
  rec.control_name = inst.params.control_name();
  rec.control_value = inst.params.control_value();
  rec.repeat = job.repeat;
  rec.rendering = job.rendering;
  rec.style = job.style;
  rec.prompt = job.bundle.user_text;
  rec.truth = inst.truth_for(job.rendering == Rendering::Naturalistic);

  const auto key = request_key(inst.id, job.rendering, job.style);
  const auto start = std::chrono::steady_clock::now();
  try {
    auto response = complete_with_retry(backend, BackendRequest{key, job.bundle, rec.truth});
    rec.response = std::move(response.text);
    rec.input_tokens = response.input_tokens;
    rec.output_tokens = response.output_tokens;
    rec.token_logprobs = std::move(response.token_logprobs);
  } catch (const BackendError& e) {
    rec.response.clear();
    rec.error_category = std::string(category::kBackendError);
  }
  rec.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (rec.error_category != category::kBackendError) grade(rec, job.bundle.answer_format);
  return rec;
}

// Runs jobs on at most `max_in_flight` threads; results keep job order.
std::vector<RunRecord> execute_all(Backend& backend, const std::vector<Job>& jobs, int max_in_flight) {
  std::vector<RunRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        out[i] = execute_job(backend, jobs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_in_flight)), jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

bool sort_key_less(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.instance_id, a.rendering, a.style) < std::tie(b.instance_id, b.rendering, b.style);
}

}  // namespace

std::string request_key(std::string_view id, Rendering rendering, PromptStyle style) {
  return std::string(id) + "|" + std::string(prompting::to_string(rendering)) + "|" +
         std::string(prompting::to_string(style));
}

// ---------------------------------------------------------------------------
// Configuration

std::vector<GenParams> Experiment::expand() const {
  auto base = GenParams::defaults(family);
  for (const auto& [key, value] : fixed) base.set(key, value);
  std::vector<GenParams> points{base};
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw ConfigError("grid axis '" + key + "' has no values");
    std::vector<GenParams> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        auto q = p;
        q.set(key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

void RunConfig::validate() const {
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (experiments.empty()) throw ConfigError("no experiments configured");
  if (styles.empty()) throw ConfigError("no prompt styles configured");
  if (renderings.empty()) throw ConfigError("no renderings configured");
  if (backend.kind == BackendKind::HttpChat) {
    if (backend.endpoint.empty() || backend.model.empty()) throw ConfigError("http_chat needs endpoint and model");
    if (backend.timeout.count() <= 0) throw ConfigError("http_chat needs a positive timeout");
    if (backend.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be at least 1");
  }
  if (backend.kind == BackendKind::Scripted && backend.fixture_path.empty())
    throw ConfigError("scripted backend needs a fixture path");
  for (const auto& e : experiments) {
    try {
      e.expand();
    } catch (const InfeasibleParams& err) {
      throw ConfigError(err.what());
    }
  }
}

void to_json(json& j, const RunConfig& c) {
  json experiments = json::array();
  for (const auto& e : c.experiments) {
    json grid = json::object(), fixed = json::object();
    for (const auto& [k, v] : e.grid) grid[k] = v;
    for (const auto& [k, v] : e.fixed) fixed[k] = v;
    experiments.push_back({{"family", taskgen::slug(e.family)}, {"grid", grid}, {"fixed", fixed}});
  }
  json styles = json::array(), renderings = json::array();
  for (auto s : c.styles) styles.push_back(prompting::to_string(s));
  for (auto r : c.renderings) renderings.push_back(prompting::to_string(r));
  j = json{{"backend", c.backend},        {"experiments", experiments},     {"styles", styles},
           {"renderings", renderings},    {"repeats", c.repeats},           {"batch_size", c.batch_size},
           {"seed", c.seed},              {"max_in_flight", c.max_in_flight}, {"output_dir", c.output_dir.string()}};
}

void from_json(const json& j, RunConfig& c) {
  c = RunConfig{};
  try {
    if (j.contains("backend")) c.backend = j.at("backend").get<BackendSpec>();
    for (const auto& e : j.at("experiments")) {
      Experiment ex;
      ex.family = taskgen::family_from_slug(e.at("family").get<std::string>());
      if (e.contains("grid"))
        for (const auto& [k, v] : e.at("grid").items())
          ex.grid[k] = v.is_array() ? v.get<std::vector<json>>() : std::vector<json>{v};
      if (e.contains("fixed"))
        for (const auto& [k, v] : e.at("fixed").items()) ex.fixed[k] = v;
      c.experiments.push_back(std::move(ex));
    }
    auto list = [&](const char* plural, const char* singular) {
      std::vector<std::string> out;
      if (j.contains(plural)) out = j.at(plural).get<std::vector<std::string>>();
      if (j.contains(singular)) out = {j.at(singular).get<std::string>()};
      return out;
    };
    if (auto styles = list("styles", "style"); !styles.empty()) {
      c.styles.clear();
      for (const auto& s : styles) c.styles.push_back(prompting::style_from_string(s));
    }
    if (auto renderings = list("renderings", "rendering"); !renderings.empty()) {
      c.renderings.clear();
      for (const auto& r : renderings) {
        if (r == "both") {
          c.renderings.push_back(Rendering::Synthetic);
          c.renderings.push_back(Rendering::Naturalistic);
        } else {
          c.renderings.push_back(prompting::rendering_from_string(r));
        }
      }
    }
    c.repeats = j.value("repeats", 3);
    c.batch_size = j.value("batch_size", 30);
    c.seed = j.value("seed", std::uint64_t{0});
    c.max_in_flight = j.value("max_in_flight", 4);
    c.output_dir = j.value("output_dir", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const InfeasibleParams& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  auto config = doc.get<RunConfig>();
  if (!config.output_dir.empty() && config.output_dir.is_relative())
    config.output_dir = path.parent_path() / config.output_dir;
  if (!config.backend.fixture_path.empty() && config.backend.fixture_path.is_relative())
    config.backend.fixture_path = path.parent_path() / config.backend.fixture_path;
  return config;
}

// ---------------------------------------------------------------------------
// Grading and running

void grade(RunRecord& record, AnswerKind format) {
  const auto got = metrics::extract_answer(record.response, format);
  record.extracted.reset();
  record.correct = false;
  if (!got) {
    record.error_category = std::string(category::kExtractionFailure);
    return;
  }
  record.extracted = got->answer;
  record.correct = got->answer == record.truth;
  if (record.correct) {
    record.error_category = std::string(category::kNone);
  } else if (format == AnswerKind::Sequence && record.truth.kind == AnswerKind::Sequence &&
             metrics::skipped_repeated_elements(got->answer.as_items(), record.truth.as_items())) {
    record.error_category = std::string(category::kSkippedRepeats);
  } else {
    record.error_category = std::string(category::kWrongAnswer);
  }
}

std::uint64_t instance_seed(const RunConfig& config, const GenParams& params, int repeat, int index) {
  return derive_seed(config.seed, {static_cast<std::uint64_t>(params.family), fnv1a(params.label()),
                                   static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(index)});
}

std::vector<taskgen::PairedInstance> generate_batch(const RunConfig& config, const GenParams& point, int repeat) {
  std::vector<taskgen::PairedInstance> out;
  for (int i = 0; i < config.batch_size; ++i) {
    auto params = point;
    params.seed = instance_seed(config, point, repeat, i);
    try {
      out.push_back(taskgen::generate_pair(params));
    } catch (const InfeasibleParams& e) {
      throw ConfigError(std::string(taskgen::slug(point.family)) + " " + point.label() + ": " + e.what());
    }
    out.back().id = instance_id(point, repeat, i);
  }
  return out;
}

std::vector<RunRecord> run(const RunConfig& config) {
  config.validate();
  auto backend = make_backend(config.backend);
  return run(config, *backend);
}

std::vector<RunRecord> run(const RunConfig& config, Backend& backend) {
  config.validate();
  // Build every prompt before contacting the backend so configuration errors
  // surface immediately.
  struct Batch {
    GenParams params;
    int repeat;
    std::vector<Job> jobs;
  };
  std::vector<Batch> batches;
  for (const auto& experiment : config.experiments) {
    for (const auto& point : experiment.expand()) {
      for (int r = 0; r < config.repeats; ++r) {
        Batch batch{point, r, {}};
        for (const auto& inst : generate_batch(config, point, r)) {
          for (auto rendering : config.renderings) {
            for (auto style : config.styles) {
              Job job{inst, r, rendering, style, {}};
              try {
                job.bundle = prompting::build_prompt(inst, rendering, style);
              } catch (const StyleMismatch& e) {
                throw ConfigError(std::string(taskgen::slug(point.family)) + ": " + e.what());
              }
              batch.jobs.push_back(std::move(job));
            }
          }
        }
        batches.push_back(std::move(batch));
      }
    }
  }

  std::vector<RunRecord> records;
  const json config_json = config;
  for (const auto& batch : batches) {
    std::filesystem::path file;
    if (!config.output_dir.empty()) {
      file = config.output_dir / batch_log_path(batch.params, config.batch_size, batch.repeat);
      if (std::filesystem::exists(file)) {
        try {
          auto existing = load_file(file);
          if (existing.records.size() == batch.jobs.size()) {
            records.insert(records.end(), existing.records.begin(), existing.records.end());
            continue;
          }
        } catch (const Error&) {
          // Unreadable batch: regenerate it.
        }
      }
    }
    auto done = execute_all(backend, batch.jobs, config.max_in_flight);
    std::sort(done.begin(), done.end(), sort_key_less);
    if (!file.empty()) write_log(file, LogFile{kSchemaVersion, config_json, done});
    records.insert(records.end(), done.begin(), done.end());
  }
  std::stable_sort(records.begin(), records.end(), sort_key_less);
  return records;
}

// ---------------------------------------------------------------------------
// Scoring

SummarySet score(std::span<const RunRecord> records) {
  if (records.empty()) throw EmptyInput("no records to score");
  using Key = std::tuple<int, std::int64_t, std::string, int, int>;
  struct Group {
    const RunRecord* first = nullptr;
    std::map<int, std::vector<metrics::Outcome>> repeats;
    std::map<std::string, std::vector<metrics::TokenCounts>> tokens;
    std::map<std::string, std::size_t> categories;
  };
  std::map<Key, Group> groups;
  for (const auto& r : records) {
    Key key{static_cast<int>(r.family), r.control_value, r.grid_label, static_cast<int>(r.rendering),
            static_cast<int>(r.style)};
    auto& g = groups[key];
    if (!g.first) g.first = &r;
    g.repeats[r.repeat].push_back({r.extracted, r.truth});
    g.tokens["all"].push_back({r.input_tokens, r.output_tokens});
    ++g.categories[r.error_category];
  }

  SummarySet out;
  for (const auto& [key, g] : groups) {
    RunSummary s;
    s.family = g.first->family;
    s.grid_label = g.first->grid_label;
    s.control_name = g.first->control_name;
    s.control_value = g.first->control_value;
    s.rendering = g.first->rendering;
    s.style = g.first->style;
    std::vector<std::vector<metrics::Outcome>> parts;
    for (const auto& [_, outcomes] : g.repeats) parts.push_back(outcomes);
    s.report = metrics::score_group(parts);
    try {
      s.tokens = metrics::token_stats(g.tokens).at("all");
    } catch (const MissingTokenCounts&) {
      s.tokens.reset();
    }
    s.categories = g.categories;
    out.groups.push_back(std::move(s));
  }

  // Synthetic vs naturalistic accuracy per family and style, over grid points
  // that carry both renderings.
  std::map<std::pair<int, int>, std::map<std::tuple<std::int64_t, std::string>, std::pair<std::optional<double>, std::optional<double>>>> series;
  for (const auto& s : out.groups) {
    auto& slot = series[{static_cast<int>(s.family), static_cast<int>(s.style)}][{s.control_value, s.grid_label}];
    (s.rendering == Rendering::Synthetic ? slot.first : slot.second) = s.report.accuracy_over_repeats.mean;
  }
  for (const auto& [fs, points] : series) {
    Correlation c;
    c.family = static_cast<taskgen::TaskFamily>(fs.first);
    c.style = static_cast<PromptStyle>(fs.second);
    for (const auto& [point, acc] : points) {
      if (!acc.first || !acc.second) continue;
      c.grid_labels.push_back(std::get<1>(point));
      c.synthetic.push_back(*acc.first);
      c.naturalistic.push_back(*acc.second);
    }
    if (c.grid_labels.empty()) continue;
    c.pearson = metrics::pearson(c.synthetic, c.naturalistic);
    out.correlations.push_back(std::move(c));
  }
  return out;
}

json summary_to_json(const SummarySet& summary) {
  json groups = json::array();
  for (const auto& s : summary.groups) {
    json g{{"family", taskgen::slug(s.family)},
           {"grid", s.grid_label},
           {"control", s.control_name},
           {"control_value", s.control_value},
           {"rendering", prompting::to_string(s.rendering)},
           {"style", prompting::to_string(s.style)},
           {"report", s.report},
           {"categories", s.categories}};
    if (s.tokens)
      g["tokens"] = {{"n", s.tokens->n},
                     {"mean_input", s.tokens->mean_input},
                     {"mean_output", s.tokens->mean_output},
                     {"cumulative_input", s.tokens->cumulative_input},
                     {"cumulative_output", s.tokens->cumulative_output}};
    else
      g["tokens"] = nullptr;
    groups.push_back(std::move(g));
  }
  json correlations = json::array();
  for (const auto& c : summary.correlations)
    correlations.push_back({{"family", taskgen::slug(c.family)},
                            {"style", prompting::to_string(c.style)},
                            {"grid", c.grid_labels},
                            {"synthetic", c.synthetic},
                            {"naturalistic", c.naturalistic},
                            {"pearson", c.pearson ? json(*c.pearson) : json()}});
  return {{"groups", groups}, {"correlations", correlations}};
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string row_prefix(const RunSummary& s) {
  return std::string(taskgen::slug(s.family)) + "," + s.grid_label + "," + s.control_name + "," +
         std::to_string(s.control_value) + "," + std::string(prompting::to_string(s.rendering)) + "," +
         std::string(prompting::to_string(s.style));
}

}  // namespace

std::string summary_to_csv(const SummarySet& summary) {
  std::string out = "family,grid,control,control_value,rendering,style,metric,mean,stddev,n\n";
  for (const auto& s : summary.groups) {
    const auto prefix = row_prefix(s);
    const auto& acc = s.report.accuracy_over_repeats;
    out += prefix + ",accuracy," + num(acc.mean) + "," + (acc.stddev ? num(*acc.stddev) : "") + "," +
           std::to_string(s.report.n) + "\n";
    if (s.report.mean_abs_error)
      out += prefix + ",mean_abs_error," + num(*s.report.mean_abs_error) + ",," + std::to_string(s.report.n) + "\n";
    if (s.report.levenshtein_similarity)
      out += prefix + ",levenshtein_similarity," + num(*s.report.levenshtein_similarity) + ",," +
             std::to_string(s.report.n) + "\n";
  }
  return out;
}

std::string token_stats_csv(const SummarySet& summary) {
  std::string out =
      "family,grid,control,control_value,rendering,style,n,mean_input,mean_output,cumulative_input,cumulative_output\n";
  for (const auto& s : summary.groups) {
    if (!s.tokens) continue;
    out += row_prefix(s) + "," + std::to_string(s.tokens->n) + "," + num(s.tokens->mean_input) + "," +
           num(s.tokens->mean_output) + "," + std::to_string(s.tokens->cumulative_input) + "," +
           std::to_string(s.tokens->cumulative_output) + "\n";
  }
  return out;
}

}  // namespace codesim::harness
