#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "codesim/harness.hpp"

namespace codesim::harness {

using nlohmann::json;

void to_json(json& j, const RunRecord& r) {
  auto opt_int = [](const std::optional<std::int64_t>& v) { return v ? json(*v) : json(); };
  j = json{{"instance_id", r.instance_id},
           {"family", taskgen::slug(r.family)},
           {"grid_label", r.grid_label},
           {"control_name", r.control_name},
           {"control_value", r.control_value},
           {"repeat", r.repeat},
           {"rendering", prompting::to_string(r.rendering)},
           {"style", prompting::to_string(r.style)},
           {"prompt", r.prompt},
           {"response", r.response},
           {"input_tokens", opt_int(r.input_tokens)},
           {"output_tokens", opt_int(r.output_tokens)},
           {"token_logprobs", r.token_logprobs ? json(*r.token_logprobs) : json()},
           {"latency_ms", r.latency_ms},
           {"truth", r.truth},
           {"extracted", r.extracted ? json(*r.extracted) : json()},
           {"correct", r.correct},
           {"error_category", r.error_category},
           {"held_out", r.held_out ? json(*r.held_out) : json()}};
}

void from_json(const json& j, RunRecord& r) {
  r = RunRecord{};
  r.instance_id = j.at("instance_id");
  r.family = taskgen::family_from_slug(j.at("family").get<std::string>());
  r.grid_label = j.at("grid_label");
  r.control_name = j.at("control_name");
  r.control_value = j.at("control_value");
  r.repeat = j.at("repeat");
  r.rendering = prompting::rendering_from_string(j.at("rendering").get<std::string>());
  r.style = prompting::style_from_string(j.at("style").get<std::string>());
  r.prompt = j.at("prompt");
  r.response = j.at("response");
  if (!j.at("input_tokens").is_null()) r.input_tokens = j.at("input_tokens").get<std::int64_t>();
  if (!j.at("output_tokens").is_null()) r.output_tokens = j.at("output_tokens").get<std::int64_t>();
  if (!j.at("token_logprobs").is_null()) r.token_logprobs = j.at("token_logprobs").get<std::vector<double>>();
  r.latency_ms = j.at("latency_ms");
  r.truth = j.at("truth").get<Answer>();
  if (!j.at("extracted").is_null()) r.extracted = j.at("extracted").get<Answer>();
  r.correct = j.at("correct");
  r.error_category = j.at("error_category");
  if (j.contains("held_out") && !j.at("held_out").is_null()) r.held_out = j.at("held_out").get<std::string>();
}

std::filesystem::path batch_log_path(const taskgen::GenParams& params, int batch_size, int repeat) {
  return std::filesystem::path("logs") /
         taskgen::batch_filename(params, static_cast<std::size_t>(batch_size), static_cast<std::size_t>(repeat + 1));
}

std::string serialise_log(const LogFile& log) {
  json records = json::array();
  for (const auto& r : log.records) records.push_back(r);
  json doc{{"schema_version", log.schema_version}, {"config", log.config}, {"records", records}};
  return doc.dump(2) + "\n";
}

void write_log(const std::filesystem::path& path, const LogFile& log) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << serialise_log(log);
    if (!out.flush()) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<std::filesystem::path> persist(std::span<const RunRecord> records, const RunConfig& config) {
  if (config.output_dir.empty()) throw IoError("no output directory configured");
  std::map<std::filesystem::path, std::vector<RunRecord>> files;
  for (const auto& r : records) {
    const auto name = std::string(taskgen::slug(r.family)) + "/" + r.grid_label + "_n_instances-" +
                      std::to_string(config.batch_size) + "_batch-" + std::to_string(r.repeat + 1) + ".json";
    files[config.output_dir / "logs" / name].push_back(r);
  }
  const json config_json = config;
  std::vector<std::filesystem::path> written;
  for (const auto& [path, recs] : files) {
    write_log(path, LogFile{kSchemaVersion, config_json, recs});
    written.push_back(path);
  }
  return written;
}

namespace {

LogFile parse_log(const json& doc, const std::filesystem::path& path) {
  const int version = doc.at("schema_version").get<int>();
  if (version != kSchemaVersion)
    throw SchemaVersionMismatch(path.string() + " has schema version " + std::to_string(version) + ", expected " +
                                std::to_string(kSchemaVersion));
  LogFile log;
  log.schema_version = version;
  log.config = doc.value("config", json());
  for (const auto& r : doc.at("records")) log.records.push_back(r.get<RunRecord>());
  return log;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace

LogFile load_file(const std::filesystem::path& path) {
  const auto doc = read_json(path);
  if (!doc.is_object() || !doc.contains("schema_version")) throw IoError(path.string() + " is not a log file");
  try {
    return parse_log(doc, path);
  } catch (const json::exception& e) {
    throw IoError("malformed log " + path.string() + ": " + e.what());
  }
}

std::vector<RunRecord> load(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw IoError(path.string() + " does not exist");
  if (!std::filesystem::is_directory(path)) return load_file(path).records;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(path))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) {
    const auto doc = read_json(f);
    // Summaries and other exports may share the directory.
    if (!doc.is_object() || !doc.contains("schema_version") || !doc.contains("records")) continue;
    try {
      auto log = parse_log(doc, f);
      out.insert(out.end(), log.records.begin(), log.records.end());
    } catch (const json::exception& e) {
      throw IoError("malformed log " + f.string() + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Memorisation probes

double memorisation_min_k(const RunRecord& record, double k_percent) {
  if (!record.token_logprobs || record.token_logprobs->empty())
    throw CapabilityMissing("record " + record.instance_id + " carries no token likelihoods");
  if (!(k_percent > 0.0 && k_percent <= 100.0)) throw InfeasibleParams("k must lie in (0, 100]");
  auto values = *record.token_logprobs;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto take = static_cast<std::size_t>(std::ceil(k_percent / 100.0 * static_cast<double>(n) - 1e-9));
  take = std::clamp<std::size_t>(take, 1, n);
  double total = 0;
  for (std::size_t i = 0; i < take; ++i) total += values[i];
  return total / static_cast<double>(take);
}

namespace {

std::vector<std::string> normalised_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

}  // namespace

double verbatim_recovery(std::string_view response, std::string_view held_out) {
  const auto a = normalised_lines(response);
  const auto b = normalised_lines(held_out);
  if (b.empty()) return 1.0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[b.size()]) / static_cast<double>(b.size());
}

std::vector<RunRecord> run_memorisation_probes(const BackendSpec& spec, double truncate_fraction) {
  auto backend = make_backend(spec);
  std::vector<RunRecord> out;
  for (const auto& pair : algolib::variant_pairs()) {
    for (const auto* entry : {&pair.base, &pair.variant}) {
      const auto bundle = prompting::build_memorisation_probe(*entry, truncate_fraction);
      RunRecord rec;
      rec.instance_id = bundle.instance_id;
      rec.family = taskgen::TaskFamily::Sorting;
      rec.grid_label = "memorisation";
      rec.control_name = "truncate_percent";
      rec.control_value = std::lround(truncate_fraction * 100.0);
      rec.style = prompting::PromptStyle::MemorisationProbe;
      rec.prompt = bundle.user_text;
      rec.held_out = bundle.held_out;
      rec.truth = Answer::label(*bundle.held_out);
      const auto key = request_key(bundle.instance_id, rec.rendering, rec.style);
      const auto start = std::chrono::steady_clock::now();
      try {
        auto response = complete_with_retry(*backend, BackendRequest{key, bundle, rec.truth});
        rec.response = std::move(response.text);
        rec.input_tokens = response.input_tokens;
        rec.output_tokens = response.output_tokens;
        rec.token_logprobs = std::move(response.token_logprobs);
        rec.correct = verbatim_recovery(rec.response, *bundle.held_out) == 1.0;
        rec.error_category = std::string(rec.correct ? category::kNone : category::kWrongAnswer);
      } catch (const BackendError&) {
        rec.error_category = std::string(category::kBackendError);
      }
      rec.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace codesim::harness
