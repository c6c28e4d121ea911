// codesim: generate tasks, run them against a backend, score and report logs.

#include <charconv>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "codesim/algolib.hpp"
#include "codesim/harness.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace codesim;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

json scalar(std::string_view s) {
  if (auto v = parse_int(s)) return *v;
  return std::string(s);
}

// "a..b[:step]" or "x,y,z". Without a step a range advances by its lower
// bound, so 10..50 is {10, 20, 30, 40, 50} and 1..9 is every depth.
std::vector<json> parse_values(std::string_view spec) {
  if (auto dots = spec.find(".."); dots != std::string_view::npos) {
    auto rest = spec.substr(dots + 2);
    std::optional<std::int64_t> step;
    if (auto colon = rest.find(':'); colon != std::string_view::npos) {
      step = parse_int(rest.substr(colon + 1));
      if (!step || *step <= 0) throw UsageError("bad step in grid '" + std::string(spec) + "'");
      rest = rest.substr(0, colon);
    }
    const auto lo = parse_int(spec.substr(0, dots));
    const auto hi = parse_int(rest);
    if (!lo || !hi || *lo > *hi) throw UsageError("bad range '" + std::string(spec) + "'");
    const auto by = step.value_or(*lo > 0 ? *lo : 1);
    std::vector<json> out;
    for (auto v = *lo; v <= *hi; v += by) out.emplace_back(v);
    return out;
  }
  std::vector<json> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    const auto item = spec.substr(start, end - start);
    if (item.empty()) throw UsageError("empty value in '" + std::string(spec) + "'");
    out.push_back(scalar(item));
    start = end + 1;
  }
  return out;
}

// Grid axes are "key=spec"; a bare spec varies the family's control variable.
harness::Experiment build_experiment(const std::string& family, const std::vector<std::string>& grids,
                                     const std::vector<std::string>& sets) {
  harness::Experiment ex;
  try {
    ex.family = taskgen::family_from_slug(family);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  for (const auto& g : grids) {
    const auto eq = g.find('=');
    const auto key = eq == std::string::npos ? taskgen::GenParams::defaults(ex.family).control_name() : g.substr(0, eq);
    ex.grid[key] = parse_values(eq == std::string::npos ? g : g.substr(eq + 1));
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    ex.fixed[s.substr(0, eq)] = scalar(s.substr(eq + 1));
  }
  return ex;
}

struct Overrides {
  std::string config;
  std::string family;
  std::vector<std::string> grid;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  std::optional<int> repeats;
  std::optional<int> batch_size;
  std::optional<int> max_in_flight;
  std::string backend;
  std::string fixture;
  std::vector<std::string> styles;
  std::vector<std::string> renderings;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--family", o.family, "task family (replaces the configured experiments)");
  cmd->add_option("--grid", o.grid, "grid axis: key=a..b[:step] or key=x,y,z; a bare spec varies the control");
  cmd->add_option("--set", o.set, "fixed parameter key=value");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--repeats", o.repeats, "independent batches per grid point");
  cmd->add_option("--batch-size,-n", o.batch_size, "instances per batch");
  cmd->add_option("--out,-o", o.out, "output directory");
}

harness::RunConfig resolve(const Overrides& o, int default_repeats) {
  harness::RunConfig c;
  c.repeats = default_repeats;
  if (!o.config.empty()) c = harness::load_config(o.config);
  if (!o.family.empty()) c.experiments = {build_experiment(o.family, o.grid, o.set)};
  else if (!o.grid.empty() || !o.set.empty()) throw UsageError("--grid and --set need --family");
  if (c.experiments.empty()) throw UsageError("no experiments: pass --family or --config");
  if (o.seed) c.seed = *o.seed;
  if (o.repeats) c.repeats = *o.repeats;
  if (o.batch_size) c.batch_size = *o.batch_size;
  if (o.max_in_flight) c.max_in_flight = *o.max_in_flight;
  if (!o.backend.empty()) c.backend.kind = harness::backend_kind_from_string(o.backend);
  if (!o.fixture.empty()) c.backend.fixture_path = o.fixture;
  if (!o.styles.empty()) {
    c.styles.clear();
    for (const auto& s : o.styles) c.styles.push_back(prompting::style_from_string(s));
  }
  if (!o.renderings.empty()) {
    c.renderings.clear();
    for (const auto& r : o.renderings) {
      if (r == "both") {
        c.renderings.push_back(prompting::Rendering::Synthetic);
        c.renderings.push_back(prompting::Rendering::Naturalistic);
      } else {
        c.renderings.push_back(prompting::rendering_from_string(r));
      }
    }
  }
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

int cmd_generate(const Overrides& o) {
  auto config = resolve(o, 1);
  if (config.output_dir.empty()) config.output_dir = "instances";
  config.validate();
  std::size_t files = 0;
  for (const auto& ex : config.experiments) {
    for (const auto& point : ex.expand()) {
      for (int r = 0; r < config.repeats; ++r) {
        json instances = json::array();
        for (const auto& inst : harness::generate_batch(config, point, r)) instances.push_back(taskgen::instance_to_json(inst));
        json doc{{"schema_version", harness::kSchemaVersion},
                 {"params", point},
                 {"seed", config.seed},
                 {"batch", r + 1},
                 {"instances", instances}};
        const auto path = config.output_dir / taskgen::batch_filename(point, static_cast<std::size_t>(config.batch_size),
                                                                      static_cast<std::size_t>(r + 1));
        write_text(path, doc.dump(2) + "\n");
        std::cout << path.string() << "\n";
        ++files;
      }
    }
  }
  std::cerr << "wrote " << files << " batch file(s)\n";
  return 0;
}

void write_summary(const harness::SummarySet& summary, const fs::path& dir) {
  write_text(dir / "summary.json", harness::summary_to_json(summary).dump(2) + "\n");
  write_text(dir / "summary.csv", harness::summary_to_csv(summary));
}

void print_accuracy(const harness::SummarySet& summary) {
  for (const auto& g : summary.groups) {
    const auto& acc = g.report.accuracy_over_repeats;
    std::cout << taskgen::slug(g.family) << " " << g.grid_label << " " << prompting::to_string(g.rendering) << " "
              << prompting::to_string(g.style) << " accuracy=" << acc.mean;
    if (acc.stddev) std::cout << " +/- " << *acc.stddev;
    std::cout << " n=" << g.report.n << "\n";
  }
  for (const auto& c : summary.correlations)
    if (c.pearson)
      std::cout << "pearson " << taskgen::slug(c.family) << " " << prompting::to_string(c.style) << " = " << *c.pearson
                << "\n";
}

int cmd_run(const Overrides& o) {
  auto config = resolve(o, 3);
  if (config.output_dir.empty()) throw UsageError("run needs an output directory (--out or output_dir)");
  const auto records = harness::run(config);
  const auto summary = harness::score(records);
  write_summary(summary, config.output_dir);
  print_accuracy(summary);
  return 0;
}

int cmd_score(const std::string& logs, const std::string& out) {
  const auto records = harness::load(logs);
  const auto summary = harness::score(records);
  if (!out.empty()) write_summary(summary, out);
  print_accuracy(summary);
  return 0;
}

int cmd_report(const std::string& logs, const std::string& out) {
  const auto summary = harness::score(harness::load(logs));
  const fs::path dir = out.empty() ? fs::path(logs).parent_path() / "report" : fs::path(out);
  write_text(dir / "accuracy.csv", harness::summary_to_csv(summary));
  write_text(dir / "tokens.csv", harness::token_stats_csv(summary));
  std::string corr = "family,style,grid,synthetic,naturalistic,pearson\n";
  for (const auto& c : summary.correlations) {
    for (std::size_t i = 0; i < c.grid_labels.size(); ++i) {
      corr += std::string(taskgen::slug(c.family)) + "," + std::string(prompting::to_string(c.style)) + "," +
              c.grid_labels[i] + "," + std::to_string(c.synthetic[i]) + "," + std::to_string(c.naturalistic[i]) + "," +
              (c.pearson ? std::to_string(*c.pearson) : "") + "\n";
    }
  }
  write_text(dir / "correlation.csv", corr);
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_probe(const Overrides& o, double fraction, double k_percent) {
  auto config = resolve(o, 1);
  const auto records = harness::run_memorisation_probes(config.backend, fraction);
  json rows = json::array();
  for (const auto& r : records) {
    json row{{"instance_id", r.instance_id}, {"verbatim_recovery", harness::verbatim_recovery(r.response, *r.held_out)}};
    if (r.token_logprobs) row["min_k"] = harness::memorisation_min_k(r, k_percent);
    rows.push_back(row);
  }
  if (!config.output_dir.empty()) {
    harness::LogFile log{harness::kSchemaVersion, json(config), records};
    harness::write_log(config.output_dir / "logs" / "memorisation.json", log);
  }
  std::cout << rows.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"codesim: paired code/narrative simulation tasks for language models"};
  app.require_subcommand(1);

  Overrides gen;
  auto* generate = app.add_subcommand("generate", "write instance batches");
  add_common(generate, gen);

  Overrides run;
  auto* runc = app.add_subcommand("run", "run a configuration against a backend and persist logs");
  add_common(runc, run);
  runc->add_option("--backend", run.backend, "http_chat | perfect_oracle | scripted");
  runc->add_option("--fixture", run.fixture, "scripted backend fixture");
  runc->add_option("--style", run.styles, "direct | cot | cosm | fault_tolerant_multi");
  runc->add_option("--rendering", run.renderings, "synthetic | naturalistic | both");
  runc->add_option("--max-in-flight", run.max_in_flight, "concurrent backend requests");

  std::string score_path, score_out;
  auto* score = app.add_subcommand("score", "recompute summaries from logs");
  score->add_option("logs", score_path, "log file or directory")->required();
  score->add_option("--out,-o", score_out, "write summary.json and summary.csv here");

  std::string report_path, report_out;
  auto* report = app.add_subcommand("report", "emit plot-ready CSV from logs");
  report->add_option("logs", report_path, "log file or directory")->required();
  report->add_option("--out,-o", report_out, "output directory");

  auto* corpus = app.add_subcommand("corpus", "print the algorithm inventory");

  Overrides probe;
  double fraction = 0.5, k_percent = 20.0;
  auto* probec = app.add_subcommand("probe", "memorisation probes over the classic/variant pairs");
  probec->add_option("--config", probe.config, "JSON run configuration (backend section)")->check(CLI::ExistingFile);
  probec->add_option("--backend", probe.backend, "backend kind");
  probec->add_option("--fixture", probe.fixture, "scripted backend fixture");
  probec->add_option("--fraction", fraction, "share of source lines shown")->check(CLI::Range(0.01, 0.99));
  probec->add_option("--min-k", k_percent, "percent of least likely tokens")->check(CLI::Range(0.01, 100.0));
  probec->add_option("--out,-o", probe.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*runc) return cmd_run(run);
    if (*score) return cmd_score(score_path, score_out);
    if (*report) return cmd_report(report_path, report_out);
    if (*corpus) {
      std::cout << algolib::corpus_to_json().dump(2) << "\n";
      return 0;
    }
    if (*probec) {
      if (probe.config.empty() && probe.backend.empty()) probe.backend = "perfect_oracle";
      probe.family = probe.family.empty() && probe.config.empty() ? "sorting" : probe.family;
      return cmd_probe(probe, fraction, k_percent);
    }
  } catch (const UsageError& e) {
    std::cerr << "codesim: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "codesim: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "codesim: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
