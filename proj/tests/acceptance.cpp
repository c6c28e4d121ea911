// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each check uses an oracle that is independent of the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "codesim/algolib.hpp"
#include "codesim/harness.hpp"
#include "codesim/metrics.hpp"
#include "codesim/prompting.hpp"
#include "codesim/taskgen.hpp"
#include "support.hpp"

using namespace codesim;
using harness::RunConfig;
using prompting::PromptStyle;
using prompting::Rendering;
using taskgen::TaskFamily;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Answer text_truth(const taskgen::PairedInstance& inst) {
  const auto vars = testsupport::TextEvaluator{}.run(inst.synthetic_source);
  std::vector<std::int64_t> vals;
  for (auto t : inst.targets) vals.push_back(vars.at("a" + std::to_string(t.index)));
  return vals.size() == 1 ? Answer::integer(vals[0]) : Answer::tuple(vals);
}

std::string ranking_truth(const taskgen::RankingPlan& plan) {
  std::vector<std::size_t> idx(plan.objects.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
    return plan.heaviest ? plan.weights[a] > plan.weights[b] : plan.weights[a] < plan.weights[b];
  });
  return plan.objects[idx[plan.k - 1]];
}

// 1
Verdict paired_equivalence() {
  Verdict v;
  const auto start = Clock::now();
  std::size_t checked = 0;
  for (auto family : taskgen::kAllFamilies) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      auto p = taskgen::GenParams::defaults(family);
      p.seed = derive_seed(20240601, {static_cast<std::uint64_t>(family), i});
      const auto inst = taskgen::generate_pair(p);
      ++checked;
      const std::string where = std::string(taskgen::slug(family)) + " seed " + std::to_string(p.seed);
      if (family == TaskFamily::Sorting) {
        auto sorted = inst.sort_input;
        std::sort(sorted.begin(), sorted.end());
        if (!(inst.ground_truth == Answer::sequence(sorted))) v.fail(where + ": sorted output differs");
        const auto& plan = std::get<taskgen::RankingPlan>(inst.plan);
        if (!inst.naturalistic_truth || !(*inst.naturalistic_truth == Answer::label(ranking_truth(plan))))
          v.fail(where + ": ranking answer differs");
        continue;
      }
      if (!(inst.ground_truth == text_truth(inst))) v.fail(where + ": synthetic truth differs from source text");
      if (auto* plan = std::get_if<taskgen::EventPlan>(&inst.plan)) {
        if (!(taskgen::simulate_plan(*plan) == inst.ground_truth)) v.fail(where + ": narrative truth differs");
      } else if (auto* rplan = std::get_if<taskgen::RecurringPlan>(&inst.plan)) {
        if (!(taskgen::simulate_plan(*rplan) == inst.ground_truth)) v.fail(where + ": narrative truth differs");
      } else if (inst.has_naturalistic()) {
        v.fail(where + ": naturalistic text without a plan");
      }
    }
  }
  const auto secs = seconds_since(start);
  if (secs >= 30.0) v.fail("took " + std::to_string(secs) + " s");
  if (v.pass) v.detail = std::to_string(checked) + " instances in " + std::to_string(secs).substr(0, 5) + " s";
  return v;
}

// 2
Verdict slice_soundness() {
  Verdict v;
  Rng rng(424242);
  for (int i = 0; i < 10000; ++i) {
    const auto n_vars = 1 + rng.index(6);
    const auto p = testsupport::random_program(rng, n_vars, rng.index(41));
    const dsl::VarId target{rng.index(n_vars)};
    const auto expected = testsupport::eval_target(dsl::render_source(p), target);
    const auto sliced = dsl::restrict_to(p, dsl::backward_slice(p, target));
    if (testsupport::eval_target(dsl::render_source(sliced), target) != expected)
      v.fail("slice of program " + std::to_string(i) + " changes the target");
  }
  std::size_t generated = 0;
  for (int len : {5, 10, 15, 20}) {
    for (std::uint64_t s = 0; s < 250; ++s) {
      auto p = taskgen::GenParams::defaults(TaskFamily::CriticalPath);
      p.path_len = len;
      p.n_ops = 40;
      p.seed = s;
      const auto inst = taskgen::generate_pair(p);
      ++generated;
      const auto target = inst.targets.at(0);
      if (dsl::critical_path_length(*inst.program, target) != static_cast<std::size_t>(len))
        v.fail("critical path of length " + std::to_string(len) + " missed at seed " + std::to_string(s));
      const auto kept = dsl::restrict_to(*inst.program, dsl::backward_slice(*inst.program, target));
      if (testsupport::eval_target(dsl::render_source(kept), target) != inst.ground_truth.as_int())
        v.fail("distractor removal changed the answer");
    }
  }
  if (v.pass) v.detail = "10000 random programs, " + std::to_string(generated) + " critical-path instances";
  return v;
}

// 3
Verdict nested_loop_bounds() {
  Verdict v;
  std::int64_t widest = 0;
  for (int k = 1; k <= 9; ++k) {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      auto p = taskgen::GenParams::defaults(TaskFamily::NestedLoops);
      p.depth = k;
      p.seed = derive_seed(s, {static_cast<std::uint64_t>(k)});
      const auto inst = taskgen::generate_pair(p);
      const std::int64_t value = std::llabs(testsupport::eval_target(inst.synthetic_source, inst.targets.at(0)));
      if (value != std::llabs(inst.ground_truth.as_int())) v.fail("interpreter disagrees with source text");
      if (inst.program->loop_depth() != static_cast<std::size_t>(k)) v.fail("wrong depth at k=" + std::to_string(k));
      if (value > (std::int64_t{1} << k) || value > 1024)
        v.fail("|truth| = " + std::to_string(value) + " at k=" + std::to_string(k));
      widest = std::max(widest, value);
    }
  }
  if (v.pass) v.detail = "9000 instances, max |truth| " + std::to_string(widest);
  return v;
}

// 4
Verdict sorting_differential() {
  Verdict v;
  Rng rng(8080);
  std::size_t runs = 0, with_duplicates = 0;
  const auto& corpus = algolib::corpus();
  if (corpus.size() != 16) v.fail("corpus has " + std::to_string(corpus.size()) + " entries");
  for (const auto& e : corpus) {
    for (int i = 0; i < 200; ++i) {
      std::vector<std::int64_t> in(static_cast<std::size_t>(10 * (1 + i % 4)));
      for (auto& x : in) x = rng.uniform(0, 100);
      auto expected = in;
      std::stable_sort(expected.begin(), expected.end());
      if (std::adjacent_find(expected.begin(), expected.end()) != expected.end()) ++with_duplicates;
      const auto out = std::get<std::vector<std::int64_t>>(algolib::oracle_run(e, in));
      ++runs;
      if (out != expected) v.fail(e.oracle_id + " disagrees on a vector of length " + std::to_string(in.size()));
    }
  }
  if (with_duplicates == 0) v.fail("no sampled vector contained duplicates");
  if (v.pass)
    v.detail = std::to_string(runs) + " runs, " + std::to_string(with_duplicates) + " inputs with duplicates";
  return v;
}

// 5
Verdict variant_divergence() {
  Verdict v;
  const auto& pairs = algolib::variant_pairs();
  if (pairs.size() != 5) {
    v.fail("expected 5 pairs");
    return v;
  }
  auto as_int = [](const algolib::Value& x) { return std::get<std::int64_t>(x); };
  for (const auto& pair : pairs) {
    const auto& w = pair.divergence_witness;
    if (algolib::oracle_run(pair.base, w) == algolib::oracle_run(pair.variant, w))
      v.fail(pair.base.oracle_id + ": witness does not diverge");
    if (const auto* n = std::get_if<std::int64_t>(&w)) {
      if (*n > 20) v.fail(pair.base.oracle_id + ": witness above 20");
      for (std::int64_t m = pair.base.oracle_id == "collatz_sum" ? 1 : 0; m < *n; ++m)
        if (algolib::oracle_run(pair.base, m) != algolib::oracle_run(pair.variant, m))
          v.fail(pair.base.oracle_id + ": smaller witness " + std::to_string(m));
    } else if (std::get<std::vector<std::int64_t>>(w).size() > 20) {
      v.fail(pair.base.oracle_id + ": witness longer than 20");
    }
  }
  // Brute-force references, iterated by hand.
  std::int64_t a = 0, b = 1;
  for (int i = 0; i < 10; ++i) {
    const auto c = a + b;
    a = b;
    b = c;
  }
  if (a != 55 || as_int(algolib::oracle_run(pairs[0].base, std::int64_t{10})) != a) v.fail("fibonacci(10) != 55");
  std::int64_t sum = 0;
  for (int i = 0; i < 5; ++i) sum += i;
  if (sum != 10 || as_int(algolib::oracle_run(pairs[2].base, std::int64_t{5})) != sum) v.fail("gauss(5) != 10");
  if (as_int(algolib::oracle_run(pairs[3].base, std::int64_t{4})) != 0 ||
      as_int(algolib::oracle_run(pairs[3].variant, std::int64_t{4})) != 1)
    v.fail("primality pair at 4");
  if (v.pass) {
    std::string ws;
    for (const auto& pair : pairs) ws += (ws.empty() ? "" : ", ") + algolib::value_to_text(pair.divergence_witness);
    v.detail = "witnesses " + ws;
  }
  return v;
}

// 6
Verdict metric_checks() {
  Verdict v;
  std::vector<std::vector<std::int64_t>> seqs{{}};
  std::vector<std::vector<std::int64_t>> frontier{{}};
  for (int len = 1; len <= 6; ++len) {
    std::vector<std::vector<std::int64_t>> next;
    for (const auto& s : frontier)
      for (std::int64_t c = 0; c < 3; ++c) {
        auto t = s;
        t.push_back(c);
        next.push_back(std::move(t));
      }
    seqs.insert(seqs.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  std::size_t pairs = 0;
  for (const auto& x : seqs)
    for (const auto& y : seqs) {
      const auto d = testsupport::edit_distance(x, y);
      const double denom = static_cast<double>(std::max(x.size(), y.size()));
      const double expected = denom == 0 ? 1.0 : 1.0 - static_cast<double>(d) / denom;
      ++pairs;
      if (std::abs(metrics::levenshtein_similarity(x, y) - expected) > 1e-12) {
        v.fail("similarity mismatch");
        break;
      }
    }
  for (const auto& x : seqs)
    if (metrics::levenshtein_similarity(x, x) != 1.0) v.fail("identity is not 1");

  using metrics::Outcome;
  auto o = [](std::optional<std::int64_t> p, std::int64_t t) {
    return Outcome{p ? std::optional<Answer>(Answer::integer(*p)) : std::nullopt, Answer::integer(t)};
  };
  const std::vector<Outcome> mae{o(5, 5), o(7, 5)};
  if (*metrics::mean_abs_error(mae).value != 1.0) v.fail("MAE of (5,7) vs (5,5)");
  const std::vector<Outcome> single{o(10, -2)};
  if (*metrics::mean_abs_error(single).value != 12.0) v.fail("MAE of 10 vs -2");
  std::vector<Outcome> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(o(i < 6 ? 1 : std::optional<std::int64_t>{}, 1));
  if (std::abs(metrics::accuracy(ten) - 0.6) > 1e-12) v.fail("accuracy of 6/10");
  if (v.pass) v.detail = std::to_string(pairs) + " sequence pairs";
  return v;
}

// Families, grids and the styles each rendering supports.
struct Protocol {
  TaskFamily family;
  std::string axis;
  std::vector<json> values;
  std::map<std::string, std::vector<json>> extra;
};

std::vector<Protocol> protocol_grids() {
  auto range = [](int lo, int hi, int step) {
    std::vector<json> out;
    for (int x = lo; x <= hi; x += step) out.push_back(x);
    return out;
  };
  std::vector<json> algorithms, styles;
  for (const char* a : {"insertion", "selection", "bubble", "adaptive_bubble", "quick", "merge", "tim", "heap"})
    algorithms.push_back(a);
  styles = {"iterative", "recursive"};
  return {
      {TaskFamily::StraightLine, "n_ops", range(10, 50, 10), {}},
      {TaskFamily::CriticalPath, "path_len", range(5, 20, 5), {{"n_ops", {40}}}},
      {TaskFamily::ParallelPaths, "n_paths", range(1, 9, 1), {}},
      {TaskFamily::NestedLoops, "depth", range(1, 9, 1), {}},
      {TaskFamily::Sorting, "vector_len", range(10, 40, 10), {{"algorithm", algorithms}, {"style", styles}}},
      {TaskFamily::ApproximateLoops, "n_loops", range(1, 9, 1), {}},
      {TaskFamily::FaultTolerant, "n_variants", range(2, 5, 1), {}},
  };
}

// 7
Verdict oracle_protocol() {
  Verdict v;
  std::size_t total = 0, groups = 0;
  for (const auto& proto : protocol_grids()) {
    RunConfig c;
    harness::Experiment e;
    e.family = proto.family;
    e.grid[proto.axis] = proto.values;
    for (const auto& [k, vals] : proto.extra) {
      if (vals.size() == 1)
        e.fixed[k] = vals[0];
      else
        e.grid[k] = vals;
    }
    c.experiments = {e};
    c.seed = 7;
    c.max_in_flight = 8;
    const bool paired = proto.family != TaskFamily::ApproximateLoops && proto.family != TaskFamily::FaultTolerant;
    std::vector<std::pair<Rendering, PromptStyle>> combos;
    for (auto s : {PromptStyle::Direct, PromptStyle::CoT, PromptStyle::CoSm}) combos.push_back({Rendering::Synthetic, s});
    if (paired)
      for (auto s : {PromptStyle::Direct, PromptStyle::CoT}) combos.push_back({Rendering::Naturalistic, s});
    if (proto.family == TaskFamily::FaultTolerant) combos.push_back({Rendering::Synthetic, PromptStyle::FaultTolerantMulti});
    for (const auto& [rendering, style] : combos) {
      c.renderings = {rendering};
      c.styles = {style};
      const auto records = harness::run(c);
      const auto points = e.expand().size();
      if (records.size() != points * 3 * 30)
        v.fail(std::string(taskgen::slug(proto.family)) + ": " + std::to_string(records.size()) + " records");
      total += records.size();
      for (const auto& g : harness::score(records).groups) {
        ++groups;
        if (g.report.accuracy != 1.0 || !g.report.accuracy_over_repeats.stddev ||
            *g.report.accuracy_over_repeats.stddev != 0.0)
          v.fail(std::string(taskgen::slug(proto.family)) + " " + g.grid_label + " " +
                 std::string(prompting::to_string(rendering)) + "/" + std::string(prompting::to_string(style)) +
                 ": accuracy " + std::to_string(g.report.accuracy));
      }
    }
  }

  // Scripted backend: 12 of 30 answers are forced wrong.
  testsupport::TempDir dir("acceptance-scripted");
  RunConfig c;
  harness::Experiment e;
  e.family = TaskFamily::StraightLine;
  c.experiments = {e};
  c.repeats = 1;
  c.seed = 99;
  json responses;
  const auto batch = harness::generate_batch(c, e.expand()[0], 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto truth = batch[i].ground_truth.as_int();
    responses[harness::request_key(batch[i].id, Rendering::Synthetic, PromptStyle::CoT)] =
        "Answer: " + std::to_string(i % 5 < 2 ? truth - 1 : truth);
  }
  const auto fixture = dir.path() / "fixture.json";
  std::ofstream(fixture) << json{{"responses", responses}}.dump();
  c.backend.kind = harness::BackendKind::Scripted;
  c.backend.fixture_path = fixture;
  const auto scripted = harness::score(harness::run(c));
  const double acc = scripted.groups.at(0).report.accuracy;
  if (std::abs(acc - 0.6) > 1e-12) v.fail("scripted accuracy " + std::to_string(acc));
  if (v.pass)
    v.detail = std::to_string(total) + " oracle records in " + std::to_string(groups) +
               " groups at 1.000; scripted 0.600";
  return v;
}

// 8
Verdict cosm_golden() {
  Verdict v;
  const auto golden = read_file(CODESIM_GOLDEN_DIR "/cosm_template.txt");
  if (std::string(prompting::cosm_template()) != golden) v.fail("template bytes differ");
  const auto input_at = golden.find("@input@");
  const auto code_line_end = golden.find('\n');
  std::size_t checked = 0;
  for (const auto& entry : algolib::corpus()) {
    auto p = taskgen::GenParams::defaults(TaskFamily::Sorting);
    p.algorithm = entry.name;
    p.style = std::string(algolib::to_string(entry.style));
    p.seed = 5;
    const auto inst = taskgen::generate_pair(p);
    const auto text = prompting::build_prompt(inst, Rendering::Synthetic, PromptStyle::CoSm).user_text;
    // Expected block assembled from the golden text by position.
    std::string code = entry.source_text;
    while (!code.empty() && code.back() == '\n') code.pop_back();
    const std::string expected = code + golden.substr(code_line_end, input_at - code_line_end) + inst.call_input() +
                                 golden.substr(input_at + 7);
    ++checked;
    if (text.compare(0, expected.size(), expected) != 0) v.fail(entry.oracle_id + ": block differs");
  }
  if (v.pass) v.detail = "template plus " + std::to_string(checked) + " rendered blocks";
  return v;
}

// 9
Verdict determinism() {
  Verdict v;
  testsupport::TempDir dir("acceptance-determinism");
  const std::string cli = CODESIM_CLI_PATH;
  std::vector<std::string> families{"straight-line", "critical-path", "parallel-paths", "nested-loops", "sorting",
                                    "approximate-loops", "fault-tolerant"};
  for (int i : {1, 2}) {
    for (const auto& fam : families) {
      const auto out = dir.path() / ("run" + std::to_string(i));
      const std::string cmd = "\"" + cli + "\" generate --family " + fam + " --seed 42 -n 5 --repeats 2 --out \"" +
                              out.string() + "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) v.fail("generate failed for " + fam);
    }
  }
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path() / "run1")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir.path() / "run1");
    const auto twin = dir.path() / "run2" / rel;
    ++files;
    if (!std::filesystem::exists(twin) || read_file(entry.path()) != read_file(twin))
      v.fail(rel.generic_string() + " differs between invocations");
  }
  if (files < families.size()) v.fail("only " + std::to_string(files) + " batch files written");

  RunConfig c;
  harness::Experiment e;
  e.family = TaskFamily::Sorting;
  e.grid["vector_len"] = {10, 20};
  c.experiments = {e};
  c.renderings = {Rendering::Synthetic, Rendering::Naturalistic};
  c.batch_size = 6;
  c.backend.returns_token_likelihoods = true;
  const auto records = harness::run(c);
  c.output_dir = dir.path() / "logs-out";
  harness::persist(records, c);
  const auto loaded = harness::load(c.output_dir);
  if (loaded != records) v.fail("persist/load changed records");
  if (harness::summary_to_json(harness::score(loaded)) != harness::summary_to_json(harness::score(records)))
    v.fail("re-scoring loaded logs changed the summary");
  if (v.pass) v.detail = std::to_string(files) + " identical batch files; " + std::to_string(records.size()) +
                         " records round-tripped";
  return v;
}

// 10
Verdict approximation() {
  Verdict v;
  std::size_t cases = 0;
  for (std::size_t k = 1; k <= 9; ++k) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      std::vector<std::int64_t> truth(k), pred(k);
      std::size_t matches = 0;
      for (std::size_t i = 0; i < k; ++i) {
        truth[i] = static_cast<std::int64_t>(i * 3);
        const bool hit = (mask >> i) & 1U;
        pred[i] = hit ? truth[i] : truth[i] + 1;
        matches += hit;
      }
      double prob = 1.0;
      for (std::size_t i = 0; i < k; ++i) prob *= static_cast<double>(matches) / static_cast<double>(k);
      const auto s = metrics::approximation_delta(pred, truth, k);
      ++cases;
      if (std::abs(s.delta - (1.0 - static_cast<double>(matches) / static_cast<double>(k))) > 1e-12 ||
          std::abs(s.exact_prob_model - prob) > 1e-12)
        v.fail("k=" + std::to_string(k) + " mask=" + std::to_string(mask));
      if ((s.exact_prob_model == 1.0) != (matches == k)) v.fail("exact iff all components match");
    }
  }
  const auto half = metrics::approximation_delta(std::vector<std::int64_t>{1, 0, 3, 0},
                                                 std::vector<std::int64_t>{1, 2, 3, 4}, 4);
  if (half.delta != 0.5 || std::abs(half.exact_prob_model - 0.0625) > 1e-12) v.fail("2 of 4 case");
  if (v.pass) v.detail = std::to_string(cases) + " tuples; 2 of 4 -> 0.0625";
  return v;
}

// 11
Verdict log_naming() {
  Verdict v;
  testsupport::TempDir dir("acceptance-naming");
  RunConfig c;
  harness::Experiment e;
  e.family = TaskFamily::StraightLine;
  e.fixed["n_ops"] = 40;
  e.fixed["n_vars"] = 3;
  c.experiments = {e};
  c.repeats = 1;
  c.batch_size = 2;
  c.output_dir = dir.path();
  harness::run(c);
  const auto expected = dir.path() / "logs" / "straight-line" / "n_ops-40_n_vars-3_n_instances-2_batch-1.json";
  if (!std::filesystem::exists(expected)) v.fail("missing " + expected.filename().string());
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path()))
    if (entry.is_regular_file()) ++files;
  if (files != 1) v.fail(std::to_string(files) + " files written");
  if (v.pass) v.detail = "logs/straight-line/" + expected.filename().string();
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"paired equivalence", paired_equivalence},
      {"slice soundness and critical path lengths", slice_soundness},
      {"nested loop bounds", nested_loop_bounds},
      {"sorting oracle differential", sorting_differential},
      {"variant divergence", variant_divergence},
      {"metric unit checks", metric_checks},
      {"end-to-end oracle and scripted runs", oracle_protocol},
      {"CoSm golden block", cosm_golden},
      {"determinism and log round trip", determinism},
      {"approximation score", approximation},
      {"log naming", log_naming},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Verdict v;
    const auto start = Clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const auto secs = seconds_since(start);
    if (!v.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", n - failures, n);
  return failures == 0 ? 0 : 1;
}
