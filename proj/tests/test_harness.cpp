#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "codesim/harness.hpp"
#include "support.hpp"

using namespace codesim;
using namespace codesim::harness;
using prompting::PromptStyle;
using prompting::Rendering;
using taskgen::TaskFamily;
using nlohmann::json;

namespace {

RunConfig small_config(TaskFamily family = TaskFamily::StraightLine) {
  RunConfig c;
  Experiment e;
  e.family = family;
  c.experiments = {e};
  c.repeats = 1;
  c.batch_size = 4;
  c.seed = 17;
  return c;
}

BackendSpec fast_spec() {
  BackendSpec s;
  s.retry.base_delay = std::chrono::milliseconds(1);
  s.retry.max_delay = std::chrono::milliseconds(4);
  return s;
}

// Fails transiently a fixed number of times per request, then answers right.
class Flaky final : public Backend {
 public:
  Flaky(int failures, bool transient) : failures_(failures), transient_(transient) {}
  BackendResponse complete(const BackendRequest& req) override {
    int n;
    {
      std::lock_guard lock(mutex_);
      n = ++calls_[req.key];
    }
    if (n <= failures_) throw BackendError("flaky", transient_);
    return {"Answer: " + req.truth.to_text(), 1, 1, std::nullopt};
  }
  const BackendSpec& spec() const override { return spec_; }
  int calls(const std::string& key) {
    std::lock_guard lock(mutex_);
    return calls_[key];
  }

 private:
  int failures_;
  bool transient_;
  BackendSpec spec_ = fast_spec();
  std::mutex mutex_;
  std::map<std::string, int> calls_;
};

// Records the largest number of overlapping requests.
class Gauge final : public Backend {
 public:
  BackendResponse complete(const BackendRequest& req) override {
    const int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(3));
    --in_flight_;
    ++total_;
    return {"Answer: " + req.truth.to_text(), std::nullopt, std::nullopt, std::nullopt};
  }
  const BackendSpec& spec() const override { return spec_; }
  int peak() const { return peak_; }
  int total() const { return total_; }

 private:
  BackendSpec spec_ = fast_spec();
  std::atomic<int> in_flight_{0}, peak_{0}, total_{0};
};

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("perfect oracle over both renderings and several styles") {
    auto c = small_config();
    c.experiments[0].grid["n_ops"] = {10, 20};
    c.repeats = 2;
    c.batch_size = 3;
    c.renderings = {Rendering::Synthetic, Rendering::Naturalistic};
    c.styles = {PromptStyle::Direct, PromptStyle::CoT};
    const auto records = run(c);
    CHECK(records.size() == 2 * 2 * 3 * 2 * 2);
    for (const auto& r : records) {
      CHECK(r.correct);
      CHECK(r.error_category == "none");
      CHECK(r.input_tokens.has_value());
    }
    CHECK(std::is_sorted(records.begin(), records.end(),
                         [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; }));
    for (const auto& g : score(records).groups) CHECK(g.report.accuracy == 1.0);
  }

  TEST_CASE("cardinality of a single point") {
    auto c = small_config();
    c.batch_size = 1;
    c.renderings = {Rendering::Synthetic, Rendering::Naturalistic};
    CHECK(run(c).size() == 2);
  }

  TEST_CASE("scripted fixture replays known accuracy") {
    testsupport::TempDir dir("scripted");
    auto c = small_config();
    c.batch_size = 30;
    json responses;
    const auto point = c.experiments[0].expand().at(0);
    const auto batch = generate_batch(c, point, 0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& inst = batch[i];
      const auto key = request_key(inst.id, Rendering::Synthetic, PromptStyle::CoT);
      const auto truth = inst.ground_truth.as_int();
      responses[key] = i < 12 ? "Answer: " + std::to_string(truth + 3) : "Work...\nAnswer: " + std::to_string(truth);
    }
    const auto fixture = dir.path() / "fixture.json";
    std::ofstream(fixture) << json{{"responses", responses}}.dump(2);
    c.backend.kind = BackendKind::Scripted;
    c.backend.fixture_path = fixture;
    const auto records = run(c);
    REQUIRE(records.size() == 30);
    const auto summary = score(records);
    REQUIRE(summary.groups.size() == 1);
    CHECK(summary.groups[0].report.accuracy == doctest::Approx(0.6));
    CHECK(summary.groups[0].report.mean_abs_error == doctest::Approx(12.0 * 3.0 / 30.0));
    CHECK(summary.groups[0].categories.at("wrong_answer") == 12);

    c.backend.fixture_path = dir.path() / "missing.json";
    CHECK_THROWS_AS(run(c), FixtureMissing);
    std::ofstream(fixture) << json{{"responses", json::object()}}.dump();
    c.backend.fixture_path = fixture;
    CHECK_THROWS_AS(run(c), FixtureMissing);
  }

  TEST_CASE("persist and load round trip") {
    testsupport::TempDir dir("persist");
    auto c = small_config(TaskFamily::ParallelPaths);
    c.experiments[0].grid["n_paths"] = {2, 3};
    c.renderings = {Rendering::Synthetic, Rendering::Naturalistic};
    c.repeats = 2;
    c.output_dir = dir.path();
    const auto records = run(c);
    const auto loaded = load(dir.path());
    REQUIRE(loaded.size() == records.size());
    CHECK(loaded == records);
    CHECK(summary_to_json(score(loaded)).dump() == summary_to_json(score(records)).dump());

    // Re-serialising a loaded file is byte-stable.
    const auto file = dir.path() / batch_log_path(c.experiments[0].expand()[0], c.batch_size, 0);
    std::ifstream in(file);
    std::stringstream raw;
    raw << in.rdbuf();
    CHECK(serialise_log(load_file(file)) == raw.str());

    testsupport::TempDir other("persist2");
    c.output_dir = other.path();
    const auto written = persist(records, c);
    CHECK(written.size() == 4);
    CHECK(load(other.path()) == records);

    CHECK_THROWS_AS(load(dir.path() / "nope.json"), IoError);
    auto doc = json::parse(raw.str());
    doc["schema_version"] = 99;
    const auto bad = dir.path() / "bad.json";
    std::ofstream(bad) << doc.dump();
    CHECK_THROWS_AS(load_file(bad), SchemaVersionMismatch);
  }

  TEST_CASE("completed batches are reused") {
    testsupport::TempDir dir("resume");
    auto c = small_config();
    c.output_dir = dir.path();
    c.repeats = 2;
    Gauge first;
    const auto a = run(c, first);
    CHECK(first.total() == 8);
    Gauge second;
    const auto b = run(c, second);
    CHECK(second.total() == 0);
    CHECK(a == b);
  }

  TEST_CASE("log naming") {
    auto p = taskgen::GenParams::defaults(TaskFamily::StraightLine);
    p.n_ops = 40;
    p.n_vars = 3;
    const auto path = batch_log_path(p, 2, 0).generic_string();
    CHECK(path.rfind("logs/straight-line/n_ops-40_n_vars-3", 0) == 0);
    CHECK(path.size() >= std::string("_n_instances-2_batch-1.json").size());
    CHECK(path.substr(path.size() - std::string("_n_instances-2_batch-1.json").size()) ==
          "_n_instances-2_batch-1.json");
  }

  TEST_CASE("retries") {
    const prompting::PromptBundle bundle;
    const auto truth = Answer::integer(3);
    Flaky twice(2, true);
    CHECK(complete_with_retry(twice, {"k", bundle, truth}).text == "Answer: 3");
    CHECK(twice.calls("k") == 3);

    Flaky fatal(1, false);
    CHECK_THROWS_AS(complete_with_retry(fatal, {"k", bundle, truth}), BackendError);
    CHECK(fatal.calls("k") == 1);

    Flaky forever(100, true);
    CHECK_THROWS_AS(complete_with_retry(forever, {"k", bundle, truth}), BackendError);
    CHECK(forever.calls("k") == 5);

    auto c = small_config();
    Flaky broken(100, true);
    const auto records = run(c, broken);
    REQUIRE(records.size() == 4);
    for (const auto& r : records) {
      CHECK_FALSE(r.correct);
      CHECK(r.error_category == "backend_error");
    }
  }

  TEST_CASE("bounded concurrency") {
    auto c = small_config();
    c.batch_size = 24;
    c.max_in_flight = 3;
    Gauge g;
    const auto a = run(c, g);
    CHECK(g.peak() <= 3);
    CHECK(g.peak() >= 2);
    c.max_in_flight = 1;
    Gauge serial;
    const auto b = run(c, serial);
    CHECK(serial.peak() == 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].instance_id == b[i].instance_id);
  }

  TEST_CASE("http chat backend against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth, seen_model;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      if (++hits == 1) {
        res.status = 503;
        return;
      }
      seen_auth = req.get_header_value("Authorization");
      const auto body = json::parse(req.body);
      seen_model = body.at("model");
      const auto prompt = body.at("messages").at(0).at("content").get<std::string>();
      json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "Answer: 7"}}},
                                {"logprobs", {{"content", {{{"token", "7"}, {"logprob", -0.25}}}}}}}}},
                 {"usage", {{"prompt_tokens", prompt.size()}, {"completion_tokens", 3}}}};
      res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("CODESIM_TEST_TOKEN", "secret", 1);
    auto spec = fast_spec();
    spec.kind = BackendKind::HttpChat;
    spec.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    spec.model = "local-test";
    spec.auth_env = "CODESIM_TEST_TOKEN";
    spec.timeout = std::chrono::milliseconds(5000);
    spec.returns_token_likelihoods = true;
    auto backend = make_backend(spec);
    prompting::PromptBundle bundle;
    bundle.user_text = "hello";
    const auto truth = Answer::integer(7);
    const auto r = complete_with_retry(*backend, {"k", bundle, truth});
    CHECK(r.text == "Answer: 7");
    CHECK(r.input_tokens == 5);
    CHECK(r.output_tokens == 3);
    REQUIRE(r.token_logprobs);
    CHECK(r.token_logprobs->at(0) == -0.25);
    CHECK(hits == 2);
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_model == "local-test");

    server.stop();
    worker.join();

    spec.auth_env = "CODESIM_TEST_TOKEN_UNSET";
    ::unsetenv("CODESIM_TEST_TOKEN_UNSET");
    CHECK_THROWS_AS(make_backend(spec), ConfigError);
  }

  TEST_CASE("memorisation measures") {
    RunRecord r;
    r.token_logprobs = std::vector<double>{-1, -2, -3, -4};
    CHECK(memorisation_min_k(r, 50) == doctest::Approx(-3.5));
    CHECK(memorisation_min_k(r, 100) == doctest::Approx(-2.5));
    r.token_logprobs = std::vector<double>(8, -0.7);
    CHECK(memorisation_min_k(r, 25) == doctest::Approx(-0.7));
    r.token_logprobs.reset();
    CHECK_THROWS_AS(memorisation_min_k(r, 50), CapabilityMissing);

    CHECK(verbatim_recovery("a\nb\n", "a\nb\n") == 1.0);
    CHECK(verbatim_recovery("", "a\nb\n") == 0.0);
    CHECK(verbatim_recovery("a\nx\nc\n", "a\nb\nc\nd\n") == 0.5);

    auto spec = fast_spec();
    spec.returns_token_likelihoods = true;
    const auto probes = run_memorisation_probes(spec, 0.5);
    CHECK(probes.size() == 10);
    for (const auto& p : probes) {
      CHECK(p.correct);
      CHECK(memorisation_min_k(p, 20) == 0.0);
    }
  }

  TEST_CASE("configuration") {
    testsupport::TempDir dir("config");
    const auto path = dir.path() / "run.json";
    std::ofstream(path) << R"({
      // comments are allowed
      "backend": {"kind": "perfect-oracle"},
      "experiments": [{"family": "critical-path", "grid": {"path_len": [5, 10]}, "fixed": {"n_ops": 30}}],
      "rendering": "both",
      "styles": ["cot", "direct"],
      "repeats": 2,
      "batch_size": 5,
      "output_dir": "out"
    })";
    const auto c = load_config(path);
    CHECK(c.output_dir == dir.path() / "out");
    CHECK(c.renderings.size() == 2);
    CHECK(c.styles.size() == 2);
    const auto points = c.experiments.at(0).expand();
    REQUIRE(points.size() == 2);
    CHECK(points[0].n_ops == 30);
    CHECK(points[1].path_len == 10);
    const json round = c;
    CHECK(round.get<RunConfig>().experiments.at(0).expand() == points);

    auto bad = c;
    bad.repeats = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.experiments[0].fixed["n_ops"] = 3;
    CHECK_THROWS_AS(run(bad), ConfigError);
    bad = c;
    bad.experiments[0].family = TaskFamily::ApproximateLoops;
    bad.experiments[0].grid.clear();
    bad.experiments[0].fixed.clear();
    CHECK_THROWS_AS(run(bad), ConfigError);
  }

  TEST_CASE("score conventions") {
    auto c = small_config();
    c.repeats = 1;
    c.renderings = {Rendering::Synthetic, Rendering::Naturalistic};
    c.experiments[0].grid["n_ops"] = {10, 20, 30, 40, 50};
    const auto summary = score(run(c));
    for (const auto& g : summary.groups) CHECK_FALSE(g.report.accuracy_over_repeats.stddev);
    REQUIRE(summary.correlations.size() == 1);
    CHECK(summary.correlations[0].pearson == 1.0);
    CHECK(summary.correlations[0].synthetic.size() == 5);
    const auto csv = summary_to_csv(summary);
    CHECK(csv.rfind("family,grid,control,control_value,rendering,style,metric,mean,stddev,n", 0) == 0);
    CHECK_THROWS_AS(score({}), EmptyInput);
  }
}
