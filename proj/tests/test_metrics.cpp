#include <doctest.h>

#include <cmath>

#include "codesim/error.hpp"
#include "codesim/metrics.hpp"
#include "support.hpp"

using namespace codesim;
using namespace codesim::metrics;

namespace {

using Vec = std::vector<std::int64_t>;

std::vector<Vec> all_sequences(std::size_t max_len, std::int64_t symbols) {
  std::vector<Vec> out{{}};
  std::vector<Vec> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Vec> next;
    for (const auto& s : frontier)
      for (std::int64_t c = 0; c < symbols; ++c) {
        auto t = s;
        t.push_back(c);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

Outcome ints(std::optional<std::int64_t> pred, std::int64_t truth) {
  return {pred ? std::optional<Answer>(Answer::integer(*pred)) : std::nullopt, Answer::integer(truth)};
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("extraction") {
    auto a = extract_answer("...step 3: a0=6. Answer: 6", AnswerKind::Int);
    REQUIRE(a);
    CHECK(a->answer == Answer::integer(6));

    auto s = extract_answer("the sorted list is [1, 2, 3]", AnswerKind::Sequence);
    REQUIRE(s);
    CHECK(s->answer == Answer::sequence({1, 2, 3}));

    CHECK_FALSE(extract_answer("I cannot determine this.", AnswerKind::Int));
    CHECK_FALSE(extract_answer("I cannot determine this.", AnswerKind::Sequence));

    auto last = extract_answer("a0 becomes 4, then a1 is -3 and finally 12", AnswerKind::Int);
    REQUIRE(last);
    CHECK(last->answer.as_int() == 12);

    auto marker = extract_answer("Answer: 3\nwait, recomputing.\nAnswer:\n-7", AnswerKind::Int);
    REQUIRE(marker);
    CHECK(marker->answer.as_int() == -7);

    auto tup = extract_answer("so the result is\nAnswer: (4, -2)", AnswerKind::Tuple);
    REQUIRE(tup);
    CHECK(tup->answer == Answer::tuple({4, -2}));
    CHECK(tup->answer.kind == AnswerKind::Tuple);

    auto label = extract_answer("Answer: The Red Lamp.", AnswerKind::Label);
    REQUIRE(label);
    CHECK(label->answer == Answer::label("red lamp"));

    const std::string text = "x Answer: 42 y";
    auto span = extract_answer(text, AnswerKind::Int);
    REQUIRE(span);
    CHECK(text.substr(span->span_begin, span->span_end - span->span_begin) == "42");
  }

  TEST_CASE("extracted kind always matches the request") {
    const char* responses[] = {"Answer: 5", "[1, 2]", "(3, 4)", "Answer: [7]", "nothing", "12 and [1,2]", "Answer: red"};
    for (auto kind : {AnswerKind::Int, AnswerKind::Sequence, AnswerKind::Tuple, AnswerKind::Label})
      for (const char* r : responses)
        if (auto e = extract_answer(r, kind)) CHECK(e->answer.kind == kind);
  }

  TEST_CASE("accuracy and MAE") {
    std::vector<Outcome> thirty(30, ints(1, 1));
    CHECK(accuracy(thirty) == 1.0);
    std::vector<Outcome> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(ints(i < 6 ? 1 : 2, 1));
    CHECK(accuracy(ten) == doctest::Approx(0.6));

    std::vector<Outcome> mae{ints(5, 5), ints(7, 5)};
    CHECK(*mean_abs_error(mae).value == 1.0);
    CHECK(*mean_abs_error(thirty).value == 0.0);
    std::vector<Outcome> single{ints(10, -2)};
    CHECK(*mean_abs_error(single).value == 12.0);

    std::vector<Outcome> failing{ints(std::nullopt, 3), ints(4, 3)};
    CHECK(accuracy(failing) == 0.0);
    const auto r = mean_abs_error(failing);
    CHECK(*r.value == 1.0);
    CHECK(r.failures == 1);
    CHECK(r.scored == 1);
    std::vector<Outcome> none{ints(std::nullopt, 3)};
    CHECK_FALSE(mean_abs_error(none).value);

    CHECK_THROWS_AS(accuracy({}), EmptyInput);
    CHECK_THROWS_AS(mean_abs_error({}), EmptyInput);
  }

  TEST_CASE("levenshtein examples") {
    CHECK(levenshtein_similarity(Vec{1, 2, 3}, Vec{1, 2, 3}) == 1.0);
    CHECK(levenshtein_similarity(Vec{}, Vec{1, 2}) == 0.0);
    CHECK(levenshtein_similarity(Vec{}, Vec{}) == 1.0);
    CHECK(levenshtein_similarity(Vec{1, 2, 3}, Vec{1, 3}) == doctest::Approx(1.0 - 1.0 / 3.0));
    // Whole numbers are single symbols.
    CHECK(levenshtein_distance(Vec{12}, Vec{1, 2}) == 2);
  }

  TEST_CASE("levenshtein exhaustive against full-matrix oracle") {
    const auto seqs = all_sequences(4, 3);
    for (const auto& a : seqs)
      for (const auto& b : seqs) {
        const auto d = testsupport::edit_distance(a, b);
        REQUIRE(levenshtein_distance(a, b) == d);
        const auto sim = levenshtein_similarity(a, b);
        CHECK(sim == levenshtein_similarity(b, a));
        CHECK((sim == 1.0) == (a == b));
      }
  }

  TEST_CASE("approximation score") {
    auto all = approximation_delta(Vec{1, 2, 3}, Vec{1, 2, 3}, 3);
    CHECK(all.delta == 0.0);
    CHECK(all.exact_prob_model == 1.0);
    auto none = approximation_delta(Vec{0, 0}, Vec{1, 2}, 2);
    CHECK(none.delta == 1.0);
    CHECK(none.exact_prob_model == 0.0);
    auto half = approximation_delta(Vec{1, 9, 3, 9}, Vec{1, 2, 3, 4}, 4);
    CHECK(half.delta == 0.5);
    CHECK(half.exact_prob_model == doctest::Approx(0.0625));
    CHECK_THROWS_AS(approximation_delta(Vec{1}, Vec{1, 2}, 2), LengthMismatch);
  }

  TEST_CASE("token stats") {
    std::map<std::string, std::vector<TokenCounts>> groups;
    groups["10"] = {{50, 100}, {70, 200}};
    groups["20"] = {};
    const auto stats = token_stats(groups);
    CHECK(stats.count("20") == 0);
    CHECK(stats.at("10").mean_output == 150.0);
    CHECK(stats.at("10").mean_input == 60.0);
    CHECK(stats.at("10").cumulative_output == 300);
    groups["30"] = {{std::nullopt, 5}};
    CHECK_THROWS_AS(token_stats(groups), MissingTokenCounts);
  }

  TEST_CASE("repeated element audit") {
    CHECK(skipped_repeated_elements(Vec{1, 2, 3}, Vec{1, 2, 2, 3}));
    CHECK_FALSE(skipped_repeated_elements(Vec{1, 2, 2, 3}, Vec{1, 2, 2, 3}));
    CHECK_FALSE(skipped_repeated_elements(Vec{3, 2, 1}, Vec{1, 2, 2, 3}));
    CHECK_FALSE(skipped_repeated_elements(Vec{1, 4}, Vec{1, 2, 2, 3}));
  }

  TEST_CASE("mean, stddev and correlation") {
    const std::vector<double> runs{1.0, 0.9, 0.8};
    const auto m = mean_stddev(runs);
    CHECK(m.mean == doctest::Approx(0.9));
    REQUIRE(m.stddev);
    CHECK(*m.stddev == doctest::Approx(std::sqrt(0.02 / 3.0)));
    CHECK(*m.stddev == doctest::Approx(0.0816).epsilon(0.001));
    const std::vector<double> one{0.5};
    CHECK_FALSE(mean_stddev(one).stddev);
    CHECK_THROWS_AS(mean_stddev(std::vector<double>{}), EmptyInput);

    const std::vector<double> x{1.0, 0.8, 0.6, 0.4, 0.2};
    CHECK(*pearson(x, x) == doctest::Approx(1.0));
    const std::vector<double> flat{0.5, 0.5, 0.5, 0.5, 0.5};
    CHECK(*pearson(flat, flat) == 1.0);
    CHECK_FALSE(pearson(x, flat));
    const std::vector<double> rev{0.2, 0.4, 0.6, 0.8, 1.0};
    CHECK(*pearson(x, rev) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(x, one), LengthMismatch);
  }

  TEST_CASE("score group") {
    std::vector<std::vector<Outcome>> repeats(3);
    for (int r = 0; r < 3; ++r)
      for (int i = 0; i < 10; ++i) repeats[static_cast<std::size_t>(r)].push_back(ints(i < 10 - r ? 4 : 6, 4));
    const auto rep = score_group(repeats);
    CHECK(rep.accuracy == doctest::Approx(0.9));
    CHECK(rep.accuracy_over_repeats.mean == doctest::Approx(0.9));
    CHECK(*rep.accuracy_over_repeats.stddev == doctest::Approx(0.0816).epsilon(0.001));
    CHECK(*rep.mean_abs_error == doctest::Approx(0.2));
    CHECK_FALSE(rep.levenshtein_similarity);
    CHECK(rep.n == 30);
  }
}
