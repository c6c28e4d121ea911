#include <doctest.h>

#include <fstream>
#include <sstream>

#include "codesim/error.hpp"
#include "codesim/prompting.hpp"

using namespace codesim;
using namespace codesim::prompting;
using taskgen::TaskFamily;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

taskgen::PairedInstance make(TaskFamily family, std::uint64_t seed) {
  auto p = taskgen::GenParams::defaults(family);
  p.seed = seed;
  return taskgen::generate_pair(p);
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("prompting") {
  TEST_CASE("CoSm golden template") {
    const auto golden = slurp(CODESIM_GOLDEN_DIR "/cosm_template.txt");
    CHECK(std::string(cosm_template()) == golden);

    const auto inst = make(TaskFamily::Sorting, 3);
    const auto bundle = build_prompt(inst, Rendering::Synthetic, PromptStyle::CoSm);
    auto code = inst.synthetic_source;
    while (!code.empty() && code.back() == '\n') code.pop_back();
    const auto expected = replace(replace(golden, "@input@", inst.call_input()), "@code@", code);
    CHECK(bundle.user_text.rfind(expected, 0) == 0);
    CHECK(bundle.user_text.find("# 1. Simulate the above program instruction by instruction.\n") != std::string::npos);
    CHECK(bundle.answer_format == AnswerKind::Sequence);
  }

  TEST_CASE("render_cosm leaves code markers alone") {
    const auto text = render_cosm("x = '@input@'\n", "7");
    CHECK(text.rfind("x = '@input@'\n# 1.", 0) == 0);
    CHECK(text.find("following input: 7.") != std::string::npos);
  }

  TEST_CASE("direct and CoT bundles") {
    const auto inst = make(TaskFamily::StraightLine, 5);
    const auto direct = build_prompt(inst, Rendering::Synthetic, PromptStyle::Direct);
    CHECK(direct.user_text.rfind(inst.synthetic_source, 0) == 0);
    CHECK(direct.user_text.find(inst.synthetic_question) != std::string::npos);
    CHECK(direct.user_text.find(kCotInstruction) == std::string::npos);
    CHECK(direct.user_text.find("Answer: <integer>") != std::string::npos);
    CHECK(direct.instance_id == inst.id);

    const auto cot = build_prompt(inst, Rendering::Naturalistic, PromptStyle::CoT);
    CHECK(cot.user_text.rfind(inst.naturalistic_text, 0) == 0);
    CHECK(count(cot.user_text, inst.naturalistic_question) == 1);
    CHECK(cot.user_text.find(kCotInstruction) != std::string::npos);
    CHECK(cot.user_text.find("a0") == std::string::npos);

    CHECK(build_prompt(inst, Rendering::Synthetic, PromptStyle::CoT).user_text ==
          build_prompt(inst, Rendering::Synthetic, PromptStyle::CoT).user_text);
  }

  TEST_CASE("answer format follows ground truth") {
    for (auto family : taskgen::kAllFamilies) {
      const auto inst = make(family, 9);
      for (auto rendering : {Rendering::Synthetic, Rendering::Naturalistic}) {
        if (rendering == Rendering::Naturalistic && !inst.has_naturalistic()) continue;
        const auto b = build_prompt(inst, rendering, PromptStyle::CoT);
        CHECK(b.answer_format == inst.truth_for(rendering == Rendering::Naturalistic).kind);
      }
    }
  }

  TEST_CASE("style mismatches") {
    const auto straight = make(TaskFamily::StraightLine, 1);
    CHECK_THROWS_AS(build_prompt(straight, Rendering::Naturalistic, PromptStyle::CoSm), StyleMismatch);
    CHECK_THROWS_AS(build_prompt(straight, Rendering::Synthetic, PromptStyle::FaultTolerantMulti), StyleMismatch);
    CHECK_THROWS_AS(build_prompt(straight, Rendering::Synthetic, PromptStyle::MemorisationProbe), StyleMismatch);
    const auto approx = make(TaskFamily::ApproximateLoops, 1);
    CHECK_THROWS_AS(build_prompt(approx, Rendering::Naturalistic, PromptStyle::CoT), StyleMismatch);
  }

  TEST_CASE("fault tolerant bundles") {
    const std::vector<std::string> two{"a0=1\na0 += 2\n", "a0=1\na0 += 1\na0 += 1\n"};
    const auto b = build_fault_tolerant(two, dsl::VarId{0});
    CHECK(b.user_text.find(two[0]) != std::string::npos);
    CHECK(b.user_text.find(two[1]) != std::string::npos);
    CHECK(b.user_text.find("The 2 programs above are equivalent.") != std::string::npos);
    CHECK(count(b.user_text, "What is the value of a0 at the end?") == 1);
    CHECK(b.style == PromptStyle::FaultTolerantMulti);

    auto p = taskgen::GenParams::defaults(TaskFamily::FaultTolerant);
    p.n_variants = 5;
    p.seed = 2;
    const auto inst = taskgen::generate_pair(p);
    const auto five = build_prompt(inst, Rendering::Synthetic, PromptStyle::FaultTolerantMulti);
    CHECK(count(five.user_text, "# Program ") == 5);
    CHECK(five.user_text.find("The 5 programs above") != std::string::npos);

    CHECK_THROWS_AS(build_fault_tolerant(std::vector<std::string>{"a0=1\n"}, dsl::VarId{0}), StyleMismatch);
  }

  TEST_CASE("memorisation probe splits") {
    algolib::AlgorithmEntry e;
    e.oracle_id = "ten";
    for (int i = 1; i <= 10; ++i) e.source_text += "line" + std::to_string(i) + "\n";
    const auto half = build_memorisation_probe(e, 0.5);
    REQUIRE(half.held_out);
    CHECK(*half.held_out == "line6\nline7\nline8\nline9\nline10\n");
    CHECK(half.user_text.find("line5\n") != std::string::npos);
    CHECK(half.user_text.find("line6") == std::string::npos);

    const auto most = build_memorisation_probe(e, 0.9);
    CHECK(*most.held_out == "line10\n");
    CHECK(most.user_text.find("line9\n") != std::string::npos);

    algolib::AlgorithmEntry tiny;
    tiny.source_text = "a\nb\n";
    CHECK_THROWS_AS(build_memorisation_probe(tiny, 0.5), InfeasibleParams);
    CHECK_THROWS_AS(build_memorisation_probe(e, 1.0), InfeasibleParams);

    const auto fib = build_memorisation_probe(algolib::variant_pairs()[0].base, 0.5);
    CHECK(fib.user_text.find("def f(n):") != std::string::npos);
    CHECK_FALSE(fib.held_out->empty());
  }
}
