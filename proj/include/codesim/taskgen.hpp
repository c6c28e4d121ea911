#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "codesim/answer.hpp"
#include "codesim/dsl.hpp"

namespace codesim::taskgen {

enum class TaskFamily { StraightLine, CriticalPath, ParallelPaths, NestedLoops, Sorting, ApproximateLoops, FaultTolerant };

inline constexpr TaskFamily kAllFamilies[] = {
    TaskFamily::StraightLine,     TaskFamily::CriticalPath,  TaskFamily::ParallelPaths, TaskFamily::NestedLoops,
    TaskFamily::Sorting,          TaskFamily::ApproximateLoops, TaskFamily::FaultTolerant};

/// Kebab-case name used in file paths and on the command line.
std::string_view slug(TaskFamily family);
TaskFamily family_from_slug(std::string_view text);

/// Instruction classes a generated program may draw from.
struct OpSubset {
  bool add_sub = true;
  bool mov = true;
  bool logic = false;

  bool operator==(const OpSubset&) const = default;
  std::string to_string() const;            // e.g. "add_sub+mov"
  static OpSubset parse(std::string_view);  // inverse of to_string
};

/// Generation parameters. Only the fields relevant to `family` are read.
struct GenParams {
  TaskFamily family = TaskFamily::StraightLine;
  int n_ops = 10;        ///< total operations; per-level / per-loop count for loop families
  int n_vars = 3;        ///< variables, or agents for exchange narratives
  int path_len = 5;      ///< critical path length
  int n_paths = 3;       ///< independent groups (parallel paths)
  int depth = 1;         ///< loop nesting depth
  int vector_len = 10;   ///< sorting input length
  int n_variants = 2;    ///< equivalent programs (fault tolerant)
  int n_loops = 3;       ///< independent loops (approximate)
  int n_goods = 2;       ///< good types in critical good exchange
  int n_distractors = 0; ///< irrelevant sentences in recurring calculations
  OpSubset op_subset{};
  std::string algorithm = "bubble";  ///< sorting routine
  std::string style = "iterative";   ///< sorting routine style
  std::uint64_t seed = 0;

  /// Typical starting point of each family's parameter sweep.
  static GenParams defaults(TaskFamily family);

  /// Relevant fields in log-name order, e.g. "n_ops-40_n_vars-3".
  std::string label() const;
  /// Name of the primary control variable and its value.
  std::string control_name() const;
  std::int64_t control_value() const;
  /// Sets a field by its log-name key; throws InfeasibleParams for unknown keys.
  void set(std::string_view key, const nlohmann::json& value);
  /// Whether the parameters admit a naturalistic twin.
  bool paired() const;

  bool operator==(const GenParams&) const = default;
};

// ---------------------------------------------------------------------------
// Narrative plans

struct Give {
  std::size_t from, to, good;
  std::int64_t qty;
};
struct Acquire {
  std::size_t agent, good;
  std::int64_t qty;
};
struct Lose {
  std::size_t agent, good;
  std::int64_t qty;
};
/// Sender hands over all of one good and is left with zero.
struct GiveAll {
  std::size_t from, to, good;
};
using Event = std::variant<Give, Acquire, Lose, GiveAll>;

struct Person {
  std::string name;
  std::string subject;     ///< "she"
  std::string possessive;  ///< "her"
};

struct Good {
  std::string singular;
  std::string plural;
};

/// Agents exchanging goods. Holdings are indexed [agent][good].
struct EventPlan {
  std::vector<Person> agents;
  std::vector<Good> goods;
  std::vector<std::vector<std::int64_t>> initial;
  std::vector<Event> events;
  /// (agent, good) pairs the question asks about, in answer order.
  std::vector<std::pair<std::size_t, std::size_t>> targets;

  dsl::VarId var(std::size_t agent, std::size_t good) const { return {agent * goods.size() + good}; }
};

/// Nested periods; level 0 is outermost. Each delta is added once per
/// iteration of its level.
struct RecurringPlan {
  struct Level {
    std::string unit;
    std::int64_t count = 2;
    std::vector<std::int64_t> deltas;
  };
  Person agent;
  std::vector<Level> levels;
  std::vector<std::string> distractors;
};

/// Objects with distinct weights; asks for the k-th heaviest or lightest.
struct RankingPlan {
  std::vector<std::string> objects;
  std::vector<std::int64_t> weights;
  std::size_t k = 1;  ///< 1-based rank
  bool heaviest = false;
};

using Plan = std::variant<std::monostate, EventPlan, RecurringPlan, RankingPlan>;

/// Synthetic twin of an exchange plan: one variable per (agent, good).
dsl::Program compile_plan(const EventPlan& plan);
dsl::Program compile_plan(const RecurringPlan& plan);

/// Narrative-level evaluation that tracks holdings directly, independent of
/// the interpreter.
Answer simulate_plan(const EventPlan& plan);
Answer simulate_plan(const RecurringPlan& plan);
Answer simulate_plan(const RankingPlan& plan);

/// Narrative without the question: one sentence per fact or event.
std::string narrate(const EventPlan& plan);
std::string narrate(const RecurringPlan& plan);
std::string narrate(const RankingPlan& plan);

/// Narrative followed by the question on its own line.
std::string render_naturalistic(const EventPlan& plan);
std::string render_naturalistic(const RecurringPlan& plan);
std::string render_naturalistic(const RankingPlan& plan);
std::string render_event(const EventPlan& plan, const Event& event);
std::string naturalistic_question(const Plan& plan);

// ---------------------------------------------------------------------------
// Instances

struct PairedInstance {
  std::string id;
  TaskFamily family = TaskFamily::StraightLine;
  GenParams params;
  std::uint64_t seed = 0;
  std::optional<dsl::Program> program;  ///< absent for sorting
  std::vector<dsl::VarId> targets;
  std::string synthetic_source;
  std::string synthetic_question;
  std::string naturalistic_text;  ///< empty for synthetic-only instances
  std::string naturalistic_question;
  Answer ground_truth;
  /// Differs from ground_truth only for ranking, whose question asks for a name.
  std::optional<Answer> naturalistic_truth;
  std::vector<std::int64_t> sort_input;
  std::vector<std::string> variant_sources;
  Plan plan;

  bool has_naturalistic() const { return !naturalistic_text.empty(); }
  const Answer& truth_for(bool naturalistic) const {
    return naturalistic && naturalistic_truth ? *naturalistic_truth : ground_truth;
  }
  /// Argument text for the simulation prompt's input slot.
  std::string call_input() const;
};

/// Generates one instance; deterministic in `params` (including the seed).
/// Throws InfeasibleParams on inconsistent parameters.
PairedInstance generate_pair(const GenParams& params);

/// `m` programs (the original first) with pairwise distinct renderings that
/// agree on the final value of `target`.
std::vector<dsl::Program> equivalent_variants(const dsl::Program& program, dsl::VarId target, int m,
                                              std::uint64_t seed);

/// `k` independent single-level loops of `n` instructions each.
PairedInstance approximate_instance(int k, int n, std::uint64_t seed);

/// Question text for the synthetic rendering of a program's targets.
std::string synthetic_question(const std::vector<dsl::VarId>& targets);

// ---------------------------------------------------------------------------
// Serialisation

void to_json(nlohmann::json& j, const GenParams& p);
void from_json(const nlohmann::json& j, GenParams& p);
nlohmann::json instance_to_json(const PairedInstance& inst);
PairedInstance instance_from_json(const nlohmann::json& j);

/// `<family>/<label>_n_instances-<n>_batch-<b>.json`
std::string batch_filename(const GenParams& params, std::size_t n_instances, std::size_t batch);

}  // namespace codesim::taskgen
