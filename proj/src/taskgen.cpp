#include "codesim/taskgen.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "codesim/algolib.hpp"
#include "codesim/error.hpp"
#include "codesim/rng.hpp"

namespace codesim::taskgen {

namespace {

using dsl::VarId;

// Generated values stay small so operand magnitude is never the difficulty.
constexpr std::int64_t kMaxMagnitude = 999;
constexpr std::int64_t kLiteralMax = 9;

const Person kPeople[] = {
    {"Alice", "she", "her"},   {"Bob", "he", "his"},     {"Carol", "she", "her"},  {"Dave", "he", "his"},
    {"Erin", "she", "her"},    {"Frank", "he", "his"},   {"Grace", "she", "her"},  {"Heidi", "she", "her"},
    {"Ivan", "he", "his"},     {"Judy", "she", "her"},   {"Kai", "they", "their"}, {"Liam", "he", "his"},
    {"Mia", "she", "her"},     {"Noah", "he", "his"},    {"Olivia", "she", "her"}, {"Peggy", "she", "her"},
    {"Quinn", "they", "their"}, {"Rupert", "he", "his"}, {"Sybil", "she", "her"},  {"Trent", "he", "his"},
};

const Good kGoods[] = {
    {"apple", "apples"},   {"pear", "pears"}, {"orange", "oranges"}, {"banana", "bananas"}, {"lemon", "lemons"},
    {"marble", "marbles"}, {"coin", "coins"}, {"book", "books"},     {"pencil", "pencils"}, {"stamp", "stamps"},
};

const char* const kColours[] = {"red", "blue", "green", "yellow", "black", "white", "purple", "orange"};
const char* const kThings[] = {"box", "ball", "vase", "lamp", "chair", "bag", "book", "clock", "kettle", "drum"};

const char* const kUnits[] = {"year", "season", "month", "week", "day", "hour", "session", "round", "turn"};

void require(bool ok, const std::string& what) {
  if (!ok) throw InfeasibleParams(what);
}

std::string hex_seed(std::uint64_t seed) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(seed));
  return buf;
}

template <typename T, std::size_t N>
std::vector<T> draw_distinct(Rng& rng, const T (&table)[N], std::size_t count) {
  require(count <= N, "not enough distinct entries in a vocabulary table");
  std::vector<T> items(std::begin(table), std::end(table));
  rng.shuffle(items);
  items.resize(count);
  return items;
}

std::vector<dsl::Node> initialise(std::span<const std::int64_t> values) {
  std::vector<dsl::Node> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.emplace_back(dsl::Init{VarId{i}, values[i]});
  return out;
}

std::int64_t magnitude_of(const dsl::Program& p) {
  std::int64_t worst = 0;
  for (const auto& step : dsl::execute(p).trace)
    for (const auto& slot : step.env.slots())
      if (slot) worst = std::max(worst, *slot < 0 ? -*slot : *slot);
  return worst;
}

// ---------------------------------------------------------------------------
// Random straight-line code over a variable pool.

class OpGenerator {
 public:
  OpGenerator(Rng& rng, OpSubset subset, std::vector<std::int64_t>& env) : rng_(rng), subset_(subset), env_(env) {}

  // Appends `count` statements whose destinations and sources lie in `pool`.
  void emit(std::span<const VarId> pool, int count, std::vector<dsl::Node>& out) {
    for (int i = 0; i < count; ++i) out.emplace_back(next(pool));
  }

  dsl::Statement next(std::span<const VarId> pool) {
    std::vector<int> classes;
    if (subset_.add_sub) classes.push_back(0);
    if (subset_.mov && pool.size() >= 2) classes.push_back(1);
    if (subset_.logic) classes.push_back(2);
    require(!classes.empty(), "operation subset admits no statement for a pool of " + std::to_string(pool.size()));
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int cls = classes[rng_.index(classes.size())];
      const VarId dst = pool[rng_.index(pool.size())];
      const auto [stmt, value] = candidate(cls, dst, pool);
      const std::int64_t before = env_[dst.index];
      const bool noop = value == before;
      if (value > kMaxMagnitude || value < -kMaxMagnitude) continue;
      if (noop) continue;
      env_[dst.index] = value;
      return stmt;
    }
    // Fall back to a step toward zero, which is bounded and never a no-op.
    const VarId dst = pool[rng_.index(pool.size())];
    if (subset_.add_sub) {
      const std::int64_t v = env_[dst.index];
      if (v > 0) {
        env_[dst.index] = v - 1;
        return dsl::SubAssign{dst, std::int64_t{1}};
      }
      env_[dst.index] = v + 1;
      return dsl::AddAssign{dst, std::int64_t{1}};
    }
    const int cls = classes[rng_.index(classes.size())];
    const auto [stmt, value] = candidate(cls, dst, pool);
    env_[dst.index] = value;
    return stmt;
  }

 private:
  VarId other(std::span<const VarId> pool, VarId not_this) {
    if (pool.size() < 2) return not_this;
    VarId v;
    do {
      v = pool[rng_.index(pool.size())];
    } while (v == not_this);
    return v;
  }

  std::pair<dsl::Statement, std::int64_t> candidate(int cls, VarId dst, std::span<const VarId> pool) {
    const std::int64_t cur = env_[dst.index];
    if (cls == 0) {
      const bool add = rng_.coin();
      dsl::Operand src;
      std::int64_t operand;
      if (pool.size() >= 2 && rng_.coin()) {
        const VarId v = other(pool, dst);
        src = v;
        operand = env_[v.index];
      } else {
        operand = rng_.uniform(1, kLiteralMax);
        src = operand;
      }
      if (add) return {dsl::AddAssign{dst, src}, cur + operand};
      return {dsl::SubAssign{dst, src}, cur - operand};
    }
    if (cls == 1) {
      const VarId src = other(pool, dst);
      return {dsl::Assign{dst, src}, env_[src.index]};
    }
    const VarId src = other(pool, dst);
    const bool lhs = cur != 0;
    const bool rhs = env_[src.index] != 0;
    if (rng_.coin()) return {dsl::AndAssign{dst, src}, (lhs && rhs) ? 1 : 0};
    return {dsl::OrAssign{dst, src}, (lhs || rhs) ? 1 : 0};
  }

  Rng& rng_;
  OpSubset subset_;
  std::vector<std::int64_t>& env_;
};

void validate_subset(const OpSubset& s) {
  require(s.add_sub || s.mov || s.logic, "operation subset is empty");
  require(!s.logic || (!s.add_sub && !s.mov), "logical operations cannot be mixed with arithmetic or moves");
}

std::vector<std::int64_t> initial_values(Rng& rng, std::size_t n, const OpSubset& subset) {
  std::vector<std::int64_t> values(n);
  for (auto& v : values) v = subset.logic ? rng.uniform(0, 1) : rng.uniform(-kLiteralMax, kLiteralMax);
  return values;
}

std::vector<VarId> all_vars(std::size_t n) {
  std::vector<VarId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(VarId{i});
  return out;
}

dsl::Program random_straight_line(Rng& rng, int n_ops, int n_vars, const OpSubset& subset) {
  validate_subset(subset);
  require(n_ops >= 1 && n_vars >= 1, "n_ops and n_vars must be positive");
  auto env = initial_values(rng, static_cast<std::size_t>(n_vars), subset);
  dsl::Program p{static_cast<std::size_t>(n_vars), initialise(env)};
  const auto pool = all_vars(p.var_count);
  OpGenerator gen(rng, subset, env);
  gen.emit(pool, n_ops, p.body);
  return p;
}

// Builds the path backwards from the target so every emitted statement writes
// a variable that is live at that point; distractors only touch other variables.
dsl::Program random_critical_path(Rng& rng, const GenParams& params, VarId& target) {
  const auto& subset = params.op_subset;
  validate_subset(subset);
  require(params.path_len >= 0 && params.path_len <= params.n_ops, "path_len must lie in [0, n_ops]");
  const int distractors = params.n_ops - params.path_len;
  const bool mov_only = subset.mov && !subset.add_sub && !subset.logic;
  const int path_vars = std::max(mov_only ? 2 : 1, params.n_vars / 2);
  require(params.n_vars >= path_vars + (distractors > 0 ? 1 : 0), "n_vars too small for the requested critical path");
  require(!mov_only || distractors == 0 || params.n_vars - path_vars >= 2, "move-only distractors need two variables");

  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto ids = all_vars(static_cast<std::size_t>(params.n_vars));
    rng.shuffle(ids);
    const std::vector<VarId> path(ids.begin(), ids.begin() + path_vars);
    const std::vector<VarId> noise(ids.begin() + path_vars, ids.end());
    target = path.front();

    std::vector<dsl::Statement> chain;
    std::set<VarId> live{target};
    for (int i = 0; i < params.path_len; ++i) {
      const std::vector<VarId> live_list(live.begin(), live.end());
      const VarId dst = live_list[rng.index(live_list.size())];
      std::vector<int> classes;
      if (subset.add_sub) classes.push_back(0);
      if (subset.mov && path.size() >= 2) classes.push_back(1);
      if (subset.logic) classes.push_back(2);
      const int cls = classes[rng.index(classes.size())];
      auto pick_other = [&] {
        VarId v;
        do {
          v = path[rng.index(path.size())];
        } while (v == dst && path.size() > 1);
        return v;
      };
      if (cls == 0) {
        dsl::Operand src;
        if (rng.coin()) {
          const VarId v = path[rng.index(path.size())];
          live.insert(v);
          src = v;
        } else {
          src = rng.uniform(1, kLiteralMax);
        }
        chain.push_back(rng.coin() ? dsl::Statement{dsl::AddAssign{dst, src}} : dsl::Statement{dsl::SubAssign{dst, src}});
      } else if (cls == 1) {
        const VarId src = pick_other();
        live.erase(dst);
        live.insert(src);
        chain.push_back(dsl::Assign{dst, src});
      } else {
        const VarId src = pick_other();
        live.insert(src);
        chain.push_back(rng.coin() ? dsl::Statement{dsl::AndAssign{dst, src}} : dsl::Statement{dsl::OrAssign{dst, src}});
      }
    }
    std::reverse(chain.begin(), chain.end());

    auto env = initial_values(rng, static_cast<std::size_t>(params.n_vars), subset);
    dsl::Program p{static_cast<std::size_t>(params.n_vars), initialise(env)};
    std::vector<dsl::Node> noise_ops;
    if (distractors > 0) {
      OpGenerator gen(rng, subset, env);
      gen.emit(noise, distractors, noise_ops);
    }
    std::vector<bool> is_path(static_cast<std::size_t>(params.n_ops), false);
    std::fill(is_path.begin(), is_path.begin() + params.path_len, true);
    rng.shuffle(is_path);
    std::size_t pi = 0, ni = 0;
    for (bool take_path : is_path) {
      if (take_path)
        p.body.emplace_back(chain[pi++]);
      else
        p.body.push_back(noise_ops[ni++]);
    }
    if (magnitude_of(p) > kMaxMagnitude) continue;
    return p;
  }
  throw InfeasibleParams("could not keep critical-path values within bounds");
}

// ---------------------------------------------------------------------------
// Exchange plans

class Exchange {
 public:
  Exchange(Rng& rng, std::size_t n_agents, std::size_t n_goods) : rng_(rng) {
    plan.agents = draw_distinct(rng, kPeople, n_agents);
    plan.goods = draw_distinct(rng, kGoods, n_goods);
    plan.initial.assign(n_agents, std::vector<std::int64_t>(n_goods, 0));
    for (auto& row : plan.initial)
      for (auto& v : row) v = rng.uniform(0, kLiteralMax);
    held = plan.initial;
  }

  std::size_t agents() const { return plan.agents.size(); }
  std::size_t goods() const { return plan.goods.size(); }

  bool can_acquire(std::size_t a, std::size_t g) const { return held[a][g] + kLiteralMax <= kMaxMagnitude; }
  bool can_lose(std::size_t a, std::size_t g) const { return held[a][g] >= 1; }

  void acquire(std::size_t a, std::size_t g) { push(Acquire{a, g, rng_.uniform(1, kLiteralMax)}); }
  void lose(std::size_t a, std::size_t g) { push(Lose{a, g, rng_.uniform(1, std::min(kLiteralMax, held[a][g]))}); }
  void give(std::size_t from, std::size_t to, std::size_t g) {
    push(Give{from, to, g, rng_.uniform(1, std::min(kLiteralMax, held[from][g]))});
  }
  void give_all(std::size_t from, std::size_t to, std::size_t g) { push(GiveAll{from, to, g}); }

  bool can_give_all(std::size_t from, std::size_t to, std::size_t g) const {
    return held[from][g] >= 1 && held[to][g] + held[from][g] <= kMaxMagnitude;
  }

  /// Acquire or lose, whichever keeps holdings in range.
  void nudge(std::size_t a, std::size_t g) {
    const bool gain = can_lose(a, g) ? (can_acquire(a, g) ? rng_.coin() : false) : true;
    if (gain)
      acquire(a, g);
    else
      lose(a, g);
  }

  std::size_t other_agent(std::size_t not_this) {
    std::size_t b;
    do {
      b = rng_.index(agents());
    } while (b == not_this);
    return b;
  }

  EventPlan plan;
  std::vector<std::vector<std::int64_t>> held;

 private:
  void push(Event e) {
    std::visit(
        [&](const auto& ev) {
          using T = std::decay_t<decltype(ev)>;
          if constexpr (std::is_same_v<T, Give>) {
            held[ev.from][ev.good] -= ev.qty;
            held[ev.to][ev.good] += ev.qty;
          } else if constexpr (std::is_same_v<T, Acquire>) {
            held[ev.agent][ev.good] += ev.qty;
          } else if constexpr (std::is_same_v<T, Lose>) {
            held[ev.agent][ev.good] -= ev.qty;
          } else {
            held[ev.to][ev.good] += held[ev.from][ev.good];
            held[ev.from][ev.good] = 0;
          }
        },
        e);
    plan.events.push_back(e);
  }

  Rng& rng_;
};

// Exactly `n_ops` statements of exchanges among all agents on good 0.
void fill_exchanges(Rng& rng, Exchange& ex, int n_ops, bool allow_give_all) {
  int remaining = n_ops;
  while (remaining > 0) {
    const std::size_t a = rng.index(ex.agents());
    std::vector<int> kinds{0};  // nudge
    if (remaining >= 2 && ex.agents() >= 2) {
      kinds.push_back(1);  // give
      if (allow_give_all) kinds.push_back(2);
    }
    const int kind = kinds[rng.index(kinds.size())];
    if (kind == 1 && ex.can_lose(a, 0)) {
      ex.give(a, ex.other_agent(a), 0);
      remaining -= 2;
    } else if (kind == 2) {
      const std::size_t b = ex.other_agent(a);
      if (ex.can_give_all(a, b, 0)) {
        ex.give_all(a, b, 0);
        remaining -= 2;
        continue;
      }
      ex.nudge(a, 0);
      remaining -= 1;
    } else {
      ex.nudge(a, 0);
      remaining -= 1;
    }
  }
}

EventPlan critical_plan(Rng& rng, const GenParams& params) {
  require(params.path_len >= 0 && params.path_len <= params.n_ops, "path_len must lie in [0, n_ops]");
  require(params.n_vars >= 1 && params.n_goods >= 1, "need at least one agent and one good");
  const auto n_agents = static_cast<std::size_t>(params.n_vars);
  const auto n_goods = static_cast<std::size_t>(params.n_goods);
  int p = params.path_len;
  int r = params.n_ops - params.path_len;
  require(r == 0 || n_agents * n_goods >= 2, "distractors need a variable other than the target");
  Exchange ex(rng, n_agents, n_goods);
  const std::size_t T = rng.index(n_agents);
  const std::size_t G = rng.index(n_goods);
  ex.plan.targets = {{T, G}};
  const bool allow_give_all = params.op_subset.mov;

  while (p + r > 0) {
    const bool on_path = p > 0 && (r == 0 || rng.uniform(1, p + r) <= p);
    if (on_path) {
      // Each path event writes the target exactly once and never overwrites it.
      const bool give = r >= 1 && n_agents >= 2 && rng.coin();
      if (give) {
        const std::size_t x = ex.other_agent(T);
        if (rng.coin() && ex.can_lose(T, G)) {
          ex.give(T, x, G);
          --p;
          --r;
          continue;
        }
        if (ex.can_lose(x, G) && ex.can_acquire(T, G)) {
          ex.give(x, T, G);
          --p;
          --r;
          continue;
        }
      }
      ex.nudge(T, G);
      --p;
      continue;
    }
    // Distractor: anything that neither reads nor writes the target variable.
    std::vector<std::pair<std::size_t, std::size_t>> others;
    for (std::size_t a = 0; a < n_agents; ++a)
      for (std::size_t g = 0; g < n_goods; ++g)
        if (!(a == T && g == G)) others.emplace_back(a, g);
    if (r >= 2 && rng.coin()) {
      const auto [a, g] = others[rng.index(others.size())];
      std::vector<std::size_t> partners;
      for (std::size_t b = 0; b < n_agents; ++b)
        if (b != a && !(b == T && g == G)) partners.push_back(b);
      if (!partners.empty()) {
        const std::size_t b = partners[rng.index(partners.size())];
        if (allow_give_all && rng.coin() && ex.can_give_all(a, b, g)) {
          ex.give_all(a, b, g);
          r -= 2;
          continue;
        }
        if (ex.can_lose(a, g)) {
          ex.give(a, b, g);
          r -= 2;
          continue;
        }
      }
    }
    const auto [a, g] = others[rng.index(others.size())];
    ex.nudge(a, g);
    --r;
  }
  return ex.plan;
}

// ---------------------------------------------------------------------------
// Recurring calculations

RecurringPlan recurring_plan(Rng& rng, const GenParams& params) {
  require(params.depth >= 1 && params.depth <= 9, "depth must lie in [1, 9]");
  require(params.n_ops >= 1, "n_ops must be positive");
  const auto k = static_cast<std::size_t>(params.depth);
  const auto n = static_cast<std::size_t>(params.n_ops);
  const std::int64_t bound = std::min<std::int64_t>(std::int64_t{1} << k, 1024);

  RecurringPlan plan;
  plan.agent = kPeople[rng.index(std::size(kPeople))];
  std::vector<std::vector<std::int64_t>> deltas(k, std::vector<std::int64_t>(n));
  auto total = [&] {
    std::int64_t t = 0;
    for (std::size_t d = 0; d < k; ++d)
      t += (std::int64_t{1} << (d + 1)) * std::accumulate(deltas[d].begin(), deltas[d].end(), std::int64_t{0});
    return t;
  };
  bool ok = false;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    for (auto& level : deltas)
      for (auto& d : level) d = rng.coin() ? 1 : -1;
    const auto t = total();
    ok = t <= bound && t >= -bound;
  }
  if (!ok) {
    // Alternating signs: even n nets zero per level; odd n nets +1 on the
    // innermost level and -1 elsewhere, totalling 2.
    for (std::size_t d = 0; d < k; ++d) {
      const std::int64_t first = (n % 2 == 1 && d + 1 < k) ? -1 : 1;
      for (std::size_t i = 0; i < n; ++i) deltas[d][i] = (i % 2 == 0) ? first : -first;
    }
  }
  for (std::size_t d = 0; d < k; ++d) plan.levels.push_back({kUnits[d], 2, deltas[d]});
  for (int i = 0; i < params.n_distractors; ++i) {
    const auto& other = kPeople[rng.index(std::size(kPeople))];
    const auto& good = kGoods[rng.index(std::size(kGoods))];
    plan.distractors.push_back(other.name + " owns " + std::to_string(rng.uniform(2, kLiteralMax)) + " " + good.plural +
                               ", which has nothing to do with the tally.");
  }
  return plan;
}

// ---------------------------------------------------------------------------

std::string vector_text(const std::vector<std::int64_t>& v) { return algolib::value_to_text(algolib::Value{v}); }

Answer project(const dsl::Env& env, const std::vector<VarId>& targets) {
  if (targets.size() == 1) return Answer::integer(env.at(targets.front()));
  std::vector<std::int64_t> values;
  for (auto t : targets) values.push_back(env.at(t));
  return Answer::tuple(std::move(values));
}

void finish_program(PairedInstance& inst, dsl::Program program, std::vector<VarId> targets) {
  inst.synthetic_source = dsl::render_source(program);
  inst.synthetic_question = synthetic_question(targets);
  inst.ground_truth = project(dsl::run(program), targets);
  inst.targets = std::move(targets);
  inst.program = std::move(program);
}

template <typename PlanT>
void attach_plan(PairedInstance& inst, PlanT plan) {
  inst.naturalistic_text = narrate(plan);
  inst.plan = std::move(plan);
  inst.naturalistic_question = naturalistic_question(inst.plan);
}

std::vector<VarId> plan_targets(const EventPlan& plan) {
  std::vector<VarId> out;
  for (const auto& [a, g] : plan.targets) out.push_back(plan.var(a, g));
  return out;
}

PairedInstance generate_sorting(Rng& rng, PairedInstance inst) {
  const auto& params = inst.params;
  require(params.vector_len >= 1 && params.vector_len <= 80, "vector_len must lie in [1, 80]");
  const auto& routine = algolib::entry(params.algorithm, algolib::style_from_string(params.style));
  const auto n = static_cast<std::size_t>(params.vector_len);
  inst.sort_input.resize(n);
  for (auto& v : inst.sort_input) v = rng.uniform(0, 100);
  inst.synthetic_source = routine.source_text;
  inst.synthetic_question =
      "What is the output of main(" + vector_text(inst.sort_input) + ", " + std::to_string(n) + ")?";
  inst.ground_truth = Answer::sequence(std::get<std::vector<std::int64_t>>(algolib::oracle_run(routine, inst.sort_input)));

  RankingPlan plan;
  std::vector<std::string> names;
  for (const char* colour : kColours)
    for (const char* thing : kThings) names.push_back(std::string(colour) + " " + thing);
  rng.shuffle(names);
  names.resize(n);
  std::vector<std::int64_t> weights(100);
  std::iota(weights.begin(), weights.end(), 1);
  rng.shuffle(weights);
  weights.resize(n);
  plan.objects = std::move(names);
  plan.weights = std::move(weights);
  plan.k = static_cast<std::size_t>(rng.uniform(1, static_cast<std::int64_t>(n)));
  plan.heaviest = rng.coin();
  // Synthetic twin of the ranking: sort the weights with the same routine and
  // index the k-th element from the requested end.
  const auto sorted = std::get<std::vector<std::int64_t>>(algolib::oracle_run(routine, plan.weights));
  const auto wanted = plan.heaviest ? sorted[n - plan.k] : sorted[plan.k - 1];
  const auto pos = std::find(plan.weights.begin(), plan.weights.end(), wanted) - plan.weights.begin();
  inst.naturalistic_truth = Answer::label(plan.objects[static_cast<std::size_t>(pos)]);
  attach_plan(inst, std::move(plan));
  return inst;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view slug(TaskFamily family) {
  switch (family) {
    case TaskFamily::StraightLine:
      return "straight-line";
    case TaskFamily::CriticalPath:
      return "critical-path";
    case TaskFamily::ParallelPaths:
      return "parallel-paths";
    case TaskFamily::NestedLoops:
      return "nested-loops";
    case TaskFamily::Sorting:
      return "sorting";
    case TaskFamily::ApproximateLoops:
      return "approximate-loops";
    case TaskFamily::FaultTolerant:
      return "fault-tolerant";
  }
  return "unknown";
}

TaskFamily family_from_slug(std::string_view text) {
  for (auto f : kAllFamilies)
    if (slug(f) == text) return f;
  throw InfeasibleParams("unknown task family '" + std::string(text) + "'");
}

std::string OpSubset::to_string() const {
  std::string out;
  auto add = [&](const char* s) { out += (out.empty() ? "" : "+") + std::string(s); };
  if (add_sub) add("add_sub");
  if (mov) add("mov");
  if (logic) add("and_or");
  return out;
}

OpSubset OpSubset::parse(std::string_view text) {
  OpSubset s{false, false, false};
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('+', start);
    if (end == std::string_view::npos) end = text.size();
    const auto part = text.substr(start, end - start);
    if (part == "add_sub")
      s.add_sub = true;
    else if (part == "mov")
      s.mov = true;
    else if (part == "and_or")
      s.logic = true;
    else
      throw InfeasibleParams("unknown operation class '" + std::string(part) + "'");
    start = end + 1;
  }
  return s;
}

GenParams GenParams::defaults(TaskFamily family) {
  GenParams p;
  p.family = family;
  switch (family) {
    case TaskFamily::StraightLine:
      p.n_ops = 10;
      break;
    case TaskFamily::CriticalPath:
      p.n_ops = 20;
      p.path_len = 5;
      break;
    case TaskFamily::ParallelPaths:
      p.n_ops = 10;
      p.n_paths = 3;
      break;
    case TaskFamily::NestedLoops:
      p.depth = 1;
      p.n_ops = 2;
      break;
    case TaskFamily::Sorting:
      p.vector_len = 10;
      break;
    case TaskFamily::ApproximateLoops:
      p.n_loops = 3;
      p.n_ops = 3;
      break;
    case TaskFamily::FaultTolerant:
      p.n_ops = 10;
      p.n_variants = 2;
      break;
  }
  return p;
}

std::string GenParams::label() const {
  auto kv = [](const char* k, auto v) {
    if constexpr (std::is_arithmetic_v<decltype(v)>)
      return std::string(k) + "-" + std::to_string(v);
    else
      return std::string(k) + "-" + std::string(v);
  };
  std::string out;
  switch (family) {
    case TaskFamily::StraightLine:
      out = kv("n_ops", n_ops) + "_" + kv("n_vars", n_vars);
      break;
    case TaskFamily::CriticalPath:
      out = kv("n_ops", n_ops) + "_" + kv("n_vars", n_vars) + "_" + kv("path_len", path_len);
      break;
    case TaskFamily::ParallelPaths:
      out = kv("n_ops", n_ops) + "_" + kv("n_paths", n_paths);
      break;
    case TaskFamily::NestedLoops:
      out = kv("depth", depth) + "_" + kv("n_ops", n_ops);
      break;
    case TaskFamily::Sorting:
      out = kv("vector_len", vector_len) + "_" + kv("algorithm", algorithm) + "_" + kv("style", style);
      break;
    case TaskFamily::ApproximateLoops:
      out = kv("n_loops", n_loops) + "_" + kv("n_ops", n_ops);
      break;
    case TaskFamily::FaultTolerant:
      out = kv("n_ops", n_ops) + "_" + kv("n_vars", n_vars) + "_" + kv("n_variants", n_variants);
      break;
  }
  const bool uses_ops = family == TaskFamily::StraightLine || family == TaskFamily::CriticalPath ||
                        family == TaskFamily::ParallelPaths || family == TaskFamily::FaultTolerant;
  if (uses_ops && !(op_subset == OpSubset{})) out += "_ops-" + op_subset.to_string();
  return out;
}

std::string GenParams::control_name() const {
  switch (family) {
    case TaskFamily::StraightLine:
    case TaskFamily::FaultTolerant:
      return family == TaskFamily::StraightLine ? "n_ops" : "n_variants";
    case TaskFamily::CriticalPath:
      return "path_len";
    case TaskFamily::ParallelPaths:
      return "n_paths";
    case TaskFamily::NestedLoops:
      return "depth";
    case TaskFamily::Sorting:
      return "vector_len";
    case TaskFamily::ApproximateLoops:
      return "n_loops";
  }
  return "";
}

std::int64_t GenParams::control_value() const {
  switch (family) {
    case TaskFamily::StraightLine:
      return n_ops;
    case TaskFamily::FaultTolerant:
      return n_variants;
    case TaskFamily::CriticalPath:
      return path_len;
    case TaskFamily::ParallelPaths:
      return n_paths;
    case TaskFamily::NestedLoops:
      return depth;
    case TaskFamily::Sorting:
      return vector_len;
    case TaskFamily::ApproximateLoops:
      return n_loops;
  }
  return 0;
}

void GenParams::set(std::string_view key, const nlohmann::json& value) {
  auto as_int = [&] {
    if (!value.is_number_integer()) throw InfeasibleParams("parameter '" + std::string(key) + "' must be an integer");
    return value.get<int>();
  };
  auto as_str = [&] {
    if (!value.is_string()) throw InfeasibleParams("parameter '" + std::string(key) + "' must be a string");
    return value.get<std::string>();
  };
  if (key == "n_ops") n_ops = as_int();
  else if (key == "n_vars") n_vars = as_int();
  else if (key == "path_len") path_len = as_int();
  else if (key == "n_paths") n_paths = as_int();
  else if (key == "depth") depth = as_int();
  else if (key == "vector_len") vector_len = as_int();
  else if (key == "n_variants") n_variants = as_int();
  else if (key == "n_loops") n_loops = as_int();
  else if (key == "n_goods") n_goods = as_int();
  else if (key == "n_distractors") n_distractors = as_int();
  else if (key == "ops" || key == "op_subset") op_subset = OpSubset::parse(as_str());
  else if (key == "algorithm") algorithm = as_str();
  else if (key == "style") style = as_str();
  else if (key == "seed") seed = value.get<std::uint64_t>();
  else throw InfeasibleParams("unknown parameter '" + std::string(key) + "'");
}

bool GenParams::paired() const {
  switch (family) {
    case TaskFamily::StraightLine:
    case TaskFamily::CriticalPath:
    case TaskFamily::ParallelPaths:
      return op_subset.add_sub && !op_subset.logic;
    case TaskFamily::NestedLoops:
    case TaskFamily::Sorting:
      return true;
    case TaskFamily::ApproximateLoops:
    case TaskFamily::FaultTolerant:
      return false;
  }
  return false;
}

std::string synthetic_question(const std::vector<VarId>& targets) {
  if (targets.size() == 1) return "What is the value of " + dsl::var_name(targets.front()) + " at the end?";
  std::string names;
  for (std::size_t i = 0; i < targets.size(); ++i) names += (i ? ", " : "") + dsl::var_name(targets[i]);
  return "What are the values of (" + names + ") at the end? Reply with a tuple in that order.";
}

std::string PairedInstance::call_input() const {
  if (family == TaskFamily::Sorting) return vector_text(sort_input) + ", " + std::to_string(sort_input.size());
  return "none";
}

PairedInstance generate_pair(const GenParams& params) {
  Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(params.family)}));
  PairedInstance inst;
  inst.family = params.family;
  inst.params = params;
  inst.seed = params.seed;
  inst.id = std::string(slug(params.family)) + "-" + hex_seed(params.seed);

  switch (params.family) {
    case TaskFamily::StraightLine: {
      require(params.n_ops >= 1 && params.n_vars >= 1, "n_ops and n_vars must be positive");
      if (params.paired()) {
        require(params.n_vars <= 20, "at most 20 agents");
        Exchange ex(rng, static_cast<std::size_t>(params.n_vars), 1);
        fill_exchanges(rng, ex, params.n_ops, params.op_subset.mov);
        ex.plan.targets = {{rng.index(ex.agents()), 0}};
        finish_program(inst, compile_plan(ex.plan), plan_targets(ex.plan));
        attach_plan(inst, std::move(ex.plan));
      } else {
        auto program = random_straight_line(rng, params.n_ops, params.n_vars, params.op_subset);
        const VarId target{rng.index(program.var_count)};
        finish_program(inst, std::move(program), {target});
      }
      break;
    }
    case TaskFamily::CriticalPath: {
      if (params.paired()) {
        auto plan = critical_plan(rng, params);
        auto program = compile_plan(plan);
        const auto targets = plan_targets(plan);
        if (dsl::critical_path_length(program, targets.front()) != static_cast<std::size_t>(params.path_len))
          throw std::logic_error("critical plan missed its path length");
        finish_program(inst, std::move(program), targets);
        attach_plan(inst, std::move(plan));
      } else {
        VarId target;
        auto program = random_critical_path(rng, params, target);
        if (dsl::critical_path_length(program, target) != static_cast<std::size_t>(params.path_len))
          throw std::logic_error("critical path generator missed its path length");
        finish_program(inst, std::move(program), {target});
      }
      break;
    }
    case TaskFamily::ParallelPaths: {
      require(params.n_paths >= 1 && params.n_paths <= 9, "n_paths must lie in [1, 9]");
      require(params.n_ops >= 1, "n_ops must be positive");
      if (params.paired()) {
        Exchange ex(rng, static_cast<std::size_t>(params.n_paths), 1);
        // Literal-quantity exchanges only: no data flows between agents.
        fill_exchanges(rng, ex, params.n_ops, false);
        for (std::size_t a = 0; a < ex.agents(); ++a) ex.plan.targets.emplace_back(a, 0);
        finish_program(inst, compile_plan(ex.plan), plan_targets(ex.plan));
        attach_plan(inst, std::move(ex.plan));
      } else {
        validate_subset(params.op_subset);
        constexpr std::size_t kGroupSize = 2;
        const auto k = static_cast<std::size_t>(params.n_paths);
        auto env = initial_values(rng, k * kGroupSize, params.op_subset);
        dsl::Program program{k * kGroupSize, initialise(env)};
        OpGenerator gen(rng, params.op_subset, env);
        std::vector<VarId> targets;
        for (std::size_t g = 0; g < k; ++g) targets.push_back(VarId{g * kGroupSize});
        for (int i = 0; i < params.n_ops; ++i) {
          const std::size_t g = rng.index(k);
          const std::vector<VarId> group{VarId{g * kGroupSize}, VarId{g * kGroupSize + 1}};
          program.body.emplace_back(gen.next(group));
        }
        finish_program(inst, std::move(program), targets);
      }
      break;
    }
    case TaskFamily::NestedLoops: {
      auto plan = recurring_plan(rng, params);
      finish_program(inst, compile_plan(plan), {VarId{0}});
      attach_plan(inst, std::move(plan));
      break;
    }
    case TaskFamily::Sorting:
      return generate_sorting(rng, std::move(inst));
    case TaskFamily::ApproximateLoops: {
      auto approx = approximate_instance(params.n_loops, params.n_ops, params.seed);
      approx.params = params;
      return approx;
    }
    case TaskFamily::FaultTolerant: {
      require(params.n_variants >= 2, "fault-tolerant prompts need at least two programs");
      // Some short programs admit too few rewrites; draw again until one yields enough.
      constexpr int kMaxDraws = 64;
      for (int draw = 0;; ++draw) {
        auto program = random_straight_line(rng, params.n_ops, params.n_vars, params.op_subset);
        const VarId target{rng.index(program.var_count)};
        std::vector<dsl::Program> variants;
        try {
          variants = equivalent_variants(program, target, params.n_variants,
                                         derive_seed(params.seed, {0xfa17, static_cast<std::uint64_t>(draw)}));
        } catch (const InfeasibleParams&) {
          if (draw + 1 < kMaxDraws) continue;
          throw;
        }
        for (const auto& v : variants) inst.variant_sources.push_back(dsl::render_source(v));
        finish_program(inst, std::move(program), {target});
        break;
      }
      break;
    }
  }
  return inst;
}

PairedInstance approximate_instance(int k, int n, std::uint64_t seed) {
  require(k >= 1 && k <= 9, "k must lie in [1, 9]");
  require(n >= 1, "n must be positive");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(TaskFamily::ApproximateLoops)}));
  PairedInstance inst;
  inst.family = TaskFamily::ApproximateLoops;
  inst.params = GenParams::defaults(TaskFamily::ApproximateLoops);
  inst.params.n_loops = k;
  inst.params.n_ops = n;
  inst.params.seed = seed;
  inst.seed = seed;
  inst.id = std::string(slug(inst.family)) + "-" + hex_seed(seed);

  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::int64_t> init(kk);
  for (auto& v : init) v = rng.uniform(0, kLiteralMax);
  dsl::Program program{kk, initialise(init)};
  std::vector<VarId> targets;
  for (std::size_t i = 0; i < kk; ++i) {
    const VarId acc{i};
    targets.push_back(acc);
    dsl::Loop loop{rng.uniform(2, 4), {}};
    for (int s = 0; s < n; ++s) {
      const auto lit = rng.uniform(1, kLiteralMax);
      if (rng.coin())
        loop.body.emplace_back(dsl::AddAssign{acc, lit});
      else
        loop.body.emplace_back(dsl::SubAssign{acc, lit});
    }
    program.body.emplace_back(std::move(loop));
  }
  finish_program(inst, std::move(program), targets);
  return inst;
}

std::string batch_filename(const GenParams& params, std::size_t n_instances, std::size_t batch) {
  return std::string(slug(params.family)) + "/" + params.label() + "_n_instances-" + std::to_string(n_instances) +
         "_batch-" + std::to_string(batch) + ".json";
}

}  // namespace codesim::taskgen
