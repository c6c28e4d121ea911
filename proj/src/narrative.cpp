#include <algorithm>
#include <numeric>
#include <sstream>

#include "codesim/error.hpp"
#include "codesim/taskgen.hpp"

namespace codesim::taskgen {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string quantity(std::int64_t n, const Good& good) {
  return std::to_string(n) + " " + (n == 1 ? good.singular : good.plural);
}

std::string points(std::int64_t n) { return std::to_string(n) + (n == 1 ? " point" : " points"); }

std::string has_verb(const Person& p) { return p.subject == "they" ? "have" : "has"; }

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::string ordinal(std::size_t n) {
  const auto mod100 = n % 100;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    switch (n % 10) {
      case 1:
        suffix = "st";
        break;
      case 2:
        suffix = "nd";
        break;
      case 3:
        suffix = "rd";
        break;
      default:
        break;
    }
  }
  return std::to_string(n) + suffix;
}

std::string sentence_list(const std::vector<std::string>& sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) out += (i ? " " : "") + sentences[i];
  return out;
}

std::string event_question(const EventPlan& plan) {
  if (plan.targets.size() == 1) {
    const auto [agent, good] = plan.targets.front();
    return "How many " + plan.goods[good].plural + " does " + plan.agents[agent].name + " have at the end?";
  }
  std::vector<std::string> names;
  for (const auto& [agent, good] : plan.targets) names.push_back(plan.agents[agent].name);
  const auto good = plan.targets.front().second;
  return "How many " + plan.goods[good].plural + " do " + join_names(names) +
         " each have at the end? Reply with a tuple in that order.";
}

std::string recurring_question(const RecurringPlan& plan) {
  return "How many points does " + plan.agent.name + " have at the end?";
}

std::string ranking_question(const RankingPlan& plan) {
  return "Which object is the " + ordinal(plan.k) + (plan.heaviest ? " heaviest?" : " lightest?");
}

}  // namespace

dsl::Program compile_plan(const EventPlan& plan) {
  using namespace dsl;
  Program p{plan.agents.size() * plan.goods.size(), {}};
  for (std::size_t a = 0; a < plan.agents.size(); ++a)
    for (std::size_t g = 0; g < plan.goods.size(); ++g) p.body.emplace_back(Init{plan.var(a, g), plan.initial[a][g]});
  for (const auto& event : plan.events) {
    std::visit(overloaded{
                   [&](const Give& e) {
                     p.body.emplace_back(SubAssign{plan.var(e.from, e.good), e.qty});
                     p.body.emplace_back(AddAssign{plan.var(e.to, e.good), e.qty});
                   },
                   [&](const Acquire& e) { p.body.emplace_back(AddAssign{plan.var(e.agent, e.good), e.qty}); },
                   [&](const Lose& e) { p.body.emplace_back(SubAssign{plan.var(e.agent, e.good), e.qty}); },
                   [&](const GiveAll& e) {
                     p.body.emplace_back(AddAssign{plan.var(e.to, e.good), plan.var(e.from, e.good)});
                     p.body.emplace_back(Init{plan.var(e.from, e.good), 0});
                   },
               },
               event);
  }
  return p;
}

dsl::Program compile_plan(const RecurringPlan& plan) {
  using namespace dsl;
  const VarId acc{0};
  Program p{1, {}};
  p.body.emplace_back(Init{acc, 0});
  std::vector<Node> inner;
  for (std::size_t level = plan.levels.size(); level-- > 0;) {
    const auto& lv = plan.levels[level];
    std::vector<Node> body;
    for (auto d : lv.deltas) {
      if (d >= 0)
        body.emplace_back(AddAssign{acc, d});
      else
        body.emplace_back(SubAssign{acc, -d});
    }
    for (auto& n : inner) body.push_back(std::move(n));
    inner.clear();
    inner.emplace_back(Loop{lv.count, std::move(body)});
  }
  for (auto& n : inner) p.body.push_back(std::move(n));
  return p;
}

Answer simulate_plan(const EventPlan& plan) {
  auto held = plan.initial;
  for (const auto& event : plan.events) {
    std::visit(overloaded{
                   [&](const Give& e) {
                     held[e.from][e.good] -= e.qty;
                     held[e.to][e.good] += e.qty;
                   },
                   [&](const Acquire& e) { held[e.agent][e.good] += e.qty; },
                   [&](const Lose& e) { held[e.agent][e.good] -= e.qty; },
                   [&](const GiveAll& e) {
                     held[e.to][e.good] += held[e.from][e.good];
                     held[e.from][e.good] = 0;
                   },
               },
               event);
  }
  if (plan.targets.size() == 1) {
    const auto [a, g] = plan.targets.front();
    return Answer::integer(held[a][g]);
  }
  std::vector<std::int64_t> values;
  for (const auto& [a, g] : plan.targets) values.push_back(held[a][g]);
  return Answer::tuple(std::move(values));
}

Answer simulate_plan(const RecurringPlan& plan) {
  std::int64_t total = 0;
  std::int64_t repetitions = 1;
  for (const auto& lv : plan.levels) {
    repetitions *= lv.count;
    total += repetitions * std::accumulate(lv.deltas.begin(), lv.deltas.end(), std::int64_t{0});
  }
  return Answer::integer(total);
}

Answer simulate_plan(const RankingPlan& plan) {
  // Repeated extremum selection over the remaining objects.
  std::vector<bool> taken(plan.objects.size(), false);
  std::size_t chosen = 0;
  for (std::size_t round = 0; round < plan.k; ++round) {
    bool found = false;
    for (std::size_t i = 0; i < plan.objects.size(); ++i) {
      if (taken[i]) continue;
      const bool better = plan.heaviest ? plan.weights[i] > plan.weights[chosen] : plan.weights[i] < plan.weights[chosen];
      if (!found || better) {
        chosen = i;
        found = true;
      }
    }
    if (!found) throw InfeasibleParams("ranking asks for more objects than exist");
    taken[chosen] = true;
  }
  return Answer::label(plan.objects[chosen]);
}

std::string render_event(const EventPlan& plan, const Event& event) {
  const bool single_good = plan.goods.size() == 1;
  return std::visit(overloaded{
                        [&](const Give& e) {
                          return plan.agents[e.from].name + " gives " + plan.agents[e.to].name + " " +
                                 quantity(e.qty, plan.goods[e.good]) + ".";
                        },
                        [&](const Acquire& e) {
                          return plan.agents[e.agent].name + " buys " + quantity(e.qty, plan.goods[e.good]) + ".";
                        },
                        [&](const Lose& e) {
                          return plan.agents[e.agent].name + " loses " + quantity(e.qty, plan.goods[e.good]) + ".";
                        },
                        [&](const GiveAll& e) {
                          const auto& from = plan.agents[e.from];
                          if (single_good)
                            return from.name + " gives " + plan.agents[e.to].name + " everything " + from.subject +
                                   " " + has_verb(from) + ".";
                          return from.name + " gives " + plan.agents[e.to].name + " all " + from.possessive + " " +
                                 plan.goods[e.good].plural + ".";
                        },
                    },
                    event);
}

std::string narrate(const EventPlan& plan) {
  std::vector<std::string> sentences;
  for (std::size_t a = 0; a < plan.agents.size(); ++a) {
    std::vector<std::string> parts;
    for (std::size_t g = 0; g < plan.goods.size(); ++g) parts.push_back(quantity(plan.initial[a][g], plan.goods[g]));
    sentences.push_back(plan.agents[a].name + " " + has_verb(plan.agents[a]) + " " + join_names(parts) + ".");
  }
  for (const auto& e : plan.events) sentences.push_back(render_event(plan, e));
  return sentence_list(sentences);
}

std::string narrate(const RecurringPlan& plan) {
  std::vector<std::string> sentences;
  const auto& name = plan.agent.name;
  sentences.push_back(name + " keeps a tally of points, starting at 0.");
  if (!plan.levels.empty())
    sentences.push_back("This goes on for " + std::to_string(plan.levels[0].count) + " " + plan.levels[0].unit + "s.");
  for (std::size_t i = 0; i < plan.levels.size(); ++i) {
    const auto& lv = plan.levels[i];
    if (!lv.deltas.empty()) {
      std::vector<std::string> actions;
      for (auto d : lv.deltas) actions.push_back((d >= 0 ? "gains " : "loses ") + points(d >= 0 ? d : -d));
      std::string joined;
      for (std::size_t a = 0; a < actions.size(); ++a) joined += (a ? ", then " : "") + actions[a];
      sentences.push_back("In every " + lv.unit + ", " + name + " " + joined + ".");
    }
    if (i + 1 < plan.levels.size()) {
      const auto& next = plan.levels[i + 1];
      sentences.push_back("Every " + lv.unit + " consists of " + std::to_string(next.count) + " " + next.unit + "s.");
    }
  }
  for (const auto& d : plan.distractors) sentences.push_back(d);
  return sentence_list(sentences);
}

std::string narrate(const RankingPlan& plan) {
  std::vector<std::string> sentences;
  sentences.push_back("There are " + std::to_string(plan.objects.size()) + " objects on a table.");
  for (std::size_t i = 0; i < plan.objects.size(); ++i) {
    sentences.push_back("The " + plan.objects[i] + " weighs " + std::to_string(plan.weights[i]) + " kg.");
  }
  return sentence_list(sentences);
}

std::string naturalistic_question(const Plan& plan) {
  return std::visit(overloaded{
                        [](const std::monostate&) { return std::string(); },
                        [](const EventPlan& p) { return event_question(p); },
                        [](const RecurringPlan& p) { return recurring_question(p); },
                        [](const RankingPlan& p) { return ranking_question(p); },
                    },
                    plan);
}

std::string render_naturalistic(const EventPlan& plan) { return narrate(plan) + "\n" + event_question(plan); }
std::string render_naturalistic(const RecurringPlan& plan) { return narrate(plan) + "\n" + recurring_question(plan); }
std::string render_naturalistic(const RankingPlan& plan) { return narrate(plan) + "\n" + ranking_question(plan); }

}  // namespace codesim::taskgen
