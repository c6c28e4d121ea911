#include "codesim/error.hpp"
#include "codesim/taskgen.hpp"

namespace codesim::taskgen {

using nlohmann::json;

void to_json(json& j, const GenParams& p) {
  j = json{{"family", slug(p.family)}, {"seed", p.seed}};
  switch (p.family) {
    case TaskFamily::StraightLine:
      j["n_ops"] = p.n_ops;
      j["n_vars"] = p.n_vars;
      break;
    case TaskFamily::CriticalPath:
      j["n_ops"] = p.n_ops;
      j["n_vars"] = p.n_vars;
      j["path_len"] = p.path_len;
      j["n_goods"] = p.n_goods;
      break;
    case TaskFamily::ParallelPaths:
      j["n_ops"] = p.n_ops;
      j["n_paths"] = p.n_paths;
      break;
    case TaskFamily::NestedLoops:
      j["depth"] = p.depth;
      j["n_ops"] = p.n_ops;
      j["n_distractors"] = p.n_distractors;
      break;
    case TaskFamily::Sorting:
      j["vector_len"] = p.vector_len;
      j["algorithm"] = p.algorithm;
      j["style"] = p.style;
      break;
    case TaskFamily::ApproximateLoops:
      j["n_loops"] = p.n_loops;
      j["n_ops"] = p.n_ops;
      break;
    case TaskFamily::FaultTolerant:
      j["n_ops"] = p.n_ops;
      j["n_vars"] = p.n_vars;
      j["n_variants"] = p.n_variants;
      break;
  }
  if (!(p.op_subset == OpSubset{})) j["ops"] = p.op_subset.to_string();
}

void from_json(const json& j, GenParams& p) {
  p = GenParams::defaults(family_from_slug(j.at("family").get<std::string>()));
  for (const auto& [key, value] : j.items())
    if (key != "family") p.set(key, value);
}

namespace {

json person_json(const Person& p) { return {p.name, p.subject, p.possessive}; }
Person person_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

json plan_json(const Plan& plan) {
  if (const auto* e = std::get_if<EventPlan>(&plan)) {
    json agents = json::array(), goods = json::array(), events = json::array(), targets = json::array();
    for (const auto& a : e->agents) agents.push_back(person_json(a));
    for (const auto& g : e->goods) goods.push_back({g.singular, g.plural});
    for (const auto& [a, g] : e->targets) targets.push_back({a, g});
    for (const auto& ev : e->events) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Give>)
              events.push_back({{"give", {x.from, x.to, x.good, x.qty}}});
            else if constexpr (std::is_same_v<T, Acquire>)
              events.push_back({{"acquire", {x.agent, x.good, x.qty}}});
            else if constexpr (std::is_same_v<T, Lose>)
              events.push_back({{"lose", {x.agent, x.good, x.qty}}});
            else
              events.push_back({{"give_all", {x.from, x.to, x.good}}});
          },
          ev);
    }
    return {{"kind", "exchange"}, {"agents", agents},  {"goods", goods},
            {"initial", e->initial}, {"events", events}, {"targets", targets}};
  }
  if (const auto* r = std::get_if<RecurringPlan>(&plan)) {
    json levels = json::array();
    for (const auto& lv : r->levels) levels.push_back({{"unit", lv.unit}, {"count", lv.count}, {"deltas", lv.deltas}});
    return {{"kind", "recurring"}, {"agent", person_json(r->agent)}, {"levels", levels}, {"distractors", r->distractors}};
  }
  if (const auto* k = std::get_if<RankingPlan>(&plan))
    return {{"kind", "ranking"}, {"objects", k->objects}, {"weights", k->weights}, {"k", k->k}, {"heaviest", k->heaviest}};
  return nullptr;
}

Plan plan_from(const json& j) {
  if (j.is_null()) return std::monostate{};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "exchange") {
    EventPlan e;
    for (const auto& a : j.at("agents")) e.agents.push_back(person_from(a));
    for (const auto& g : j.at("goods")) e.goods.push_back({g.at(0), g.at(1)});
    e.initial = j.at("initial").get<std::vector<std::vector<std::int64_t>>>();
    for (const auto& t : j.at("targets")) e.targets.emplace_back(t.at(0), t.at(1));
    for (const auto& ev : j.at("events")) {
      const auto& [name, v] = *ev.items().begin();
      if (name == "give")
        e.events.push_back(Give{v.at(0), v.at(1), v.at(2), v.at(3)});
      else if (name == "acquire")
        e.events.push_back(Acquire{v.at(0), v.at(1), v.at(2)});
      else if (name == "lose")
        e.events.push_back(Lose{v.at(0), v.at(1), v.at(2)});
      else if (name == "give_all")
        e.events.push_back(GiveAll{v.at(0), v.at(1), v.at(2)});
      else
        throw ParseError("unknown event '" + name + "'");
    }
    return e;
  }
  if (kind == "recurring") {
    RecurringPlan r;
    r.agent = person_from(j.at("agent"));
    for (const auto& lv : j.at("levels"))
      r.levels.push_back({lv.at("unit"), lv.at("count"), lv.at("deltas").get<std::vector<std::int64_t>>()});
    r.distractors = j.at("distractors").get<std::vector<std::string>>();
    return r;
  }
  if (kind == "ranking") {
    RankingPlan k;
    k.objects = j.at("objects").get<std::vector<std::string>>();
    k.weights = j.at("weights").get<std::vector<std::int64_t>>();
    k.k = j.at("k");
    k.heaviest = j.at("heaviest");
    return k;
  }
  throw ParseError("unknown plan kind '" + kind + "'");
}

}  // namespace

json instance_to_json(const PairedInstance& inst) {
  json targets = json::array();
  for (auto t : inst.targets) targets.push_back(t.index);
  json j{{"id", inst.id},
         {"family", slug(inst.family)},
         {"params", inst.params},
         {"seed", inst.seed},
         {"targets", targets},
         {"synthetic_source", inst.synthetic_source},
         {"synthetic_question", inst.synthetic_question},
         {"naturalistic_text", inst.naturalistic_text},
         {"naturalistic_question", inst.naturalistic_question},
         {"ground_truth", inst.ground_truth},
         {"plan", plan_json(inst.plan)}};
  if (inst.naturalistic_truth) j["naturalistic_truth"] = *inst.naturalistic_truth;
  if (!inst.sort_input.empty()) j["sort_input"] = inst.sort_input;
  if (!inst.variant_sources.empty()) j["variant_sources"] = inst.variant_sources;
  return j;
}

PairedInstance instance_from_json(const json& j) {
  PairedInstance inst;
  inst.id = j.at("id");
  inst.family = family_from_slug(j.at("family").get<std::string>());
  inst.params = j.at("params").get<GenParams>();
  inst.seed = j.at("seed");
  for (const auto& t : j.at("targets")) inst.targets.push_back(dsl::VarId{t.get<std::size_t>()});
  inst.synthetic_source = j.at("synthetic_source");
  inst.synthetic_question = j.at("synthetic_question");
  inst.naturalistic_text = j.value("naturalistic_text", "");
  inst.naturalistic_question = j.value("naturalistic_question", "");
  inst.ground_truth = j.at("ground_truth").get<Answer>();
  if (j.contains("naturalistic_truth")) inst.naturalistic_truth = j.at("naturalistic_truth").get<Answer>();
  if (j.contains("sort_input")) inst.sort_input = j.at("sort_input").get<std::vector<std::int64_t>>();
  if (j.contains("variant_sources")) inst.variant_sources = j.at("variant_sources").get<std::vector<std::string>>();
  inst.plan = plan_from(j.value("plan", json()));
  if (inst.family != TaskFamily::Sorting) inst.program = dsl::parse_source(inst.synthetic_source);
  return inst;
}

}  // namespace codesim::taskgen
