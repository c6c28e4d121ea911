#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "codesim/algolib.hpp"
#include "codesim/dsl.hpp"
#include "codesim/error.hpp"
#include "codesim/harness.hpp"
#include "codesim/metrics.hpp"
#include "codesim/prompting.hpp"
#include "codesim/taskgen.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Structured values cross the boundary as plain dicts and lists via the json module.
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

codesim::dsl::VarId var_from_name(const std::string& name) {
  if (name.size() < 2 || name[0] != 'a') throw codesim::ParseError("expected a variable such as a0, got '" + name + "'");
  return codesim::dsl::VarId{std::stoul(name.substr(1))};
}

py::dict final_values(const codesim::dsl::Env& env) {
  py::dict out;
  for (std::size_t i = 0; i < env.size(); ++i)
    if (auto v = env.get(codesim::dsl::VarId{i})) out[py::str(codesim::dsl::var_name(codesim::dsl::VarId{i}))] = *v;
  return out;
}

codesim::metrics::Outcome outcome(const py::handle& pred, const py::handle& truth) {
  codesim::metrics::Outcome o;
  o.truth = from_py(truth).get<codesim::Answer>();
  if (!pred.is_none()) o.prediction = from_py(pred).get<codesim::Answer>();
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Program-simulation benchmark core";

  auto base = py::register_exception<codesim::Error>(m, "CodesimError", PyExc_RuntimeError);
  py::register_exception<codesim::StepLimitExceeded>(m, "StepLimitExceeded", base);
  py::register_exception<codesim::UninitialisedRead>(m, "UninitialisedRead", base);
  py::register_exception<codesim::NotStraightLine>(m, "NotStraightLine", base);
  py::register_exception<codesim::ParseError>(m, "ParseError", base);
  py::register_exception<codesim::IntegerOverflow>(m, "IntegerOverflow", base);
  py::register_exception<codesim::InfeasibleParams>(m, "InfeasibleParams", base);
  py::register_exception<codesim::UnknownIdentifier>(m, "UnknownIdentifier", base);
  py::register_exception<codesim::UnknownAlgorithm>(m, "UnknownAlgorithm", base);
  py::register_exception<codesim::StyleMismatch>(m, "StyleMismatch", base);
  py::register_exception<codesim::EmptyInput>(m, "EmptyInput", base);
  py::register_exception<codesim::LengthMismatch>(m, "LengthMismatch", base);
  py::register_exception<codesim::ConfigError>(m, "ConfigError", base);
  py::register_exception<codesim::FixtureMissing>(m, "FixtureMissing", base);
  py::register_exception<codesim::IoError>(m, "IoError", base);

  // dsl
  m.def(
      "run_program",
      [](const std::string& source) { return final_values(codesim::dsl::run(codesim::dsl::parse_source(source))); },
      py::arg("source"), "Execute a program and return the final value of every written variable.");
  m.def(
      "normalise_source",
      [](const std::string& source) { return codesim::dsl::render_source(codesim::dsl::parse_source(source)); },
      py::arg("source"), "Parse and re-render a program in canonical form.");
  m.def(
      "backward_slice",
      [](const std::string& source, const std::string& target) {
        const auto p = codesim::dsl::parse_source(source);
        const auto s = codesim::dsl::backward_slice(p, var_from_name(target));
        return std::vector<std::size_t>(s.begin(), s.end());
      },
      py::arg("source"), py::arg("target"), "Top-level statement indices the target depends on.");
  m.def(
      "critical_path_length",
      [](const std::string& source, const std::string& target) {
        return codesim::dsl::critical_path_length(codesim::dsl::parse_source(source), var_from_name(target));
      },
      py::arg("source"), py::arg("target"));

  // taskgen
  m.def("families", [] {
    std::vector<std::string> out;
    for (auto f : codesim::taskgen::kAllFamilies) out.emplace_back(codesim::taskgen::slug(f));
    return out;
  });
  m.def(
      "default_params",
      [](const std::string& family) {
        return to_py(json(codesim::taskgen::GenParams::defaults(codesim::taskgen::family_from_slug(family))));
      },
      py::arg("family"));
  m.def(
      "generate",
      [](const py::dict& params) {
        return to_py(codesim::taskgen::instance_to_json(
            codesim::taskgen::generate_pair(from_py(params).get<codesim::taskgen::GenParams>())));
      },
      py::arg("params"), "Generate one paired instance from a parameter dict.");

  // algolib
  m.def("corpus", [] { return to_py(codesim::algolib::corpus_to_json()); });
  m.def(
      "oracle_run",
      [](const std::string& oracle_id, const py::object& input) -> py::object {
        codesim::algolib::Value in;
        if (py::isinstance<py::int_>(input))
          in = input.cast<std::int64_t>();
        else
          in = input.cast<std::vector<std::int64_t>>();
        const auto out = codesim::algolib::oracle_run(oracle_id, in);
        if (auto* i = std::get_if<std::int64_t>(&out)) return py::int_(*i);
        return py::cast(std::get<std::vector<std::int64_t>>(out));
      },
      py::arg("oracle_id"), py::arg("input"));

  // prompting
  m.def("cosm_template", [] { return std::string(codesim::prompting::cosm_template()); });
  m.def(
      "build_prompt",
      [](const py::dict& instance, const std::string& rendering, const std::string& style) {
        const auto inst = codesim::taskgen::instance_from_json(from_py(instance));
        const auto b = codesim::prompting::build_prompt(inst, codesim::prompting::rendering_from_string(rendering),
                                                        codesim::prompting::style_from_string(style));
        py::dict out;
        out["user_text"] = b.user_text;
        out["answer_format"] = std::string(codesim::to_string(b.answer_format));
        out["instance_id"] = b.instance_id;
        out["style"] = std::string(codesim::prompting::to_string(b.style));
        return out;
      },
      py::arg("instance"), py::arg("rendering") = "synthetic", py::arg("style") = "cot");

  // metrics
  m.def(
      "extract_answer",
      [](const std::string& response, const std::string& kind) -> py::object {
        auto e = codesim::metrics::extract_answer(response, codesim::answer_kind_from_string(kind));
        if (!e) return py::none();
        return to_py(json(e->answer));
      },
      py::arg("response"), py::arg("kind"), "Pull the final answer out of a model response, or None.");
  m.def(
      "accuracy",
      [](const py::list& predicted, const py::list& truth) {
        if (predicted.size() != truth.size()) throw codesim::LengthMismatch("predicted and truth differ in length");
        std::vector<codesim::metrics::Outcome> outcomes;
        for (std::size_t i = 0; i < truth.size(); ++i) outcomes.push_back(outcome(predicted[i], truth[i]));
        return codesim::metrics::accuracy(outcomes);
      },
      py::arg("predicted"), py::arg("truth"));
  m.def(
      "levenshtein_similarity",
      [](const std::vector<std::int64_t>& pred, const std::vector<std::int64_t>& truth) {
        return codesim::metrics::levenshtein_similarity(pred, truth);
      },
      py::arg("pred"), py::arg("truth"));
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) { return codesim::metrics::pearson(x, y); },
      py::arg("x"), py::arg("y"));

  // harness
  m.def(
      "run_experiments",
      [](const py::dict& config) {
        const auto cfg = from_py(config).get<codesim::harness::RunConfig>();
        std::vector<codesim::harness::RunRecord> records;
        {
          py::gil_scoped_release release;
          records = codesim::harness::run(cfg);
        }
        return to_py(json(records));
      },
      py::arg("config"), "Run a configuration and return its records.");
  m.def(
      "score",
      [](const py::list& records) {
        const auto recs = from_py(records).get<std::vector<codesim::harness::RunRecord>>();
        return to_py(codesim::harness::summary_to_json(codesim::harness::score(recs)));
      },
      py::arg("records"));
}
