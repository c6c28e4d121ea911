#include "codesim/prompting.hpp"

#include <algorithm>
#include <cmath>

#include "assets.hpp"
#include "codesim/error.hpp"

namespace codesim::prompting {

namespace {

using taskgen::TaskFamily;

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
    text.replace(pos, from.size(), to);
  return text;
}

std::string with_newline(std::string text) {
  if (!text.empty() && text.back() != '\n') text += '\n';
  return text;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) out += lines[i] + "\n";
  return out;
}

std::string finish(std::string body, std::string_view question, PromptStyle reasoning, AnswerKind kind) {
  body = with_newline(std::move(body));
  if (!question.empty()) body += std::string(question) + "\n";
  if (reasoning == PromptStyle::CoT) body += std::string(kCotInstruction) + "\n";
  return body + answer_instruction(kind);
}

}  // namespace

std::string_view to_string(PromptStyle style) {
  switch (style) {
    case PromptStyle::Direct:
      return "direct";
    case PromptStyle::CoT:
      return "cot";
    case PromptStyle::CoSm:
      return "cosm";
    case PromptStyle::FaultTolerantMulti:
      return "fault_tolerant_multi";
    case PromptStyle::MemorisationProbe:
      return "memorisation_probe";
  }
  return "direct";
}

PromptStyle style_from_string(std::string_view text) {
  for (auto s : {PromptStyle::Direct, PromptStyle::CoT, PromptStyle::CoSm, PromptStyle::FaultTolerantMulti,
                 PromptStyle::MemorisationProbe})
    if (to_string(s) == text) return s;
  throw ConfigError("unknown prompt style '" + std::string(text) + "'");
}

std::string_view to_string(Rendering rendering) {
  return rendering == Rendering::Synthetic ? "synthetic" : "naturalistic";
}

Rendering rendering_from_string(std::string_view text) {
  if (text == "synthetic") return Rendering::Synthetic;
  if (text == "naturalistic") return Rendering::Naturalistic;
  throw ConfigError("unknown rendering '" + std::string(text) + "'");
}

std::string_view cosm_template() { return detail::asset("prompts/cosm.txt"); }

std::string render_cosm(std::string_view code, std::string_view input) {
  // Substitute the input first so code containing "@input@" is left intact.
  std::string tpl(cosm_template());
  tpl = replace_all(std::move(tpl), "@input@", input);
  const auto pos = tpl.find("@code@");
  std::string code_text(code);
  while (!code_text.empty() && code_text.back() == '\n') code_text.pop_back();
  return tpl.replace(pos, 6, code_text);
}

std::string answer_instruction(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::Int:
      return "End your reply with a line of the form \"Answer: <integer>\".";
    case AnswerKind::Sequence:
      return "End your reply with a line of the form \"Answer: [x1, x2, ...]\".";
    case AnswerKind::Tuple:
      return "End your reply with a line of the form \"Answer: (x1, x2, ...)\".";
    case AnswerKind::Label:
      return "End your reply with a line of the form \"Answer: <object name>\".";
  }
  return {};
}

PromptBundle build_prompt(const taskgen::PairedInstance& instance, Rendering rendering, PromptStyle style) {
  const bool naturalistic = rendering == Rendering::Naturalistic;
  if (naturalistic && !instance.has_naturalistic())
    throw StyleMismatch("instance " + instance.id + " has no naturalistic rendering");
  if (style == PromptStyle::MemorisationProbe)
    throw StyleMismatch("memorisation probes are built from algorithm entries");
  if (style == PromptStyle::CoSm && naturalistic) throw StyleMismatch("CoSm applies only to code renderings");
  if (style == PromptStyle::FaultTolerantMulti) {
    if (instance.family != TaskFamily::FaultTolerant || naturalistic)
      throw StyleMismatch("fault-tolerant prompts need a fault-tolerant synthetic instance");
    auto bundle = build_fault_tolerant(instance.variant_sources, instance.targets.front(), PromptStyle::CoT);
    bundle.instance_id = instance.id;
    return bundle;
  }

  PromptBundle bundle;
  bundle.instance_id = instance.id;
  bundle.style = style;
  bundle.answer_format = instance.truth_for(naturalistic).kind;
  if (naturalistic) {
    bundle.user_text = finish(instance.naturalistic_text, instance.naturalistic_question, style, bundle.answer_format);
  } else if (style == PromptStyle::CoSm) {
    // Sorting routines carry their call in the template; DSL snippets take no
    // input, so their question follows the template.
    const bool sorting = instance.family == TaskFamily::Sorting;
    const auto block = render_cosm(instance.synthetic_source, instance.call_input());
    bundle.user_text = finish(block, sorting ? "" : instance.synthetic_question, style, bundle.answer_format);
  } else {
    bundle.user_text = finish(instance.synthetic_source, instance.synthetic_question, style, bundle.answer_format);
  }
  return bundle;
}

PromptBundle build_fault_tolerant(const std::vector<std::string>& variant_sources, dsl::VarId target,
                                  PromptStyle reasoning) {
  if (variant_sources.size() < 2) throw StyleMismatch("fault-tolerant prompts need at least two programs");
  if (reasoning != PromptStyle::Direct && reasoning != PromptStyle::CoT)
    throw StyleMismatch("fault-tolerant reasoning must be direct or cot");
  std::string body;
  for (std::size_t i = 0; i < variant_sources.size(); ++i) {
    body += "# Program " + std::to_string(i + 1) + "\n" + with_newline(variant_sources[i]);
    if (i + 1 < variant_sources.size()) body += "\n";
  }
  body += "\nThe " + std::to_string(variant_sources.size()) +
          " programs above are equivalent. Execute all of them and demonstrate they yield the same result.\n";
  PromptBundle bundle;
  bundle.style = PromptStyle::FaultTolerantMulti;
  bundle.answer_format = AnswerKind::Int;
  bundle.user_text = finish(body, taskgen::synthetic_question({target}), reasoning, AnswerKind::Int);
  return bundle;
}

PromptBundle build_fault_tolerant(const std::vector<dsl::Program>& variants, dsl::VarId target,
                                  PromptStyle reasoning) {
  std::vector<std::string> sources;
  for (const auto& p : variants) sources.push_back(dsl::render_source(p));
  return build_fault_tolerant(sources, target, reasoning);
}

PromptBundle build_memorisation_probe(const algolib::AlgorithmEntry& entry, double truncate_fraction) {
  if (!(truncate_fraction > 0.0 && truncate_fraction < 1.0))
    throw InfeasibleParams("truncate fraction must lie in (0, 1)");
  const auto lines = split_lines(entry.source_text);
  if (lines.size() < 4) throw InfeasibleParams("memorisation probes need a source of at least four lines");
  auto cut = static_cast<std::size_t>(std::lround(truncate_fraction * static_cast<double>(lines.size())));
  cut = std::clamp<std::size_t>(cut, 1, lines.size() - 1);

  PromptBundle bundle;
  bundle.style = PromptStyle::MemorisationProbe;
  bundle.answer_format = AnswerKind::Label;
  bundle.instance_id = "memorisation/" + entry.oracle_id;
  bundle.user_text = "Complete the following Python code. Reply with the remaining lines only.\n\n" +
                     join_lines(lines, 0, cut);
  bundle.held_out = join_lines(lines, cut, lines.size());
  return bundle;
}

}  // namespace codesim::prompting
