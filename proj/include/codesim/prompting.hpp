#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codesim/algolib.hpp"
#include "codesim/answer.hpp"
#include "codesim/dsl.hpp"
#include "codesim/taskgen.hpp"

namespace codesim::prompting {

enum class PromptStyle { Direct, CoT, CoSm, FaultTolerantMulti, MemorisationProbe };
enum class Rendering { Synthetic, Naturalistic };

std::string_view to_string(PromptStyle style);
PromptStyle style_from_string(std::string_view text);
std::string_view to_string(Rendering rendering);
Rendering rendering_from_string(std::string_view text);

inline constexpr std::string_view kCotInstruction = "Think step by step and reply with the final answer.";

struct PromptBundle {
  std::string user_text;
  AnswerKind answer_format = AnswerKind::Int;
  std::string instance_id;
  PromptStyle style = PromptStyle::Direct;
  /// Memorisation probes only: the withheld part of the source.
  std::optional<std::string> held_out;
};

/// The chain-of-simulation template with its `@code@` and `@input@` slots.
std::string_view cosm_template();
std::string render_cosm(std::string_view code, std::string_view input);

/// Instruction asking the model to finish with `Answer: <value>`.
std::string answer_instruction(AnswerKind kind);

/// Throws StyleMismatch when the style cannot be applied to the rendering.
PromptBundle build_prompt(const taskgen::PairedInstance& instance, Rendering rendering, PromptStyle style);

/// Concatenates equivalent programs and asks for their common result.
/// `reasoning` is Direct or CoT. Throws StyleMismatch for fewer than two
/// programs.
PromptBundle build_fault_tolerant(const std::vector<dsl::Program>& variants, dsl::VarId target,
                                  PromptStyle reasoning = PromptStyle::CoT);
PromptBundle build_fault_tolerant(const std::vector<std::string>& variant_sources, dsl::VarId target,
                                  PromptStyle reasoning = PromptStyle::CoT);

/// Splits the source at the line boundary nearest `truncate_fraction` and asks
/// for the continuation.
PromptBundle build_memorisation_probe(const algolib::AlgorithmEntry& entry, double truncate_fraction);

}  // namespace codesim::prompting
