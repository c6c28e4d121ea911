#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace codesim::dsl {

/// Variable handle, rendered as `a<index>`.
struct VarId {
  std::size_t index = 0;
  auto operator<=>(const VarId&) const = default;
};

std::string var_name(VarId v);

using Operand = std::variant<VarId, std::int64_t>;

struct Init {
  VarId var;
  std::int64_t value = 0;
};
/// `a0 = a1 = a2 = 1`
struct MultiInit {
  std::vector<VarId> vars;
  std::int64_t value = 0;
};
struct Assign {
  VarId dst;
  VarId src;
};
struct AddAssign {
  VarId dst;
  Operand src;
};
struct SubAssign {
  VarId dst;
  Operand src;
};
/// Logical and/or: operands are truthy, results are always 0 or 1.
struct AndAssign {
  VarId dst;
  VarId src;
};
struct OrAssign {
  VarId dst;
  VarId src;
};

using Statement = std::variant<Init, MultiInit, Assign, AddAssign, SubAssign, AndAssign, OrAssign>;

bool is_initialisation(const Statement& s);
/// Variables written by the statement.
std::vector<VarId> defs(const Statement& s);
/// Variables read by the statement (compound assignments read their target).
std::vector<VarId> uses(const Statement& s);
/// True when the statement overwrites its targets without reading them.
bool kills(const Statement& s);

struct Node;

/// Constant-bound loop; `for _ in range(count):`.
struct Loop {
  std::int64_t count = 1;
  std::vector<Node> body;
};

struct Node {
  std::variant<Statement, Loop> value;

  Node(Statement s) : value(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  Node(Loop l) : value(std::move(l)) {}       // NOLINT(google-explicit-constructor)

  bool is_loop() const { return std::holds_alternative<Loop>(value); }
  const Statement& statement() const { return std::get<Statement>(value); }
  const Loop& loop() const { return std::get<Loop>(value); }
};

struct Program {
  std::size_t var_count = 0;
  std::vector<Node> body;

  bool is_straight_line() const;
  /// Maximum loop nesting depth; 0 for straight-line code.
  std::size_t loop_depth() const;
  /// Statements in pre-order; the position in this list is the statement index.
  std::vector<const Statement*> statements() const;
  /// Length of the leading run of initialisations (the declaration line).
  std::size_t declaration_count() const;
  /// Statements after the declarations; a later `a0=0` reset is an operation.
  std::size_t operation_count() const;
};

/// Machine state. Slots are empty until a variable is first written.
class Env {
 public:
  Env() = default;
  explicit Env(std::size_t var_count) : slots_(var_count) {}

  std::size_t size() const { return slots_.size(); }
  bool defined(VarId v) const { return v.index < slots_.size() && slots_[v.index].has_value(); }
  /// Throws UninitialisedRead for unwritten or undeclared variables.
  std::int64_t at(VarId v) const;
  std::optional<std::int64_t> get(VarId v) const;
  void set(VarId v, std::int64_t value);

  const std::vector<std::optional<std::int64_t>>& slots() const { return slots_; }

  bool operator==(const Env&) const = default;

 private:
  std::vector<std::optional<std::int64_t>> slots_;
};

struct TraceStep {
  std::size_t statement_index = 0;
  Env env;
  bool operator==(const TraceStep&) const = default;
};

using Trace = std::vector<TraceStep>;

struct Execution {
  Env final;
  Trace trace;
};

inline constexpr std::uint64_t kDefaultStepLimit = 1'000'000;

/// Runs the program with sequential big-step semantics. Throws
/// StepLimitExceeded, UninitialisedRead or IntegerOverflow.
Execution execute(const Program& program, std::uint64_t step_limit = kDefaultStepLimit);

/// Same semantics as execute() without recording a trace.
Env run(const Program& program, std::uint64_t step_limit = kDefaultStepLimit);

/// Python surface syntax: leading initialisations share one line separated by
/// `; `, every other statement gets its own line, loop bodies indent by four.
std::string render_source(const Program& program);
std::string render_statement(const Statement& s);

/// Parses the subset of Python emitted by render_source. Throws ParseError.
Program parse_source(std::string_view text);

/// Indices (into the top-level body) of the statements the final value of
/// `target` depends on. Throws NotStraightLine for programs with loops.
std::set<std::size_t> backward_slice(const Program& program, VarId target);

/// Number of backward-slice statements outside the leading declarations.
std::size_t critical_path_length(const Program& program, VarId target);

/// Keeps only the listed top-level statements, in their original order.
Program restrict_to(const Program& program, const std::set<std::size_t>& keep);

}  // namespace codesim::dsl
