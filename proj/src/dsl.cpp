#include "codesim/dsl.hpp"

#include <algorithm>
#include <sstream>

#include "codesim/error.hpp"

namespace codesim::dsl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t count_statements(const std::vector<Node>& nodes) {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.is_loop() ? count_statements(node.loop().body) : 1;
  return n;
}

std::size_t depth_of(const std::vector<Node>& nodes) {
  std::size_t deepest = 0;
  for (const auto& node : nodes)
    if (node.is_loop()) deepest = std::max(deepest, 1 + depth_of(node.loop().body));
  return deepest;
}

void collect(const std::vector<Node>& nodes, std::vector<const Statement*>& out) {
  for (const auto& node : nodes) {
    if (node.is_loop())
      collect(node.loop().body, out);
    else
      out.push_back(&node.statement());
  }
}

std::string operand_text(const Operand& op) {
  if (const auto* v = std::get_if<VarId>(&op)) return var_name(*v);
  return std::to_string(std::get<std::int64_t>(op));
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw IntegerOverflow("integer overflow in addition");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw IntegerOverflow("integer overflow in subtraction");
  return r;
}

class Interpreter {
 public:
  Interpreter(std::size_t var_count, std::uint64_t step_limit, bool record)
      : env_(var_count), limit_(step_limit), record_(record) {}

  void run_block(const std::vector<Node>& nodes, std::size_t first_index) {
    std::size_t index = first_index;
    for (const auto& node : nodes) {
      if (node.is_loop()) {
        const auto& loop = node.loop();
        for (std::int64_t i = 0; i < loop.count; ++i) run_block(loop.body, index);
        index += count_statements(loop.body);
      } else {
        step(node.statement(), index);
        ++index;
      }
    }
  }

  Env& env() { return env_; }
  Trace& trace() { return trace_; }

 private:
  std::int64_t value_of(const Operand& op) const {
    if (const auto* v = std::get_if<VarId>(&op)) return env_.at(*v);
    return std::get<std::int64_t>(op);
  }

  void step(const Statement& s, std::size_t index) {
    if (++steps_ > limit_)
      throw StepLimitExceeded("program exceeded the step limit of " + std::to_string(limit_));
    std::visit(overloaded{
                   [&](const Init& st) { env_.set(st.var, st.value); },
                   [&](const MultiInit& st) {
                     for (auto v : st.vars) env_.set(v, st.value);
                   },
                   [&](const Assign& st) { env_.set(st.dst, env_.at(st.src)); },
                   [&](const AddAssign& st) { env_.set(st.dst, checked_add(env_.at(st.dst), value_of(st.src))); },
                   [&](const SubAssign& st) { env_.set(st.dst, checked_sub(env_.at(st.dst), value_of(st.src))); },
                   [&](const AndAssign& st) {
                     env_.set(st.dst, (env_.at(st.dst) != 0 && env_.at(st.src) != 0) ? 1 : 0);
                   },
                   [&](const OrAssign& st) {
                     env_.set(st.dst, (env_.at(st.dst) != 0 || env_.at(st.src) != 0) ? 1 : 0);
                   },
               },
               s);
    if (record_) trace_.push_back({index, env_});
  }

  Env env_;
  Trace trace_;
  std::uint64_t limit_;
  std::uint64_t steps_ = 0;
  bool record_;
};

}  // namespace

std::string var_name(VarId v) { return "a" + std::to_string(v.index); }

std::int64_t Env::at(VarId v) const {
  if (!defined(v)) throw UninitialisedRead("read of uninitialised variable " + var_name(v));
  return *slots_[v.index];
}

std::optional<std::int64_t> Env::get(VarId v) const {
  if (v.index >= slots_.size()) return std::nullopt;
  return slots_[v.index];
}

void Env::set(VarId v, std::int64_t value) {
  if (v.index >= slots_.size()) throw UninitialisedRead("write to undeclared variable " + var_name(v));
  slots_[v.index] = value;
}

bool is_initialisation(const Statement& s) {
  return std::holds_alternative<Init>(s) || std::holds_alternative<MultiInit>(s);
}

std::vector<VarId> defs(const Statement& s) {
  return std::visit(overloaded{
                        [](const Init& st) { return std::vector<VarId>{st.var}; },
                        [](const MultiInit& st) { return st.vars; },
                        [](const auto& st) { return std::vector<VarId>{st.dst}; },
                    },
                    s);
}

std::vector<VarId> uses(const Statement& s) {
  return std::visit(overloaded{
                        [](const Init&) { return std::vector<VarId>{}; },
                        [](const MultiInit&) { return std::vector<VarId>{}; },
                        [](const Assign& st) { return std::vector<VarId>{st.src}; },
                        [](const AddAssign& st) {
                          std::vector<VarId> u{st.dst};
                          if (const auto* v = std::get_if<VarId>(&st.src)) u.push_back(*v);
                          return u;
                        },
                        [](const SubAssign& st) {
                          std::vector<VarId> u{st.dst};
                          if (const auto* v = std::get_if<VarId>(&st.src)) u.push_back(*v);
                          return u;
                        },
                        [](const AndAssign& st) { return std::vector<VarId>{st.dst, st.src}; },
                        [](const OrAssign& st) { return std::vector<VarId>{st.dst, st.src}; },
                    },
                    s);
}

bool kills(const Statement& s) {
  return std::holds_alternative<Init>(s) || std::holds_alternative<MultiInit>(s) ||
         std::holds_alternative<Assign>(s);
}

bool Program::is_straight_line() const {
  return std::none_of(body.begin(), body.end(), [](const Node& n) { return n.is_loop(); });
}

std::size_t Program::loop_depth() const { return depth_of(body); }

std::vector<const Statement*> Program::statements() const {
  std::vector<const Statement*> out;
  collect(body, out);
  return out;
}

std::size_t Program::declaration_count() const {
  std::size_t n = 0;
  while (n < body.size() && !body[n].is_loop() && is_initialisation(body[n].statement())) ++n;
  return n;
}

std::size_t Program::operation_count() const { return statements().size() - declaration_count(); }

Execution execute(const Program& program, std::uint64_t step_limit) {
  Interpreter interp(program.var_count, step_limit, true);
  interp.run_block(program.body, 0);
  return {std::move(interp.env()), std::move(interp.trace())};
}

Env run(const Program& program, std::uint64_t step_limit) {
  Interpreter interp(program.var_count, step_limit, false);
  interp.run_block(program.body, 0);
  return std::move(interp.env());
}

std::string render_statement(const Statement& s) {
  return std::visit(
      overloaded{
          [](const Init& st) { return var_name(st.var) + "=" + std::to_string(st.value); },
          [](const MultiInit& st) {
            std::string out;
            for (auto v : st.vars) out += var_name(v) + " = ";
            return out + std::to_string(st.value);
          },
          [](const Assign& st) { return var_name(st.dst) + " = " + var_name(st.src); },
          [](const AddAssign& st) { return var_name(st.dst) + " += " + operand_text(st.src); },
          [](const SubAssign& st) { return var_name(st.dst) + " -= " + operand_text(st.src); },
          [](const AndAssign& st) { return var_name(st.dst) + " &= " + var_name(st.src); },
          [](const OrAssign& st) { return var_name(st.dst) + " |= " + var_name(st.src); },
      },
      s);
}

namespace {

void render_block(const std::vector<Node>& nodes, std::size_t indent, std::ostringstream& out) {
  const std::string pad(indent * 4, ' ');
  for (const auto& node : nodes) {
    if (node.is_loop()) {
      out << pad << "for _ in range(" << node.loop().count << "):\n";
      render_block(node.loop().body, indent + 1, out);
    } else {
      out << pad << render_statement(node.statement()) << '\n';
    }
  }
}

}  // namespace

std::string render_source(const Program& program) {
  std::ostringstream out;
  std::size_t i = 0;
  // Leading single-variable initialisations form the declaration line.
  bool first = true;
  while (i < program.body.size() && !program.body[i].is_loop() &&
         std::holds_alternative<Init>(program.body[i].statement())) {
    out << (first ? "" : "; ") << render_statement(program.body[i].statement());
    first = false;
    ++i;
  }
  if (!first) out << '\n';
  render_block(std::vector<Node>(program.body.begin() + static_cast<std::ptrdiff_t>(i), program.body.end()), 0,
               out);
  return out.str();
}

std::set<std::size_t> backward_slice(const Program& program, VarId target) {
  if (!program.is_straight_line()) throw NotStraightLine("backward slicing requires a loop-free program");
  if (target.index >= program.var_count) throw UninitialisedRead("slice target " + var_name(target) + " is undeclared");
  std::set<VarId> live{target};
  std::set<std::size_t> slice;
  for (std::size_t i = program.body.size(); i-- > 0;) {
    const auto& s = program.body[i].statement();
    const auto written = defs(s);
    const bool relevant = std::any_of(written.begin(), written.end(), [&](VarId v) { return live.count(v) != 0; });
    if (!relevant) continue;
    slice.insert(i);
    if (kills(s))
      for (auto v : written) live.erase(v);
    for (auto v : uses(s)) live.insert(v);
  }
  return slice;
}

std::size_t critical_path_length(const Program& program, VarId target) {
  const auto slice = backward_slice(program, target);
  const auto declarations = program.declaration_count();
  return static_cast<std::size_t>(
      std::count_if(slice.begin(), slice.end(), [&](std::size_t i) { return i >= declarations; }));
}

Program restrict_to(const Program& program, const std::set<std::size_t>& keep) {
  Program out{program.var_count, {}};
  for (std::size_t i = 0; i < program.body.size(); ++i)
    if (keep.count(i) != 0) out.body.push_back(program.body[i]);
  return out;
}

}  // namespace codesim::dsl
