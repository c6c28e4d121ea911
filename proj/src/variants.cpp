#include <algorithm>
#include <numeric>
#include <set>

#include "codesim/error.hpp"
#include "codesim/rng.hpp"
#include "codesim/taskgen.hpp"

namespace codesim::taskgen {

namespace {

using dsl::Node;
using dsl::Program;
using dsl::Statement;
using dsl::VarId;

bool independent(const Statement& a, const Statement& b) {
  const auto da = dsl::defs(a), db = dsl::defs(b);
  const auto ua = dsl::uses(a), ub = dsl::uses(b);
  auto meets = [](const std::vector<VarId>& x, const std::vector<VarId>& y) {
    for (auto v : x)
      if (std::find(y.begin(), y.end(), v) != y.end()) return true;
    return false;
  };
  return !meets(da, db) && !meets(da, ub) && !meets(db, ua);
}

// Swaps a random pair of adjacent independent statements.
bool reorder(Program& p, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i + 1 < p.body.size(); ++i) {
    const auto& a = p.body[i].statement();
    const auto& b = p.body[i + 1].statement();
    // Swapping two initialisations only permutes the header line.
    if (!(dsl::is_initialisation(a) && dsl::is_initialisation(b)) && independent(a, b)) candidates.push_back(i);
  }
  if (candidates.empty()) return false;
  const auto i = candidates[rng.index(candidates.size())];
  std::swap(p.body[i], p.body[i + 1]);
  return true;
}

// Rewrites `x += k` as `x += j; x += k - j` (likewise for -=), for |k| >= 2.
bool split(Program& p, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < p.body.size(); ++i) {
    const auto& s = p.body[i].statement();
    const dsl::Operand* src = nullptr;
    if (auto* a = std::get_if<dsl::AddAssign>(&s)) src = &a->src;
    if (auto* a = std::get_if<dsl::SubAssign>(&s)) src = &a->src;
    if (src)
      if (auto* lit = std::get_if<std::int64_t>(src); lit && (*lit >= 2 || *lit <= -2)) candidates.push_back(i);
  }
  if (candidates.empty()) return false;
  const auto i = candidates[rng.index(candidates.size())];
  Statement first = p.body[i].statement();
  Statement second = first;
  auto cut = [&](auto& a, auto& b) {
    const auto k = std::get<std::int64_t>(a.src);
    const auto j = k > 0 ? rng.uniform(1, k - 1) : -rng.uniform(1, -k - 1);
    a.src = j;
    b.src = k - j;
  };
  if (auto* a = std::get_if<dsl::AddAssign>(&first))
    cut(*a, std::get<dsl::AddAssign>(second));
  else
    cut(std::get<dsl::SubAssign>(first), std::get<dsl::SubAssign>(second));
  p.body[i] = Node(first);
  p.body.insert(p.body.begin() + static_cast<std::ptrdiff_t>(i) + 1, Node(second));
  return true;
}

Statement rename_statement(const Statement& s, const std::vector<std::size_t>& perm) {
  auto v = [&](VarId x) { return VarId{perm[x.index]}; };
  auto op = [&](const dsl::Operand& o) -> dsl::Operand {
    if (auto* x = std::get_if<VarId>(&o)) return v(*x);
    return o;
  };
  return std::visit(
      [&](const auto& st) -> Statement {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, dsl::Init>) {
          return dsl::Init{v(st.var), st.value};
        } else if constexpr (std::is_same_v<T, dsl::MultiInit>) {
          dsl::MultiInit out{{}, st.value};
          for (auto x : st.vars) out.vars.push_back(v(x));
          return out;
        } else if constexpr (std::is_same_v<T, dsl::AddAssign> || std::is_same_v<T, dsl::SubAssign>) {
          return T{v(st.dst), op(st.src)};
        } else {
          return T{v(st.dst), v(st.src)};
        }
      },
      s);
}

// Applies a non-identity permutation of the non-target variables.
bool rename(Program& p, VarId target, Rng& rng) {
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < p.var_count; ++i)
    if (i != target.index) others.push_back(i);
  if (others.size() < 2) return false;
  auto shuffled = others;
  while (shuffled == others) rng.shuffle(shuffled);
  std::vector<std::size_t> perm(p.var_count);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < others.size(); ++i) perm[others[i]] = shuffled[i];
  for (auto& n : p.body) n = Node(rename_statement(n.statement(), perm));
  return true;
}

}  // namespace

std::vector<Program> equivalent_variants(const Program& program, VarId target, int m, std::uint64_t seed) {
  if (m < 2) throw InfeasibleParams("need at least two variants");
  if (!program.is_straight_line()) throw NotStraightLine("variants are defined for straight-line programs");
  const auto expected = dsl::run(program).at(target);
  Rng rng(derive_seed(seed, {0x7a21}));

  std::vector<Program> out{program};
  std::set<std::string> seen{dsl::render_source(program)};
  for (int attempt = 0; attempt < 200 * m && static_cast<int>(out.size()) < m; ++attempt) {
    Program candidate = program;
    const auto n_transforms = rng.uniform(1, 3);
    bool changed = false;
    for (std::int64_t t = 0; t < n_transforms; ++t) {
      switch (rng.index(3)) {
        case 0:
          changed |= reorder(candidate, rng);
          break;
        case 1:
          changed |= split(candidate, rng);
          break;
        default:
          changed |= rename(candidate, target, rng);
          break;
      }
    }
    if (!changed) continue;
    auto text = dsl::render_source(candidate);
    if (!seen.insert(text).second) continue;
    if (dsl::run(candidate).at(target) != expected) throw std::logic_error("variant changed the target value");
    out.push_back(std::move(candidate));
  }
  if (static_cast<int>(out.size()) < m)
    throw InfeasibleParams("program admits fewer than " + std::to_string(m) + " distinct equivalent variants");
  return out;
}

}  // namespace codesim::taskgen
