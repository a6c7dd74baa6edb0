#include "shara/interpolate.hpp"

#include <algorithm>

#include "shara/errors.hpp"

namespace shara {

namespace {

// Depth-first enumeration of DNF cubes with eager pruning: boolean
// contradictions stop a branch immediately, and the linear system is checked
// before descending into a disjunction.
struct SatSearch {
  size_t budget;
  size_t used = 0;

  struct State {
    std::map<Var, bool> bools;
    std::vector<LinearAtom> lins;
  };

  std::optional<Model> found;

  void charge() {
    if (++used > budget)
      throw ResourceExhausted("check_sat cube budget exceeded (" +
                              std::to_string(budget) + ")");
  }

  bool lin_consistent(const State& st) {
    LinSystem sys;
    for (const auto& a : st.lins)
      if (!sys.add_atom(a)) return false;
    return sys.solve().has_value();
  }

  // pending items are (formula, polarity); returns true when a model was found
  bool walk(std::vector<std::pair<Formula, bool>> pending, State st) {
    charge();
    while (!pending.empty()) {
      auto [f, pos] = pending.back();
      pending.pop_back();
      switch (f.kind()) {
        case FKind::True:
          if (!pos) return false;
          break;
        case FKind::False:
          if (pos) return false;
          break;
        case FKind::Not:
          pending.emplace_back(f.children()[0], !pos);
          break;
        case FKind::BoolAtom: {
          auto [it, fresh] = st.bools.emplace(f.bool_var(), pos);
          if (!fresh && it->second != pos) return false;
          break;
        }
        case FKind::Linear: {
          if (pos) {
            st.lins.push_back(f.atom());
          } else if (f.atom().rel == Rel::Eq) {
            auto lt = Formula::lt(f.atom().terms, f.atom().rhs);
            auto gt = Formula::gt(f.atom().terms, f.atom().rhs);
            auto p2 = pending;
            p2.emplace_back(lt, true);
            if (walk(std::move(p2), st)) return true;
            pending.emplace_back(gt, true);
          } else {
            const auto& a = f.atom();
            std::vector<std::pair<Var, Rat>> t = a.terms;
            st.lins.push_back((a.rel == Rel::Le ? Formula::gt(std::move(t), a.rhs)
                                                : Formula::ge(std::move(t), a.rhs))
                                  .atom());
          }
          break;
        }
        case FKind::And:
        case FKind::Or: {
          bool conjunctive = (f.kind() == FKind::And) == pos;
          if (conjunctive) {
            for (const auto& k : f.children()) pending.emplace_back(k, pos);
          } else {
            if (!lin_consistent(st)) return false;
            for (const auto& k : f.children()) {
              auto p2 = pending;
              p2.emplace_back(k, pos);
              if (walk(std::move(p2), st)) return true;
            }
            return false;
          }
          break;
        }
      }
    }
    LinSystem sys;
    for (const auto& a : st.lins)
      if (!sys.add_atom(a)) return false;
    auto assign = sys.solve();
    if (!assign) return false;
    Model m;
    m.arith = std::move(*assign);
    m.bools = st.bools;
    found = std::move(m);
    return true;
  }
};

}  // namespace

SatResult BuiltinSolver::check_sat(const Formula& f) const {
  SatSearch search{budget_};
  SatResult r;
  if (search.walk({{f, true}}, SatSearch::State{})) {
    r.sat = true;
    r.model = std::move(*search.found);
  }
  return r;
}

Formula BuiltinSolver::project_formula(const Formula& f,
                                       const std::set<Var>& keep) const {
  std::vector<Formula> cubes = nnf_dnf(f, budget_);
  std::vector<Formula> projected;
  for (const auto& c : cubes) {
    Formula p = project_cube(c, keep);
    if (!p.is_false()) projected.push_back(p);
  }
  std::sort(projected.begin(), projected.end());
  projected.erase(std::unique(projected.begin(), projected.end()), projected.end());

  // Drop syntactically subsumed disjuncts: a cube with a superset of another
  // cube's literals is stronger and thus redundant in a disjunction.
  auto literals = [](const Formula& cube) {
    std::set<Formula> lits;
    if (cube.kind() == FKind::And)
      for (const auto& k : cube.children()) lits.insert(k);
    else
      lits.insert(cube);
    return lits;
  };
  std::vector<std::set<Formula>> litsets;
  litsets.reserve(projected.size());
  for (const auto& c : projected) litsets.push_back(literals(c));
  std::vector<Formula> kept;
  for (size_t i = 0; i < projected.size(); ++i) {
    bool subsumed = false;
    for (size_t j = 0; j < projected.size() && !subsumed; ++j) {
      if (i == j) continue;
      const auto& a = litsets[j];
      const auto& b = litsets[i];
      // j subsumes i when lits(j) is a strict subset of lits(i); equal sets
      // keep the first occurrence only.
      if (a.size() > b.size()) continue;
      if (a.size() == b.size() && j >= i) continue;
      subsumed = std::includes(b.begin(), b.end(), a.begin(), a.end());
    }
    if (!subsumed) kept.push_back(projected[i]);
  }
  return Formula::disj(std::move(kept));
}

std::string check_interpolant(const BuiltinSolver& solver, const ItpQuery& q,
                              const Formula& itp) {
  if (solver.check_sat(Formula::conj({q.pre, Formula::negate(itp)})).sat)
    return "condition 1 violated: pre does not entail the interpolant";
  if (solver.check_sat(Formula::conj({itp, q.post})).sat)
    return "condition 2 violated: interpolant is consistent with post";
  std::set<Var> vi = vocab(itp);
  std::set<Var> vpre = vocab(q.pre);
  std::set<Var> vpost = vocab(q.post);
  for (const auto& v : vi)
    if (!vpre.count(v) || !vpost.count(v))
      return "condition 3 violated: " + v.name + " is not in the common vocabulary";
  return "";
}

ItpResult BuiltinItp::itp(const ItpQuery& q) {
  ++queries;
  SatResult joint = solver_.check_sat(Formula::conj({q.pre, q.post}));
  if (joint.sat) return MutuallySat{std::move(joint.model)};

  std::set<Var> keep;
  std::set<Var> vpost = vocab(q.post);
  for (const auto& v : q.shared)
    if (vpost.count(v)) keep.insert(v);
  Formula interpolant = solver_.project_formula(q.pre, keep);

  if (verify_) {
    std::string err = check_interpolant(solver_, q, interpolant);
    if (!err.empty())
      throw Error("builtin interpolation produced an invalid interpolant: " + err);
    ++verified;
  }
  return Interpolant{std::move(interpolant)};
}

}  // namespace shara
