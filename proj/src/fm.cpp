#include "shara/fm.hpp"

#include <algorithm>
#include <cassert>

#include "shara/errors.hpp"

namespace shara {

namespace {

bool ground_holds(Rel rel, const Rat& lhs, const Rat& rhs) {
  switch (rel) {
    case Rel::Lt: return lhs < rhs;
    case Rel::Le: return lhs <= rhs;
    case Rel::Eq: return lhs == rhs;
  }
  return false;
}

void canonicalize(LinCon& c) {
  for (auto it = c.lhs.begin(); it != c.lhs.end();)
    it = it->second == 0 ? c.lhs.erase(it) : std::next(it);
  if (c.lhs.empty()) return;
  Rat lead = c.lhs.begin()->second;
  Rat scale = abs(lead);
  if (c.rel == Rel::Eq && lead < 0) scale = -scale;
  if (scale != 1) {
    for (auto& [v, coeff] : c.lhs) coeff /= scale;
    c.rhs /= scale;
  }
}

int compare_con(const LinCon& a, const LinCon& b) {
  if (a.lhs.size() != b.lhs.size()) return a.lhs.size() < b.lhs.size() ? -1 : 1;
  auto ia = a.lhs.begin();
  auto ib = b.lhs.begin();
  for (; ia != a.lhs.end(); ++ia, ++ib) {
    if (ia->first < ib->first) return -1;
    if (ib->first < ia->first) return 1;
    if (int c = cmp(ia->second, ib->second)) return c;
  }
  if (a.rel != b.rel) return a.rel < b.rel ? -1 : 1;
  return cmp(a.rhs, b.rhs);
}

}  // namespace

LinCon lincon_from_atom(const LinearAtom& a) {
  LinCon c;
  for (const auto& [v, coeff] : a.terms) c.lhs[v] = coeff;
  c.rel = a.rel;
  c.rhs = a.rhs;
  return c;
}

Formula lincon_to_formula(const LinCon& c) {
  std::vector<std::pair<Var, Rat>> terms(c.lhs.begin(), c.lhs.end());
  return Formula::linear(std::move(terms), c.rel, c.rhs);
}

bool LinSystem::add(LinCon c) {
  if (inconsistent_) return false;
  canonicalize(c);
  if (c.lhs.empty()) {
    if (!ground_holds(c.rel, Rat(0), c.rhs)) inconsistent_ = true;
    return !inconsistent_;
  }
  cons_.push_back(std::move(c));
  return true;
}

bool LinSystem::eliminate(const Var& v) {
  std::vector<LinCon> with;
  std::vector<LinCon> rest;
  for (auto& c : cons_) {
    if (c.lhs.count(v)) with.push_back(std::move(c));
    else rest.push_back(std::move(c));
  }
  cons_ = std::move(rest);

  // Substitution through an equality avoids the quadratic pairing.
  auto eq_it = std::find_if(with.begin(), with.end(),
                            [](const LinCon& c) { return c.rel == Rel::Eq; });
  if (eq_it != with.end()) {
    LinCon eq = *eq_it;
    Rat ec = eq.lhs.at(v);
    eq.lhs.erase(v);  // v = (rhs - rest) / ec
    for (auto& c : with) {
      if (&c == &*eq_it) continue;
      Rat cc = c.lhs.at(v);
      c.lhs.erase(v);
      Rat f = cc / ec;
      for (const auto& [u, coeff] : eq.lhs) c.lhs[u] -= f * coeff;
      c.rhs -= f * eq.rhs;
      if (!add(std::move(c))) return false;
    }
    return true;
  }

  std::vector<LinCon> lowers;  // bound <= / < v   (normalized as -v side)
  std::vector<LinCon> uppers;  // v <= / < bound
  for (auto& c : with) {
    if (c.lhs.at(v) > 0) uppers.push_back(std::move(c));
    else lowers.push_back(std::move(c));
  }
  for (const auto& lo : lowers) {
    for (const auto& up : uppers) {
      Rat cl = -lo.lhs.at(v);  // positive
      Rat cu = up.lhs.at(v);   // positive
      LinCon combined;
      for (const auto& [u, coeff] : lo.lhs)
        if (!(u == v)) combined.lhs[u] += coeff * cu;
      for (const auto& [u, coeff] : up.lhs)
        if (!(u == v)) combined.lhs[u] += coeff * cl;
      combined.rhs = lo.rhs * cu + up.rhs * cl;
      combined.rel =
          (lo.rel == Rel::Lt || up.rel == Rel::Lt) ? Rel::Lt : Rel::Le;
      if (!add(std::move(combined))) return false;
    }
  }
  return true;
}

bool LinSystem::project(const std::set<Var>& keep) {
  if (inconsistent_) return false;
  std::set<Var> drop;
  for (const auto& c : cons_)
    for (const auto& [v, coeff] : c.lhs)
      if (!keep.count(v)) drop.insert(v);
  for (const auto& v : drop)
    if (!eliminate(v)) return false;
  return true;
}

std::optional<std::map<Var, Rat>> LinSystem::solve() const {
  if (inconsistent_) return std::nullopt;
  std::set<Var> vars;
  for (const auto& c : cons_)
    for (const auto& [v, coeff] : c.lhs) vars.insert(v);

  LinSystem work = *this;
  std::vector<std::pair<Var, std::vector<LinCon>>> steps;
  for (const auto& v : vars) {
    std::vector<LinCon> involving;
    for (const auto& c : work.cons_)
      if (c.lhs.count(v)) involving.push_back(c);
    steps.emplace_back(v, std::move(involving));
    if (!work.eliminate(v)) return std::nullopt;
  }

  std::map<Var, Rat> val;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const Var& v = it->first;
    std::optional<Rat> lo, hi;
    bool lo_strict = false, hi_strict = false;
    auto tighten_lower = [&](const Rat& bound, bool strict) {
      if (!lo || bound > *lo || (bound == *lo && strict)) {
        lo = bound;
        lo_strict = strict;
      }
    };
    auto tighten_upper = [&](const Rat& bound, bool strict) {
      if (!hi || bound < *hi || (bound == *hi && strict)) {
        hi = bound;
        hi_strict = strict;
      }
    };
    for (const auto& c : it->second) {
      Rat cv = c.lhs.at(v);
      Rat rest = c.rhs;
      for (const auto& [u, coeff] : c.lhs)
        if (!(u == v)) rest -= coeff * val.at(u);
      Rat bound = rest / cv;
      if (c.rel == Rel::Eq) {
        tighten_lower(bound, false);
        tighten_upper(bound, false);
      } else if (cv > 0) {
        tighten_upper(bound, c.rel == Rel::Lt);
      } else {
        tighten_lower(bound, c.rel == Rel::Lt);
      }
    }
    Rat chosen;
    if (!lo && !hi) chosen = 0;
    else if (lo && !hi) chosen = lo_strict ? Rat(*lo + 1) : *lo;
    else if (!lo && hi) chosen = hi_strict ? Rat(*hi - 1) : *hi;
    else if (*lo < *hi) chosen = Rat((*lo + *hi) / 2);
    else if (*lo == *hi && !lo_strict && !hi_strict) chosen = *lo;
    else return std::nullopt;  // cannot happen after successful elimination
    val[v] = chosen;
  }
  return val;
}

std::vector<LinCon> LinSystem::constraints() const {
  std::vector<LinCon> out = cons_;
  std::sort(out.begin(), out.end(),
            [](const LinCon& a, const LinCon& b) { return compare_con(a, b) < 0; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const LinCon& a, const LinCon& b) {
                          return compare_con(a, b) == 0;
                        }),
            out.end());
  // Same-lhs inequality families keep only the tightest bound.
  std::vector<LinCon> pruned;
  for (size_t i = 0; i < out.size(); ++i) {
    if (out[i].rel == Rel::Eq) {
      pruned.push_back(out[i]);
      continue;
    }
    bool dominated = false;
    for (size_t j = 0; j < out.size() && !dominated; ++j) {
      if (i == j || out[j].rel == Rel::Eq) continue;
      if (out[i].lhs == out[j].lhs) {
        if (out[j].rhs < out[i].rhs) dominated = true;
        else if (out[j].rhs == out[i].rhs && out[j].rel == Rel::Lt &&
                 out[i].rel == Rel::Le)
          dominated = true;
      }
    }
    if (!dominated) pruned.push_back(out[i]);
  }
  return pruned;
}

namespace {

struct CubeParts {
  std::map<Var, bool> bools;
  std::vector<LinearAtom> lins;
  bool contradiction = false;
};

CubeParts split_cube(const Formula& cube) {
  CubeParts p;
  std::vector<Formula> stack{cube};
  while (!stack.empty()) {
    Formula f = stack.back();
    stack.pop_back();
    switch (f.kind()) {
      case FKind::True: break;
      case FKind::False: p.contradiction = true; break;
      case FKind::And:
        for (const auto& k : f.children()) stack.push_back(k);
        break;
      case FKind::BoolAtom: {
        auto [it, fresh] = p.bools.emplace(f.bool_var(), true);
        if (!fresh && !it->second) p.contradiction = true;
        break;
      }
      case FKind::Not: {
        const Formula& inner = f.children()[0];
        if (inner.kind() != FKind::BoolAtom)
          throw Error("cube contains non-literal negation: " + to_smt2(f));
        auto [it, fresh] = p.bools.emplace(inner.bool_var(), false);
        if (!fresh && it->second) p.contradiction = true;
        break;
      }
      case FKind::Linear:
        p.lins.push_back(f.atom());
        break;
      default:
        throw Error("not a cube: " + to_smt2(f));
    }
  }
  return p;
}

}  // namespace

Formula project_cube(const Formula& cube, const std::set<Var>& keep) {
  CubeParts p = split_cube(cube);
  if (p.contradiction) return Formula::truth(false);
  LinSystem sys;
  for (const auto& a : p.lins)
    if (!sys.add_atom(a)) return Formula::truth(false);
  if (!sys.project(keep)) return Formula::truth(false);
  std::vector<Formula> lits;
  for (const auto& [v, pos] : p.bools) {
    if (!keep.count(v)) continue;
    Formula b = Formula::bool_atom(v);
    lits.push_back(pos ? b : Formula::negate(b));
  }
  for (const auto& c : sys.constraints()) lits.push_back(lincon_to_formula(c));
  return Formula::conj(std::move(lits));
}

std::optional<Model> cube_model(const Formula& cube) {
  CubeParts p = split_cube(cube);
  if (p.contradiction) return std::nullopt;
  LinSystem sys;
  for (const auto& a : p.lins)
    if (!sys.add_atom(a)) return std::nullopt;
  auto assign = sys.solve();
  if (!assign) return std::nullopt;
  Model m;
  m.arith = std::move(*assign);
  m.bools = p.bools;
  return m;
}

}  // namespace shara
