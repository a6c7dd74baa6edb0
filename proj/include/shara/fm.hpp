#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "shara/formula.hpp"

namespace shara {

// Internal constraint form for Fourier-Motzkin:  sum c_i x_i  rel  rhs
// with rel in {Lt, Le, Eq}.
struct LinCon {
  std::map<Var, Rat> lhs;
  Rel rel = Rel::Le;
  Rat rhs;
};

LinCon lincon_from_atom(const LinearAtom& a);
Formula lincon_to_formula(const LinCon& c);

// Conjunction of linear constraints with exact existential projection.
class LinSystem {
 public:
  // Returns false the moment a ground contradiction is derived.
  bool add(LinCon c);
  bool add_atom(const LinearAtom& a) { return add(lincon_from_atom(a)); }

  // Eliminates every variable not in `keep`. Returns false on inconsistency.
  bool project(const std::set<Var>& keep);

  // Satisfiability with a witness; the system is left untouched.
  std::optional<std::map<Var, Rat>> solve() const;

  // Remaining constraints with redundant bounds dropped (same lhs, weaker
  // bound) and duplicates removed.
  std::vector<LinCon> constraints() const;

  bool inconsistent() const { return inconsistent_; }

 private:
  bool eliminate(const Var& v);
  std::vector<LinCon> cons_;
  bool inconsistent_ = false;
};

// Fourier-Motzkin projection of a cube (conjunction of literals: linear atoms
// and boolean literals). Boolean literals are kept iff their variable is in
// `keep`; arithmetic variables outside `keep` are eliminated exactly.
Formula project_cube(const Formula& cube, const std::set<Var>& keep);

// Satisfiability of a cube with witness extraction.
std::optional<Model> cube_model(const Formula& cube);

}  // namespace shara
