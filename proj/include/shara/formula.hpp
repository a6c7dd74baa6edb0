#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shara/rational.hpp"

namespace shara {

enum class Sort { Rat, Int, Bool };

std::string sort_name(Sort s);

struct Var {
  std::string name;
  Sort sort = Sort::Int;

  bool operator==(const Var& o) const { return name == o.name && sort == o.sort; }
  bool operator<(const Var& o) const {
    if (name != o.name) return name < o.name;
    return sort < o.sort;
  }
};

enum class Rel { Lt, Le, Eq };  // canonical relations; >=, > are normalized away

// Linear atom  sum_i c_i * x_i  rel  c.  Terms are sorted by variable,
// coefficients are nonzero, and the whole atom is scaled so the leading
// coefficient has absolute value one (positive for equalities).
struct LinearAtom {
  std::vector<std::pair<Var, Rat>> terms;
  Rel rel = Rel::Le;
  Rat rhs;
};

enum class FKind { True, False, BoolAtom, Linear, Not, And, Or };

class Formula {
 public:
  Formula() : Formula(truth(true)) {}

  static Formula truth(bool b);
  static Formula bool_atom(const Var& v);
  // Builds a linear atom from raw terms; accepts any of <, <=, =, >=, >
  // via `flip` normalization in the named constructors below.
  static Formula linear(std::vector<std::pair<Var, Rat>> terms, Rel rel, Rat rhs);
  static Formula lt(std::vector<std::pair<Var, Rat>> terms, Rat rhs);
  static Formula le(std::vector<std::pair<Var, Rat>> terms, Rat rhs);
  static Formula eq(std::vector<std::pair<Var, Rat>> terms, Rat rhs);
  static Formula ge(std::vector<std::pair<Var, Rat>> terms, Rat rhs);
  static Formula gt(std::vector<std::pair<Var, Rat>> terms, Rat rhs);
  static Formula negate(const Formula& f);
  static Formula conj(std::vector<Formula> kids);
  static Formula disj(std::vector<Formula> kids);

  FKind kind() const { return node_->kind; }
  bool is_true() const { return kind() == FKind::True; }
  bool is_false() const { return kind() == FKind::False; }
  const Var& bool_var() const { return node_->bvar; }
  const LinearAtom& atom() const { return node_->atom; }
  const std::vector<Formula>& children() const { return node_->kids; }

  bool operator==(const Formula& o) const { return compare(*this, o) == 0; }
  bool operator!=(const Formula& o) const { return compare(*this, o) != 0; }
  bool operator<(const Formula& o) const { return compare(*this, o) < 0; }

  static int compare(const Formula& a, const Formula& b);

 private:
  struct Node {
    FKind kind;
    Var bvar;                    // BoolAtom
    LinearAtom atom;             // Linear
    std::vector<Formula> kids;   // Not (1), And/Or (n)
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula raw_nary(FKind op, std::vector<Formula> kids);
  std::shared_ptr<const Node> node_;
};

// Rational/boolean assignment; absent variables default to 0 / false.
struct Model {
  std::map<Var, Rat> arith;
  std::map<Var, bool> bools;
};

// Free variables of f.
std::set<Var> vocab(const Formula& f);

// Simultaneous variable renaming. Throws SortError on a sort-changing entry.
Formula substitute(const Formula& f, const std::map<Var, Var>& m);

// Disjunctive normal form: each returned cube is a conjunction of literals
// (boolean literals and linear atoms). Cubes whose boolean skeleton is
// inconsistent are dropped; the disjunction of the result is equivalent to f.
// Exceeding `max_cubes` throws ResourceExhausted.
std::vector<Formula> nnf_dnf(const Formula& f,
                             std::optional<size_t> max_cubes = std::nullopt);

bool eval(const Formula& f, const Model& m);

size_t node_count(const Formula& f);

// SMT-LIB2 term syntax.
std::string to_smt2(const Formula& f);
std::string to_smt2(const Var& v);

}  // namespace shara
