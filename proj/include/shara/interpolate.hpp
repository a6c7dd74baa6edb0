#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "shara/fm.hpp"
#include "shara/formula.hpp"

namespace shara {

struct ItpQuery {
  Formula pre;
  Formula post;
  std::set<Var> shared;  // target vocabulary for the interpolant
};

struct Interpolant {
  Formula formula;
};
struct MutuallySat {
  Model model;
};
struct ItpUnknown {
  std::string reason;
};

using ItpResult = std::variant<Interpolant, MutuallySat, ItpUnknown>;

struct SatResult {
  bool sat = false;
  Model model;  // meaningful when sat
};

// Satisfiability for quantifier-free linear rational arithmetic with opaque
// boolean atoms. Integer-sorted variables are relaxed to rationals: Unsat is
// definitive, Sat models are rational.
class BuiltinSolver {
 public:
  explicit BuiltinSolver(size_t cube_budget = 200000) : budget_(cube_budget) {}

  SatResult check_sat(const Formula& f) const;

  // Fourier-Motzkin projection of a cube onto `keep`; equivalent to
  // existentially quantifying the eliminated variables.
  Formula project(const Formula& cube, const std::set<Var>& keep) const {
    return project_cube(cube, keep);
  }

  // Existential projection of an arbitrary formula: DNF, project each cube,
  // drop false and syntactically subsumed disjuncts.
  Formula project_formula(const Formula& f, const std::set<Var>& keep) const;

  // f entails g.
  bool entails(const Formula& f, const Formula& g) const {
    return !check_sat(Formula::conj({f, Formula::negate(g)})).sat;
  }

  bool equivalent(const Formula& f, const Formula& g) const {
    return entails(f, g) && entails(g, f);
  }

  size_t budget() const { return budget_; }

 private:
  size_t budget_;
};

class ItpBackend {
 public:
  virtual ~ItpBackend() = default;
  virtual ItpResult itp(const ItpQuery& q) = 0;
  virtual std::string name() const = 0;
};

// Quantifier-elimination interpolation: the strongest interpolant over the
// shared vocabulary, by per-cube projection of the pre-formula.
class BuiltinItp : public ItpBackend {
 public:
  explicit BuiltinItp(size_t cube_budget = 200000, bool verify = false)
      : solver_(cube_budget), verify_(verify) {}

  ItpResult itp(const ItpQuery& q) override;
  std::string name() const override { return "builtin"; }

  const BuiltinSolver& solver() const { return solver_; }
  void set_verify(bool v) { verify_ = v; }

  // Counters for the test suites.
  size_t queries = 0;
  size_t verified = 0;

 private:
  BuiltinSolver solver_;
  bool verify_;
};

// Checks the three interpolant conditions with independent check_sat calls.
// Returns an empty string when all hold, else a description of the failure.
std::string check_interpolant(const BuiltinSolver& solver, const ItpQuery& q,
                              const Formula& itp);

}  // namespace shara
