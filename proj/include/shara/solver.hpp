#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shara/chc.hpp"
#include "shara/expand.hpp"
#include "shara/interpolate.hpp"
#include "shara/smt2.hpp"

namespace shara {

// The canonically wired form of a clause: every predicate application is
// rewritten onto the canonical parameters of its predicate (argument
// variables renamed where possible, equalities added where a variable is
// already bound), without indicator variables.
Formula clause_wired(const System& s, const Clause& c);

// Compact constraint of a predicate: sigma lookup when solved, else the
// disjunction over defining clauses of the wired constraint conjoined with
// the indicators of the body predicates.
Formula ctr(const System& s, const std::string& pred, const Solution& sigma);

// Counterexample characterization: not b_P or ctr(P).
Formula vc(const System& s, const std::string& pred, const Solution& sigma);

// Wired query clause body: constraint plus body indicators.
Formula query_formula(const System& s);

// ctr(P) conjoined with (not b_Q or sigma(Q)) for every direct dependency.
// Throws IncompleteSolution when a dependency has no interpretation.
Formula pre_formula(const System& s, const std::string& pred, const Solution& sigma);

// Context predicates of the post-formula: the transitive dependents of P and
// the query's body predicates, closed under the bodies of their defining
// clauses (excluding P itself).
std::set<std::string> post_context(const System& s, const std::string& pred);

// query /\ vc(Q) for all context predicates, with every occurrence of b_P
// structurally deleted (treated as true).
Formula post_formula(const System& s, const std::string& pred, const Solution& sigma);

// Replaces a boolean atom by a constant and renormalizes.
Formula assign_bool(const Formula& f, const Var& b, bool value);

struct PredTrace {
  std::string pred;
  size_t pre_size = 0;   // formula nodes
  size_t post_size = 0;
  double itp_time_ms = 0;
  Formula interpolant;
};

struct SolveStats {
  size_t itp_queries = 0;
  std::vector<PredTrace> trace;
};

struct SolveOptions {
  bool validate_incrementally = false;  // debug mode: partial solution check
  size_t expansion_budget = 10000;
};

// Algorithm: one binary interpolation query per predicate in topological
// order. Returns nullopt when some pre/post pair is mutually satisfiable.
std::optional<Solution> solve_cdd(const System& s, ItpBackend& backend,
                                  const SolveOptions& opts = {},
                                  SolveStats* stats = nullptr);

// sigma(P) = conjunction of sigma'(P') over the preimages of P, rewritten
// onto P's canonical parameters.
Solution collapse(const System& origin, const System& expanded,
                  const Correspondence& corr, const Solution& expanded_solution);

// Recursion-free driver: expand to CDD, solve, collapse.
std::optional<Solution> shara(const System& s, ItpBackend& backend,
                              const SolveOptions& opts = {},
                              SolveStats* stats = nullptr);

// Level-indexed unwinding: P@i for i in 0..k; intra-SCC (back) edges step
// down one level, cross-SCC edges stay; clauses needing level -1 are
// dropped; predicates unreachable from the query are pruned.
System unwind(const System& s, int k);

// Name of the level-indexed copy.
std::string level_pred_name(const std::string& pred, int level);
// Inverse of level_pred_name; nullopt when the name carries no level.
std::optional<std::pair<std::string, int>> split_level_name(const std::string&);

struct ValidationResult {
  bool ok = true;
  int failing_clause = 0;
  std::optional<Model> witness;
};

// Checks every clause: body constraint /\ interpretations of body apps /\
// negated head interpretation must be unsatisfiable.
ValidationResult validate(const System& s, const Solution& sigma,
                          const BuiltinSolver& solver = BuiltinSolver());

// Single-clause validation; sigma must cover the clause's predicates.
ValidationResult validate_clause(const System& s, const Solution& sigma,
                                 const Clause& c,
                                 const BuiltinSolver& solver = BuiltinSolver());

enum class RecOutcome { Solved, Refuted, Unknown };

struct RecResult {
  RecOutcome outcome = RecOutcome::Unknown;
  Solution solution;                  // Solved
  int depth = -1;                     // Refuted: first refuting bound
  std::vector<int> refutation_trace;  // original clause ids of the witness
  std::string reason;                 // Unknown
};

// Bounded-unwinding driver for (possibly) recursive systems. Candidate
// solutions take the disjunction of the level interpretations per original
// predicate and are certified by validate before Solved is reported.
RecResult solve_recursive(const System& s, int k_max, ItpBackend& backend,
                          const SolveOptions& opts = {});

}  // namespace shara
