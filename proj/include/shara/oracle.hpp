#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shara/chc.hpp"
#include "shara/interpolate.hpp"

namespace shara {

// One derivation of a clause: a child tree per body occurrence, in body
// order. Variables are freshened per occurrence when the accumulated
// constraint is built.
struct DerivationTree {
  int clause_id = 0;
  std::vector<DerivationTree> children;
};

void collect_clause_ids(const DerivationTree& t, std::vector<int>& out);

struct OracleResult {
  bool solvable = true;
  std::optional<DerivationTree> witness;  // present iff not solvable
  Formula witness_constraint;             // accumulated constraint of witness
  Model witness_model;
};

struct OracleGuard {
  size_t max_preds = 8;
  size_t max_clauses = 14;
  size_t max_trees = 200000;
};

// Ground-truth solvability for small recursion-free systems by derivation
// tree enumeration, smallest trees first. Unsolvable iff some derivation of
// the query has a satisfiable accumulated constraint.
OracleResult oracle_solvable(const System& s, const OracleGuard& guard = {});

// Accumulated constraint of one derivation tree rooted at the query, with
// occurrence-level variable freshening.
Formula derivation_constraint(const System& s, const DerivationTree& t);

enum class GenProfile { Linear, BodyDisjoint, Dag, Cdd };

GenProfile profile_from_string(const std::string& s);
std::string profile_name(GenProfile p);

// Deterministic random system; the output satisfies the profile's class
// label and stays within the oracle guard.
System gen_system(uint64_t seed, GenProfile profile);

// Chain of diamond stages joined through a fresh side predicate per stage;
// already CDD, neither linear nor body-disjoint, with derivation-tree
// duplication exponential in the depth.
System diamond_chain(int depth);

// All sibling pairs share one leaf; expansion copies the leaf per extra
// sibling. Exercises real predicate copying.
System shared_leaf_fan(int width);

struct SizeCounts {
  uint64_t clauses = 0;
  uint64_t preds = 0;
};

struct ExpansionSizes {
  SizeCounts cdd;            // measured on expand(s)
  SizeCounts tree;           // full derivation-tree duplication, combinatorial
  SizeCounts linear_inline;  // exhaustive inlining to a linear system
};

ExpansionSizes expansion_sizes(const System& s, size_t expansion_budget = 10000);

}  // namespace shara
