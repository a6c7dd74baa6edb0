#pragma once

#include <optional>
#include <string>
#include <utility>

#include "shara/chc.hpp"

namespace shara {

// Map from expansion predicates back to the predicates of the original
// system; identity entries included.
struct Correspondence {
  std::map<std::string, std::string> to_origin;

  const std::string& operator()(const std::string& p) const {
    auto it = to_origin.find(p);
    if (it == to_origin.end()) return p;
    return it->second;
  }
};

struct Expansion {
  System system;
  Correspondence corr;
};

// A sibling-shared dependency: clause id plus the predicate shared between
// two sibling dependency cones (or duplicated in the body).
struct SharedDep {
  int clause_id = 0;
  std::string pred;
};

// None iff the system is CDD. Deterministic choice: first clause (by id),
// first sibling pair (by body position); within that pair's shared set the
// predicate maximal in the dependency-cone order, ties by name.
std::optional<SharedDep> shared_rel(const System& s);

// Splits the shared predicate: a fresh copy of `pred` takes over the
// occurrences on the later sibling's side, and every clause headed by `pred`
// is duplicated for the copy. Throws NotShared unless (clause, pred) is a
// sibling-shared dependency.
System copy_rel(const System& s, int clause_id, const std::string& pred);

// Iterates shared_rel/copy_rel to a fixpoint. `budget` bounds the number of
// predicate copies (the expansion may be exponential in |s|).
Expansion expand(const System& s, size_t budget = 10000);

// Verifies the three correspondence conditions of `exp` against `origin`:
// matching parameter lists, clause images, and surjectivity. Returns an empty
// string when all hold, else a description of the violation.
std::string check_correspondence(const System& origin, const System& expanded,
                                 const Correspondence& corr);

// Renames every variable of the clause with a fresh "!d<n>" suffix so it can
// be inserted next to existing clauses; `used` accumulates taken names.
Clause freshen_clause_vars(const Clause& c, std::set<std::string>& used);

// All variable names appearing in the system's clauses.
std::set<std::string> clause_var_names(const System& s);

}  // namespace shara
