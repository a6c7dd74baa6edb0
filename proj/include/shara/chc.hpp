#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "shara/formula.hpp"

namespace shara {

struct Predicate {
  std::string name;
  std::vector<Var> params;  // canonical parameters "name!i", pairwise distinct
};

struct PredApp {
  std::string pred;
  std::vector<Var> args;
};

// head == nullopt marks a query (head False).
struct Clause {
  int id = 0;
  std::optional<PredApp> head;
  std::vector<PredApp> body;
  Formula constraint;
};

// Boolean indicator variable for a predicate; reserved "b!" namespace.
Var indicator(const std::string& pred_name);

enum class Label { RecursionFree, Linear, BodyDisjoint, CDD };

std::string label_name(Label l);

// Raw clause as produced by parsers/generators: application arguments may be
// arbitrary linear terms; normalization flattens them to distinct variables.
struct LinTerm {
  std::map<Var, Rat> coeffs;
  Rat constant;
};

struct RawApp {
  std::string pred;
  std::vector<std::variant<Var, LinTerm>> args;
};

struct RawClause {
  std::optional<RawApp> head;
  std::vector<RawApp> body;
  Formula constraint;
};

class System {
 public:
  // Normalizes: flattens application arguments to fresh distinct variables
  // (equalities pushed into the constraint), renames clause-local variables
  // apart across clauses, merges multiple queries through a fresh nullary
  // predicate, and assigns 1-based clause ids in input order.
  static System build(const std::vector<Predicate>& decls,
                      const std::vector<RawClause>& raw);

  const std::map<std::string, Predicate>& preds() const { return preds_; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& clause(int id) const;
  const Clause& query() const { return clause(query_id_); }
  int query_id() const { return query_id_; }
  const Predicate& pred(const std::string& name) const;

  // Direct predicate dependencies: bodies of clauses headed by `p`.
  const std::set<std::string>& deps(const std::string& p) const;
  // Transitive closure of deps.
  const std::set<std::string>& tdeps(const std::string& p) const;
  // Predicates that have `p` as a transitive dependency.
  const std::set<std::string>& dependents(const std::string& p) const;
  // Predicates co-occurring with `p` in some clause body; contains `p`
  // itself iff `p` occurs twice in a single body.
  const std::set<std::string>& siblings(const std::string& p) const;

  bool is_recursion_free() const;
  std::set<Label> classify() const;
  // Dependency-respecting total order, ties broken by name.
  std::vector<std::string> topo_order() const;

  // Clauses with the given head predicate, in id order.
  std::vector<const Clause*> defining_clauses(const std::string& p) const;

  // Dependency hypergraph in DOT format (predicates plus a bottom node;
  // clauses as labeled hyperedge points).
  std::string to_dot() const;

 private:
  void index();
  void check(const std::string& p) const;

  std::map<std::string, Predicate> preds_;
  std::vector<Clause> clauses_;
  int query_id_ = 0;

  std::map<std::string, std::set<std::string>> deps_;
  std::map<std::string, std::set<std::string>> tdeps_;
  std::map<std::string, std::set<std::string>> dependents_;
  std::map<std::string, std::set<std::string>> siblings_;

  friend System assemble_system(std::map<std::string, Predicate> preds,
                                std::vector<Clause> clauses, int query_id);
};

// Internal constructor for passes that already maintain the invariants
// (expansion, unwinding): clauses must be normalized and renamed apart.
System assemble_system(std::map<std::string, Predicate> preds,
                       std::vector<Clause> clauses, int query_id);

// Canonical clause key, invariant under clause-local variable renaming and
// under a predicate-name mapping; used for correspondence checks and
// round-trip tests.
std::string clause_key(const Clause& c,
                       const std::map<std::string, std::string>& pred_map = {});

}  // namespace shara
