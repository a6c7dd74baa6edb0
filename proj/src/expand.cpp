#include "shara/expand.hpp"

#include <algorithm>

#include "shara/errors.hpp"

namespace shara {

namespace {

// cone(p) = tdeps(p) + p itself
bool in_cone(const System& s, const std::string& p, const std::string& member) {
  return member == p || s.tdeps(p).count(member) > 0;
}

std::set<std::string> shared_of_pair(const System& s, const std::string& q1,
                                     const std::string& q2) {
  std::set<std::string> cone1 = s.tdeps(q1);
  cone1.insert(q1);
  std::set<std::string> cone2 = s.tdeps(q2);
  cone2.insert(q2);
  std::set<std::string> out;
  for (const auto& p : cone1)
    if (cone2.count(p)) out.insert(p);
  return out;
}

// Within a shared set, a predicate with the largest transitive-dependency
// count is maximal in the cone order (cones of shared members are nested or
// incomparable, and a strict descendant has strictly fewer tdeps).
std::string pick_maximal(const System& s, const std::set<std::string>& shared) {
  std::string best;
  size_t best_size = 0;
  for (const auto& p : shared) {
    size_t sz = s.tdeps(p).size();
    if (best.empty() || sz > best_size || (sz == best_size && p < best)) {
      best = p;
      best_size = sz;
    }
  }
  return best;
}

struct PairWitness {
  size_t i = 0, j = 0;    // body positions of the sibling occurrences
  bool duplicate = false; // same predicate twice
};

// First sibling pair of clause c for which `pred` is shared; nullopt if none.
std::optional<PairWitness> find_pair(const System& s, const Clause& c,
                                     const std::string& pred) {
  for (size_t i = 0; i < c.body.size(); ++i) {
    for (size_t j = i + 1; j < c.body.size(); ++j) {
      const auto& q1 = c.body[i].pred;
      const auto& q2 = c.body[j].pred;
      if (q1 == q2) {
        if (q1 == pred) return PairWitness{i, j, true};
        continue;
      }
      if (in_cone(s, q1, pred) && in_cone(s, q2, pred))
        return PairWitness{i, j, false};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<SharedDep> shared_rel(const System& s) {
  if (!s.is_recursion_free())
    throw NotRecursionFree("shared_rel requires a recursion-free system");
  for (const auto& c : s.clauses()) {
    for (size_t i = 0; i < c.body.size(); ++i) {
      for (size_t j = i + 1; j < c.body.size(); ++j) {
        const auto& q1 = c.body[i].pred;
        const auto& q2 = c.body[j].pred;
        if (q1 == q2) return SharedDep{c.id, q1};
        auto shared = shared_of_pair(s, q1, q2);
        if (!shared.empty())
          return SharedDep{c.id, pick_maximal(s, shared)};
      }
    }
  }
  return std::nullopt;
}

std::set<std::string> clause_var_names(const System& s) {
  std::set<std::string> used;
  for (const auto& c : s.clauses()) {
    if (c.head)
      for (const auto& v : c.head->args) used.insert(v.name);
    for (const auto& app : c.body)
      for (const auto& v : app.args) used.insert(v.name);
    for (const auto& v : vocab(c.constraint)) used.insert(v.name);
  }
  return used;
}

Clause freshen_clause_vars(const Clause& c, std::set<std::string>& used) {
  std::map<Var, Var> ren;
  auto freshen = [&](const Var& v) {
    if (ren.count(v)) return;
    int k = 1;
    std::string name;
    do {
      name = v.name + "!d" + std::to_string(k++);
    } while (used.count(name));
    used.insert(name);
    ren[v] = Var{name, v.sort};
  };
  if (c.head)
    for (const auto& v : c.head->args) freshen(v);
  for (const auto& app : c.body)
    for (const auto& v : app.args) freshen(v);
  for (const auto& v : vocab(c.constraint)) freshen(v);

  Clause out = c;
  out.constraint = substitute(c.constraint, ren);
  auto fix = [&](PredApp& app) {
    for (auto& v : app.args) v = ren.at(v);
  };
  if (out.head) fix(*out.head);
  for (auto& app : out.body) fix(app);
  return out;
}

namespace {

struct CopyResult {
  System system;
  std::string fresh;
};

CopyResult copy_rel_impl(const System& s, int clause_id, const std::string& pred) {
  const Clause& c = s.clause(clause_id);
  if (!s.preds().count(pred)) throw UnknownPredicate(pred);
  auto pair = find_pair(s, c, pred);
  if (!pair)
    throw NotShared("(" + std::to_string(clause_id) + ", " + pred +
                    ") is not a sibling-shared dependency");

  // Fresh predicate name "pred!k".
  std::string fresh;
  for (int k = 1;; ++k) {
    fresh = pred + "!" + std::to_string(k);
    if (!s.preds().count(fresh)) break;
  }
  const Predicate& orig = s.pred(pred);
  Predicate copy{fresh, {}};
  for (size_t i = 0; i < orig.params.size(); ++i)
    copy.params.push_back(
        Var{fresh + "!" + std::to_string(i), orig.params[i].sort});

  // Occurrences to rewire: for a duplicate, the later occurrence in this
  // body; otherwise every occurrence of pred on the later sibling's side
  // (clauses whose head lies in cone(q2) but not in cone(q1)).
  const std::string& q1 = c.body[pair->i].pred;
  const std::string& q2 = c.body[pair->j].pred;

  auto on_q2_side = [&](const std::string& head) {
    return in_cone(s, q2, head) && !in_cone(s, q1, head);
  };

  std::map<std::string, Predicate> preds = s.preds();
  preds.emplace(fresh, copy);

  std::vector<Clause> clauses;
  int max_id = 0;
  for (const auto& cl : s.clauses()) max_id = std::max(max_id, cl.id);

  for (const auto& cl : s.clauses()) {
    Clause out = cl;
    if (pair->duplicate) {
      if (cl.id == clause_id) out.body[pair->j].pred = fresh;
    } else if (cl.id == clause_id && pred == q2) {
      out.body[pair->j].pred = fresh;
    } else if (cl.head && on_q2_side(cl.head->pred)) {
      for (auto& app : out.body)
        if (app.pred == pred) app.pred = fresh;
    }
    clauses.push_back(std::move(out));
  }

  std::set<std::string> used = clause_var_names(s);
  for (const Clause* def : s.defining_clauses(pred)) {
    Clause dup = freshen_clause_vars(*def, used);
    dup.id = ++max_id;
    dup.head->pred = fresh;
    clauses.push_back(std::move(dup));
  }

  return CopyResult{assemble_system(std::move(preds), std::move(clauses),
                                    s.query_id()),
                    fresh};
}

}  // namespace

System copy_rel(const System& s, int clause_id, const std::string& pred) {
  return copy_rel_impl(s, clause_id, pred).system;
}

Expansion expand(const System& s, size_t budget) {
  if (!s.is_recursion_free())
    throw NotRecursionFree("expand requires a recursion-free system");
  Expansion e;
  e.system = s;
  for (const auto& [name, p] : s.preds()) e.corr.to_origin[name] = name;
  size_t copies = 0;
  while (auto dep = shared_rel(e.system)) {
    if (++copies > budget)
      throw ExpansionBudget("expansion budget of " + std::to_string(budget) +
                            " predicate copies exceeded");
    CopyResult r = copy_rel_impl(e.system, dep->clause_id, dep->pred);
    e.corr.to_origin[r.fresh] = e.corr(dep->pred);
    e.system = std::move(r.system);
  }
  return e;
}

std::string check_correspondence(const System& origin, const System& expanded,
                                 const Correspondence& corr) {
  // Totality and condition (3): surjectivity onto the original predicates.
  std::set<std::string> image;
  for (const auto& [name, p] : expanded.preds()) {
    const std::string& o = corr(name);
    if (!origin.preds().count(o))
      return "correspondence maps " + name + " to unknown predicate " + o;
    image.insert(o);

    // Condition (1): identical parameter lists (arity and sorts).
    const Predicate& po = origin.pred(o);
    if (po.params.size() != p.params.size())
      return "parameter count of " + name + " differs from " + o;
    for (size_t i = 0; i < p.params.size(); ++i)
      if (p.params[i].sort != po.params[i].sort)
        return "parameter sorts of " + name + " differ from " + o;
  }
  for (const auto& [name, p] : origin.preds())
    if (!image.count(name)) return "no expansion predicate maps to " + name;

  // Condition (2): the image of every clause is a clause of the original.
  std::set<std::string> origin_keys;
  for (const auto& c : origin.clauses()) origin_keys.insert(clause_key(c));
  for (const auto& c : expanded.clauses()) {
    std::string key = clause_key(c, corr.to_origin);
    if (!origin_keys.count(key))
      return "image of clause " + std::to_string(c.id) +
             " is not a clause of the original system";
  }
  return "";
}

}  // namespace shara
