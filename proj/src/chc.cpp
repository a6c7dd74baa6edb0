#include "shara/chc.hpp"

#include <algorithm>
#include <sstream>

#include "shara/errors.hpp"

namespace shara {

Var indicator(const std::string& pred_name) {
  return Var{"b!" + pred_name, Sort::Bool};
}

std::string label_name(Label l) {
  switch (l) {
    case Label::RecursionFree: return "recursion-free";
    case Label::Linear: return "linear";
    case Label::BodyDisjoint: return "body-disjoint";
    case Label::CDD: return "cdd";
  }
  return "?";
}

namespace {

Formula lin_term_eq(const Var& lhs, const LinTerm& t) {
  std::vector<std::pair<Var, Rat>> terms{{lhs, Rat(1)}};
  for (const auto& [v, c] : t.coeffs) terms.emplace_back(v, Rat(-c));
  return Formula::eq(std::move(terms), t.constant);
}

}  // namespace

System System::build(const std::vector<Predicate>& decls,
                     const std::vector<RawClause>& raw) {
  std::map<std::string, Predicate> preds;
  for (const auto& d : decls) {
    Predicate p{d.name, {}};
    for (size_t i = 0; i < d.params.size(); ++i)
      p.params.push_back(Var{d.name + "!" + std::to_string(i), d.params[i].sort});
    if (!preds.emplace(d.name, std::move(p)).second)
      throw Error("duplicate predicate declaration: " + d.name);
  }

  // Reserved names: canonical parameters and the indicator namespace.
  std::set<std::string> reserved;
  for (const auto& [n, p] : preds)
    for (const auto& v : p.params) reserved.insert(v.name);

  std::vector<RawClause> work = raw;

  // Merge multiple queries through a fresh nullary predicate.
  size_t n_queries = 0;
  for (const auto& c : work)
    if (!c.head) ++n_queries;
  if (n_queries == 0) throw NoQuery("system has no query clause");
  if (n_queries > 1) {
    std::string bad = "bad!";
    while (preds.count(bad)) bad += "!";
    preds.emplace(bad, Predicate{bad, {}});
    for (auto& c : work)
      if (!c.head) c.head = RawApp{bad, {}};
    RawClause q;
    q.body.push_back(RawApp{bad, {}});
    q.constraint = Formula::truth(true);
    work.push_back(std::move(q));
  }

  std::vector<Clause> clauses;
  std::set<std::string> used = reserved;
  int next_id = 1;
  for (const auto& rc : work) {
    Clause c;
    c.id = next_id++;
    c.constraint = rc.constraint;
    int fresh_count = 0;

    auto flatten = [&](const RawApp& app) {
      auto it = preds.find(app.pred);
      if (it == preds.end()) throw UnknownPredicate(app.pred);
      const Predicate& decl = it->second;
      if (decl.params.size() != app.args.size())
        throw Error("arity mismatch for " + app.pred + ": expected " +
                    std::to_string(decl.params.size()) + ", got " +
                    std::to_string(app.args.size()));
      PredApp out{app.pred, {}};
      std::set<std::string> seen;
      for (size_t i = 0; i < app.args.size(); ++i) {
        Sort want = decl.params[i].sort;
        const auto& arg = app.args[i];
        const Var* v = std::get_if<Var>(&arg);
        if (v && v->sort != want)
          throw SortError("argument " + v->name + " of " + app.pred +
                          " has sort " + sort_name(v->sort) + ", expected " +
                          sort_name(want));
        if (v && !seen.count(v->name)) {
          seen.insert(v->name);
          out.args.push_back(*v);
          continue;
        }
        Var fresh{"t!" + std::to_string(fresh_count++), want};
        while (seen.count(fresh.name))
          fresh.name += "'";
        seen.insert(fresh.name);
        LinTerm t;
        if (v) t.coeffs[*v] = 1;
        else t = std::get<LinTerm>(arg);
        c.constraint =
            Formula::conj({c.constraint, lin_term_eq(fresh, t)});
        out.args.push_back(fresh);
      }
      return out;
    };

    if (rc.head) c.head = flatten(*rc.head);
    for (const auto& app : rc.body) c.body.push_back(flatten(app));

    // Rename clause-local variables apart across clauses. First occurrence
    // keeps its name when free; later clashes get a "!c<id>" suffix.
    std::vector<Var> order;
    std::set<Var> in_clause;
    auto note = [&](const Var& v) {
      if (in_clause.insert(v).second) order.push_back(v);
    };
    if (c.head)
      for (const auto& v : c.head->args) note(v);
    for (const auto& app : c.body)
      for (const auto& v : app.args) note(v);
    for (const auto& v : vocab(c.constraint)) note(v);

    std::map<Var, Var> ren;
    for (const auto& v : order) {
      std::string name = v.name;
      if (used.count(name) || name.rfind("b!", 0) == 0) {
        name = v.name + "!c" + std::to_string(c.id);
        int k = 0;
        while (used.count(name))
          name = v.name + "!c" + std::to_string(c.id) + "." + std::to_string(k++);
      }
      used.insert(name);
      if (name != v.name) ren[v] = Var{name, v.sort};
    }
    if (!ren.empty()) {
      c.constraint = substitute(c.constraint, ren);
      auto fix = [&](PredApp& app) {
        for (auto& v : app.args) {
          auto it = ren.find(v);
          if (it != ren.end()) v = it->second;
        }
      };
      if (c.head) fix(*c.head);
      for (auto& app : c.body) fix(app);
    }
    clauses.push_back(std::move(c));
  }

  int query_id = 0;
  for (const auto& c : clauses)
    if (!c.head) query_id = c.id;

  return assemble_system(std::move(preds), std::move(clauses), query_id);
}

System assemble_system(std::map<std::string, Predicate> preds,
                       std::vector<Clause> clauses, int query_id) {
  System s;
  s.preds_ = std::move(preds);
  s.clauses_ = std::move(clauses);
  s.query_id_ = query_id;
  size_t queries = 0;
  for (const auto& c : s.clauses_) {
    if (!c.head) ++queries;
    if (c.head && !s.preds_.count(c.head->pred))
      throw UnknownPredicate(c.head->pred);
    for (const auto& app : c.body)
      if (!s.preds_.count(app.pred)) throw UnknownPredicate(app.pred);
  }
  if (queries != 1) throw NoQuery("system must have exactly one query clause");
  s.index();
  return s;
}

void System::index() {
  for (const auto& [n, p] : preds_) {
    deps_[n];
    tdeps_[n];
    dependents_[n];
    siblings_[n];
  }
  for (const auto& c : clauses_) {
    if (c.head)
      for (const auto& app : c.body) deps_[c.head->pred].insert(app.pred);
    for (size_t i = 0; i < c.body.size(); ++i)
      for (size_t j = 0; j < c.body.size(); ++j)
        if (i != j) siblings_[c.body[i].pred].insert(c.body[j].pred);
  }
  // tdeps: closure by worklist over the deps graph.
  for (const auto& [p, direct] : deps_) {
    std::set<std::string> seen;
    std::vector<std::string> stack(direct.begin(), direct.end());
    while (!stack.empty()) {
      std::string q = stack.back();
      stack.pop_back();
      if (!seen.insert(q).second) continue;
      for (const auto& r : deps_.at(q)) stack.push_back(r);
    }
    tdeps_[p] = std::move(seen);
  }
  for (const auto& [p, ts] : tdeps_)
    for (const auto& q : ts) dependents_[q].insert(p);
}

void System::check(const std::string& p) const {
  if (!preds_.count(p)) throw UnknownPredicate(p);
}

const Clause& System::clause(int id) const {
  for (const auto& c : clauses_)
    if (c.id == id) return c;
  throw Error("no clause with id " + std::to_string(id));
}

const Predicate& System::pred(const std::string& name) const {
  check(name);
  return preds_.at(name);
}

const std::set<std::string>& System::deps(const std::string& p) const {
  check(p);
  return deps_.at(p);
}

const std::set<std::string>& System::tdeps(const std::string& p) const {
  check(p);
  return tdeps_.at(p);
}

const std::set<std::string>& System::dependents(const std::string& p) const {
  check(p);
  return dependents_.at(p);
}

const std::set<std::string>& System::siblings(const std::string& p) const {
  check(p);
  return siblings_.at(p);
}

bool System::is_recursion_free() const {
  for (const auto& [p, ts] : tdeps_)
    if (ts.count(p)) return false;
  return true;
}

std::set<Label> System::classify() const {
  std::set<Label> out;
  bool rf = is_recursion_free();
  if (rf) out.insert(Label::RecursionFree);

  bool linear = true;
  bool body_disjoint = true;
  bool no_dup = true;
  std::set<std::string> seen_in_bodies;
  for (const auto& c : clauses_) {
    if (c.body.size() > 1) linear = false;
    std::set<std::string> in_body;
    for (const auto& app : c.body) {
      if (!in_body.insert(app.pred).second) {
        no_dup = false;
        body_disjoint = false;
      }
      if (!seen_in_bodies.insert(app.pred).second) body_disjoint = false;
    }
  }
  if (linear) out.insert(Label::Linear);
  if (body_disjoint) out.insert(Label::BodyDisjoint);

  // CDD: recursion-free, no duplicate occurrence in a single body, and the
  // dependency cones of distinct siblings are disjoint. Cones include the
  // sibling itself: a sibling lying inside another sibling's cone is shared.
  if (rf && no_dup) {
    bool disjoint = true;
    for (const auto& c : clauses_) {
      for (size_t i = 0; i < c.body.size() && disjoint; ++i) {
        for (size_t j = i + 1; j < c.body.size() && disjoint; ++j) {
          const auto& p = c.body[i].pred;
          const auto& q = c.body[j].pred;
          if (p == q) continue;
          const auto& tp = tdeps_.at(p);
          const auto& tq = tdeps_.at(q);
          if (tp.count(q) || tq.count(p)) {
            disjoint = false;
            break;
          }
          for (const auto& x : tp)
            if (tq.count(x)) {
              disjoint = false;
              break;
            }
        }
      }
      if (!disjoint) break;
    }
    if (disjoint) out.insert(Label::CDD);
  }
  return out;
}

std::vector<std::string> System::topo_order() const {
  std::map<std::string, int> pending;  // unresolved dependencies
  for (const auto& [p, d] : deps_) pending[p] = static_cast<int>(d.size());
  std::set<std::string> ready;
  for (const auto& [p, n] : pending)
    if (n == 0) ready.insert(p);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string p = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(p);
    for (const auto& q : dependents_.at(p))
      if (deps_.at(q).count(p) && --pending[q] == 0) ready.insert(q);
  }
  if (order.size() != preds_.size())
    throw NotRecursionFree("dependency graph has a cycle");
  return order;
}

std::vector<const Clause*> System::defining_clauses(const std::string& p) const {
  check(p);
  std::vector<const Clause*> out;
  for (const auto& c : clauses_)
    if (c.head && c.head->pred == p) out.push_back(&c);
  return out;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string System::to_dot() const {
  std::ostringstream os;
  os << "digraph chc {\n";
  for (const auto& [n, p] : preds_)
    os << "  \"" << dot_escape(n) << "\" [shape=circle];\n";
  os << "  bottom [label=\"_|_\", shape=doublecircle];\n";
  for (const auto& c : clauses_) {
    std::string cn = "c" + std::to_string(c.id);
    os << "  " << cn << " [shape=point, xlabel=\"(" << c.id << ") "
       << dot_escape(to_smt2(c.constraint)) << "\"];\n";
    for (const auto& app : c.body)
      os << "  \"" << dot_escape(app.pred) << "\" -> " << cn << ";\n";
    os << "  " << cn << " -> "
       << (c.head ? "\"" + dot_escape(c.head->pred) + "\"" : "bottom") << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string clause_key(const Clause& c,
                       const std::map<std::string, std::string>& pred_map) {
  auto mapped = [&](const std::string& p) {
    auto it = pred_map.find(p);
    return it == pred_map.end() ? p : it->second;
  };
  // Rename variables by first occurrence (head args, body args, constraint
  // vocabulary) so the key is independent of local names.
  std::map<Var, Var> ren;
  int n = 0;
  auto touch = [&](const Var& v) {
    if (!ren.count(v)) ren[v] = Var{"#" + std::to_string(n++), v.sort};
  };
  if (c.head)
    for (const auto& v : c.head->args) touch(v);
  for (const auto& app : c.body)
    for (const auto& v : app.args) touch(v);
  for (const auto& v : vocab(c.constraint)) touch(v);

  std::ostringstream os;
  if (c.head) {
    os << mapped(c.head->pred) << "(";
    for (const auto& v : c.head->args) os << ren.at(v).name << ",";
    os << ")";
  } else {
    os << "false";
  }
  os << " <- ";
  for (const auto& app : c.body) {
    os << mapped(app.pred) << "(";
    for (const auto& v : app.args) os << ren.at(v).name << ",";
    os << ") ";
  }
  os << "; " << to_smt2(substitute(c.constraint, ren));
  return os.str();
}

}  // namespace shara
