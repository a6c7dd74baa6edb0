#include "shara/solver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include "shara/errors.hpp"
#include "shara/oracle.hpp"

namespace shara {

namespace {

// Builds the renaming of one clause onto canonical parameters: head first,
// then body applications; an argument variable already bound contributes a
// wiring equality instead.
struct Wiring {
  std::map<Var, Var> subst;
  std::vector<Formula> eqs;

  void app(const System& s, const PredApp& a) {
    const Predicate& p = s.pred(a.pred);
    for (size_t i = 0; i < a.args.size(); ++i) {
      const Var& arg = a.args[i];
      const Var& param = p.params[i];
      auto it = subst.find(arg);
      if (it == subst.end()) {
        subst[arg] = param;
      } else {
        eqs.push_back(Formula::eq({{it->second, Rat(1)}, {param, Rat(-1)}}, Rat(0)));
      }
    }
  }
};

}  // namespace

Formula clause_wired(const System& s, const Clause& c) {
  Wiring w;
  if (c.head) w.app(s, *c.head);
  for (const auto& a : c.body) w.app(s, a);
  std::vector<Formula> parts = std::move(w.eqs);
  parts.push_back(substitute(c.constraint, w.subst));
  return Formula::conj(std::move(parts));
}

Formula ctr(const System& s, const std::string& pred, const Solution& sigma) {
  auto it = sigma.find(pred);
  if (it != sigma.end()) return it->second;
  s.pred(pred);  // UnknownPredicate guard
  std::vector<Formula> disjuncts;
  for (const Clause* c : s.defining_clauses(pred)) {
    std::vector<Formula> parts{clause_wired(s, *c)};
    std::set<std::string> seen;
    for (const auto& a : c->body)
      if (seen.insert(a.pred).second)
        parts.push_back(Formula::bool_atom(indicator(a.pred)));
    disjuncts.push_back(Formula::conj(std::move(parts)));
  }
  return Formula::disj(std::move(disjuncts));
}

Formula vc(const System& s, const std::string& pred, const Solution& sigma) {
  return Formula::disj(
      {Formula::negate(Formula::bool_atom(indicator(pred))), ctr(s, pred, sigma)});
}

Formula query_formula(const System& s) {
  const Clause& q = s.query();
  std::vector<Formula> parts{clause_wired(s, q)};
  std::set<std::string> seen;
  for (const auto& a : q.body)
    if (seen.insert(a.pred).second)
      parts.push_back(Formula::bool_atom(indicator(a.pred)));
  return Formula::conj(std::move(parts));
}

Formula pre_formula(const System& s, const std::string& pred, const Solution& sigma) {
  std::vector<Formula> parts{ctr(s, pred, sigma)};
  for (const auto& q : s.deps(pred)) {
    auto it = sigma.find(q);
    if (it == sigma.end())
      throw IncompleteSolution("pre-formula of " + pred +
                               " needs an interpretation for " + q);
    parts.push_back(Formula::disj(
        {Formula::negate(Formula::bool_atom(indicator(q))), it->second}));
  }
  return Formula::conj(std::move(parts));
}

std::set<std::string> post_context(const System& s, const std::string& pred) {
  s.pred(pred);
  std::set<std::string> context;
  std::vector<std::string> work;
  auto push = [&](const std::string& q) {
    if (q != pred && context.insert(q).second) work.push_back(q);
  };
  for (const auto& q : s.dependents(pred)) push(q);
  for (const auto& a : s.query().body) push(a.pred);
  while (!work.empty()) {
    std::string q = work.back();
    work.pop_back();
    for (const Clause* c : s.defining_clauses(q))
      for (const auto& a : c->body) push(a.pred);
  }
  return context;
}

Formula assign_bool(const Formula& f, const Var& b, bool value) {
  switch (f.kind()) {
    case FKind::True:
    case FKind::False:
    case FKind::Linear:
      return f;
    case FKind::BoolAtom:
      return f.bool_var() == b ? Formula::truth(value) : f;
    case FKind::Not:
      return Formula::negate(assign_bool(f.children()[0], b, value));
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& k : f.children()) kids.push_back(assign_bool(k, b, value));
      return f.kind() == FKind::And ? Formula::conj(std::move(kids))
                                    : Formula::disj(std::move(kids));
    }
  }
  return f;
}

Formula post_formula(const System& s, const std::string& pred, const Solution& sigma) {
  std::vector<Formula> parts{query_formula(s)};
  for (const auto& q : post_context(s, pred)) parts.push_back(vc(s, q, sigma));
  Formula post = Formula::conj(std::move(parts));
  return assign_bool(post, indicator(pred), true);
}

namespace {

std::set<Var> indicator_vars(const std::set<Var>& vars) {
  std::set<Var> out;
  for (const auto& v : vars)
    if (v.sort == Sort::Bool && v.name.rfind("b!", 0) == 0) out.insert(v);
  return out;
}

// Clauses whose head and body predicates all have interpretations.
bool clause_fully_interpreted(const Clause& c, const Solution& sigma) {
  if (c.head && !sigma.count(c.head->pred)) return false;
  for (const auto& a : c.body)
    if (!sigma.count(a.pred)) return false;
  return true;
}

}  // namespace

std::optional<Solution> solve_cdd(const System& s, ItpBackend& backend,
                                  const SolveOptions& opts, SolveStats* stats) {
  if (!s.classify().count(Label::CDD))
    throw NotCDD("solve_cdd requires a CDD system");

  Solution sigma;
  for (const auto& pred : s.topo_order()) {
    ItpQuery q;
    q.pre = pre_formula(s, pred, sigma);
    q.post = post_formula(s, pred, sigma);

    q.shared.insert(s.pred(pred).params.begin(), s.pred(pred).params.end());
    std::set<Var> pre_ind = indicator_vars(vocab(q.pre));
    std::set<Var> post_ind = indicator_vars(vocab(q.post));
    for (const auto& v : pre_ind)
      if (post_ind.count(v)) q.shared.insert(v);

    auto started = std::chrono::steady_clock::now();
    ItpResult r = backend.itp(q);
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
    if (stats) {
      ++stats->itp_queries;
      PredTrace t;
      t.pred = pred;
      t.pre_size = node_count(q.pre);
      t.post_size = node_count(q.post);
      t.itp_time_ms = ms;
      if (auto* i = std::get_if<Interpolant>(&r)) t.interpolant = i->formula;
      stats->trace.push_back(std::move(t));
    }

    if (std::holds_alternative<MutuallySat>(r)) return std::nullopt;
    if (auto* u = std::get_if<ItpUnknown>(&r))
      throw SolverUnknown("interpolation backend returned unknown for " + pred +
                          ": " + u->reason);
    Formula interpolant = std::get<Interpolant>(std::move(r)).formula;

    // Vocabulary discipline: stored interpretations range over the canonical
    // parameters only.
    std::set<Var> allowed(s.pred(pred).params.begin(), s.pred(pred).params.end());
    for (const auto& v : vocab(interpolant))
      if (!allowed.count(v))
        throw Error("interpolant for " + pred +
                    " escapes its parameter vocabulary: " + v.name);
    sigma[pred] = std::move(interpolant);

    if (opts.validate_incrementally) {
      BuiltinSolver solver;
      for (const auto& c : s.clauses()) {
        if (!clause_fully_interpreted(c, sigma)) continue;
        ValidationResult v = validate_clause(s, sigma, c, solver);
        if (!v.ok)
          throw Error("partial solution fails on clause " +
                      std::to_string(c.id) + " after solving " + pred);
      }
    }
  }
  return sigma;
}

Solution collapse(const System& origin, const System& expanded,
                  const Correspondence& corr, const Solution& expanded_solution) {
  std::map<std::string, std::vector<Formula>> grouped;
  for (const auto& [pred, f] : expanded_solution) {
    const std::string& o = corr(pred);
    if (!origin.preds().count(o))
      throw CorrespondenceError("collapse: " + pred +
                                " maps to unknown predicate " + o);
    // Rewrite over the original predicate's canonical parameters; legal since
    // correspondences preserve parameter lists.
    const Predicate& pe = expanded.pred(pred);
    const Predicate& po = origin.pred(o);
    std::map<Var, Var> ren;
    for (size_t i = 0; i < pe.params.size(); ++i) ren[pe.params[i]] = po.params[i];
    grouped[o].push_back(substitute(f, ren));
  }
  Solution out;
  for (const auto& [name, p] : origin.preds()) {
    auto it = grouped.find(name);
    if (it == grouped.end())
      throw CorrespondenceError("collapse: no interpretation maps to " + name);
    out[name] = Formula::conj(it->second);
  }
  return out;
}

std::optional<Solution> shara(const System& s, ItpBackend& backend,
                              const SolveOptions& opts, SolveStats* stats) {
  Expansion e = expand(s, opts.expansion_budget);
  auto solved = solve_cdd(e.system, backend, opts, stats);
  if (!solved) return std::nullopt;
  return collapse(s, e.system, e.corr, *solved);
}

std::string level_pred_name(const std::string& pred, int level) {
  return pred + "@" + std::to_string(level);
}

std::optional<std::pair<std::string, int>> split_level_name(const std::string& n) {
  auto at = n.rfind('@');
  if (at == std::string::npos || at + 1 >= n.size()) return std::nullopt;
  for (size_t i = at + 1; i < n.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(n[i]))) return std::nullopt;
  return std::make_pair(n.substr(0, at), std::stoi(n.substr(at + 1)));
}

System unwind(const System& s, int k) {
  if (k < 0) throw Error("unwind requires a non-negative bound");

  // Strongly connected components of the dependency graph (Tarjan).
  std::map<std::string, int> comp;
  {
    int counter = 0;
    int comp_count = 0;
    std::map<std::string, int> low, num;
    std::vector<std::string> stack;
    std::set<std::string> on_stack;
    std::function<void(const std::string&)> dfs = [&](const std::string& p) {
      num[p] = low[p] = counter++;
      stack.push_back(p);
      on_stack.insert(p);
      for (const auto& q : s.deps(p)) {
        if (!num.count(q)) {
          dfs(q);
          low[p] = std::min(low[p], low[q]);
        } else if (on_stack.count(q)) {
          low[p] = std::min(low[p], num[q]);
        }
      }
      if (low[p] == num[p]) {
        while (true) {
          std::string q = stack.back();
          stack.pop_back();
          on_stack.erase(q);
          comp[q] = comp_count;
          if (q == p) break;
        }
        ++comp_count;
      }
    };
    for (const auto& [name, p] : s.preds())
      if (!num.count(name)) dfs(name);
  }

  std::map<std::string, Predicate> preds;
  for (const auto& [name, p] : s.preds()) {
    for (int i = 0; i <= k; ++i) {
      std::string ln = level_pred_name(name, i);
      Predicate lp{ln, {}};
      for (size_t j = 0; j < p.params.size(); ++j)
        lp.params.push_back(Var{ln + "!" + std::to_string(j), p.params[j].sort});
      preds.emplace(ln, lp);
    }
  }

  std::vector<Clause> clauses;
  std::set<std::string> used;
  int next_id = 1;
  int query_id = 0;
  // Clause instances at each level; the query only at level k.
  for (const auto& c : s.clauses()) {
    std::vector<int> levels;
    if (!c.head) levels = {k};
    else for (int i = 0; i <= k; ++i) levels.push_back(i);
    for (int lvl : levels) {
      bool drop = false;
      Clause out = c;
      if (out.head) out.head->pred = level_pred_name(out.head->pred, lvl);
      for (auto& a : out.body) {
        int target = lvl;
        if (c.head && comp.at(a.pred) == comp.at(c.head->pred)) target = lvl - 1;
        if (target < 0) {
          drop = true;
          break;
        }
        a.pred = level_pred_name(a.pred, target);
      }
      if (drop) continue;
      Clause fresh = freshen_clause_vars(out, used);
      fresh.id = next_id++;
      if (!fresh.head) query_id = fresh.id;
      clauses.push_back(std::move(fresh));
    }
  }

  // Prune predicates unreachable from the query.
  System full = assemble_system(std::move(preds), std::move(clauses), query_id);
  std::set<std::string> live;
  for (const auto& a : full.query().body) {
    live.insert(a.pred);
    for (const auto& q : full.tdeps(a.pred)) live.insert(q);
  }
  std::map<std::string, Predicate> live_preds;
  for (const auto& [name, p] : full.preds())
    if (live.count(name)) live_preds.emplace(name, p);
  std::vector<Clause> live_clauses;
  int id = 1;
  int pruned_query = 0;
  for (const auto& c : full.clauses()) {
    if (c.head && !live.count(c.head->pred)) continue;
    Clause out = c;
    out.id = id++;
    if (!out.head) pruned_query = out.id;
    live_clauses.push_back(std::move(out));
  }
  return assemble_system(std::move(live_preds), std::move(live_clauses),
                         pruned_query);
}

ValidationResult validate_clause(const System& s, const Solution& sigma,
                                 const Clause& c, const BuiltinSolver& solver) {
  std::vector<Formula> parts{c.constraint};
  for (const auto& a : c.body) {
    const Predicate& p = s.pred(a.pred);
    std::map<Var, Var> ren;
    for (size_t i = 0; i < p.params.size(); ++i) ren[p.params[i]] = a.args[i];
    parts.push_back(substitute(sigma.at(a.pred), ren));
  }
  if (c.head) {
    const Predicate& p = s.pred(c.head->pred);
    std::map<Var, Var> ren;
    for (size_t i = 0; i < p.params.size(); ++i) ren[p.params[i]] = c.head->args[i];
    parts.push_back(Formula::negate(substitute(sigma.at(c.head->pred), ren)));
  }
  SatResult r = solver.check_sat(Formula::conj(std::move(parts)));
  ValidationResult out;
  if (r.sat) {
    out.ok = false;
    out.failing_clause = c.id;
    out.witness = std::move(r.model);
  }
  return out;
}

ValidationResult validate(const System& s, const Solution& sigma,
                          const BuiltinSolver& solver) {
  for (const auto& [name, p] : s.preds())
    if (!sigma.count(name))
      throw IncompleteSolution("validate: no interpretation for " + name);
  for (const auto& c : s.clauses()) {
    ValidationResult r = validate_clause(s, sigma, c, solver);
    if (!r.ok) return r;
  }
  return ValidationResult{};
}

RecResult solve_recursive(const System& s, int k_max, ItpBackend& backend,
                          const SolveOptions& opts) {
  RecResult result;
  for (int k = 0; k <= k_max; ++k) {
    System u = unwind(s, k);
    auto solved = shara(u, backend, opts);
    if (!solved) {
      result.outcome = RecOutcome::Refuted;
      result.depth = k;
      // Replay a concrete counterexample derivation when the unwinding is
      // within the oracle guard.
      try {
        OracleResult o = oracle_solvable(u);
        if (!o.solvable && o.witness) {
          std::vector<int> trace;
          collect_clause_ids(*o.witness, trace);
          result.refutation_trace = std::move(trace);
        }
      } catch (const OracleTooLarge&) {
      }
      return result;
    }
    // Candidate for the original system: per predicate, the disjunction of
    // its level interpretations over the original canonical parameters.
    Solution candidate;
    for (const auto& [name, p] : s.preds()) {
      std::vector<Formula> parts;
      for (int i = 0; i <= k; ++i) {
        std::string ln = level_pred_name(name, i);
        auto it = solved->find(ln);
        if (it == solved->end()) continue;
        const Predicate& lp = u.pred(ln);
        std::map<Var, Var> ren;
        for (size_t j = 0; j < p.params.size(); ++j) ren[lp.params[j]] = p.params[j];
        parts.push_back(substitute(it->second, ren));
      }
      candidate[name] = Formula::disj(std::move(parts));
    }
    if (validate(s, candidate).ok) {
      result.outcome = RecOutcome::Solved;
      result.solution = std::move(candidate);
      result.depth = k;
      return result;
    }
  }
  result.outcome = RecOutcome::Unknown;
  result.reason = "no inductive solution within unwinding bound " +
                  std::to_string(k_max);
  return result;
}

}  // namespace shara
