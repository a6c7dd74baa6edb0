#include "shara/oracle.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "shara/errors.hpp"
#include "shara/expand.hpp"

namespace shara {

void collect_clause_ids(const DerivationTree& t, std::vector<int>& out) {
  out.push_back(t.clause_id);
  for (const auto& c : t.children) collect_clause_ids(c, out);
}

namespace {

size_t tree_size(const DerivationTree& t) {
  size_t n = 1;
  for (const auto& c : t.children) n += tree_size(c);
  return n;
}

struct Enumerator {
  const System& s;
  const OracleGuard& guard;
  size_t produced = 0;
  std::map<std::string, std::vector<DerivationTree>> memo;

  void charge(size_t n = 1) {
    produced += n;
    if (produced > guard.max_trees)
      throw OracleTooLarge("derivation tree enumeration exceeded " +
                           std::to_string(guard.max_trees) + " trees");
  }

  // Cartesian product of child derivations for the body of one clause.
  void combos(const std::vector<std::vector<DerivationTree>>& options,
              std::vector<DerivationTree>& current, size_t idx,
              const std::function<void(std::vector<DerivationTree>)>& emit) {
    if (idx == options.size()) {
      emit(current);
      return;
    }
    for (const auto& child : options[idx]) {
      current.push_back(child);
      combos(options, current, idx + 1, emit);
      current.pop_back();
    }
  }

  const std::vector<DerivationTree>& trees_for(const std::string& pred) {
    auto it = memo.find(pred);
    if (it != memo.end()) return it->second;
    std::vector<DerivationTree> out;
    for (const Clause* c : s.defining_clauses(pred)) {
      std::vector<std::vector<DerivationTree>> options;
      bool dead = false;
      for (const auto& app : c->body) {
        const auto& sub = trees_for(app.pred);
        if (sub.empty()) {
          dead = true;
          break;
        }
        options.push_back(sub);
      }
      if (dead) continue;
      std::vector<DerivationTree> current;
      combos(options, current, 0, [&](std::vector<DerivationTree> children) {
        charge();
        out.push_back(DerivationTree{c->id, std::move(children)});
      });
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const DerivationTree& a, const DerivationTree& b) {
                       return tree_size(a) < tree_size(b);
                     });
    return memo.emplace(pred, std::move(out)).first->second;
  }
};

// Instantiates a derivation with occurrence-level freshening and accumulates
// the constraint.
struct Instantiator {
  const System& s;
  int counter = 0;
  std::vector<Formula> parts;

  // Returns the instantiated head argument variables of the derivation root.
  std::vector<Var> instantiate(const DerivationTree& t) {
    const Clause& c = s.clause(t.clause_id);
    int inst = counter++;
    std::map<Var, Var> ren;
    auto freshen = [&](const Var& v) {
      if (!ren.count(v))
        ren[v] = Var{v.name + "#" + std::to_string(inst), v.sort};
    };
    if (c.head)
      for (const auto& v : c.head->args) freshen(v);
    for (const auto& app : c.body)
      for (const auto& v : app.args) freshen(v);
    for (const auto& v : vocab(c.constraint)) freshen(v);
    parts.push_back(substitute(c.constraint, ren));

    if (c.body.size() != t.children.size())
      throw Error("derivation tree shape does not match clause body");
    for (size_t i = 0; i < c.body.size(); ++i) {
      std::vector<Var> child_args = instantiate(t.children[i]);
      const auto& occ = c.body[i].args;
      for (size_t j = 0; j < occ.size(); ++j)
        parts.push_back(Formula::eq(
            {{ren.at(occ[j]), Rat(1)}, {child_args[j], Rat(-1)}}, Rat(0)));
    }

    std::vector<Var> head_args;
    if (c.head)
      for (const auto& v : c.head->args) head_args.push_back(ren.at(v));
    return head_args;
  }
};

}  // namespace

Formula derivation_constraint(const System& s, const DerivationTree& t) {
  Instantiator inst{s};
  inst.instantiate(t);
  return Formula::conj(std::move(inst.parts));
}

OracleResult oracle_solvable(const System& s, const OracleGuard& guard) {
  if (!s.is_recursion_free())
    throw NotRecursionFree("the oracle handles recursion-free systems only");
  if (s.preds().size() > guard.max_preds)
    throw OracleTooLarge("system has more than " +
                         std::to_string(guard.max_preds) + " predicates");
  if (s.clauses().size() > guard.max_clauses)
    throw OracleTooLarge("system has more than " +
                         std::to_string(guard.max_clauses) + " clauses");

  Enumerator en{s, guard};
  const Clause& q = s.query();
  std::vector<std::vector<DerivationTree>> options;
  bool dead = false;
  for (const auto& app : q.body) {
    const auto& sub = en.trees_for(app.pred);
    if (sub.empty()) {
      dead = true;
      break;
    }
    options.push_back(sub);
  }

  std::vector<DerivationTree> roots;
  if (!dead) {
    std::vector<DerivationTree> current;
    en.combos(options, current, 0, [&](std::vector<DerivationTree> children) {
      en.charge();
      roots.push_back(DerivationTree{q.id, std::move(children)});
    });
  }
  std::stable_sort(roots.begin(), roots.end(),
                   [](const DerivationTree& a, const DerivationTree& b) {
                     return tree_size(a) < tree_size(b);
                   });

  BuiltinSolver solver;
  for (const auto& t : roots) {
    Formula acc = derivation_constraint(s, t);
    SatResult r = solver.check_sat(acc);
    if (r.sat) {
      OracleResult out;
      out.solvable = false;
      out.witness = t;
      out.witness_constraint = acc;
      out.witness_model = std::move(r.model);
      return out;
    }
  }
  return OracleResult{};
}

// ------------------------------------------------------------- generators

GenProfile profile_from_string(const std::string& s) {
  if (s == "linear") return GenProfile::Linear;
  if (s == "body-disjoint") return GenProfile::BodyDisjoint;
  if (s == "dag") return GenProfile::Dag;
  if (s == "cdd") return GenProfile::Cdd;
  throw Error("unknown generator profile: " + s);
}

std::string profile_name(GenProfile p) {
  switch (p) {
    case GenProfile::Linear: return "linear";
    case GenProfile::BodyDisjoint: return "body-disjoint";
    case GenProfile::Dag: return "dag";
    case GenProfile::Cdd: return "cdd";
  }
  return "?";
}

namespace {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(uint64_t seed) : engine(seed) {}
  // Deterministic across platforms: raw engine output with modulo.
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool chance(int percent) { return range(1, 100) <= percent; }
};

struct GenState {
  Rng rng;
  std::vector<Predicate> decls;
  std::vector<RawClause> clauses;
  std::map<std::string, std::set<std::string>> cone;  // incl. the pred itself

  explicit GenState(uint64_t seed) : rng(seed) {}

  Var fresh_var(int& counter, Sort s) {
    return Var{"v" + std::to_string(counter++), s};
  }

  Formula random_atoms(const std::vector<Var>& pool) {
    std::vector<Formula> atoms;
    int n = rng.range(1, 3);
    for (int i = 0; i < n && !pool.empty(); ++i) {
      std::vector<std::pair<Var, Rat>> terms;
      int k = rng.range(1, std::min<int>(2, static_cast<int>(pool.size())));
      std::set<size_t> chosen;
      for (int j = 0; j < k; ++j) {
        size_t idx = static_cast<size_t>(rng.range(0, static_cast<int>(pool.size()) - 1));
        if (!chosen.insert(idx).second) continue;
        int coeff = 0;
        while (coeff == 0) coeff = rng.range(-3, 3);
        terms.emplace_back(pool[idx], make_rat(coeff));
      }
      Rat rhs = make_rat(rng.range(-3, 3));
      switch (rng.range(0, 4)) {
        case 0: atoms.push_back(Formula::lt(terms, rhs)); break;
        case 1: atoms.push_back(Formula::le(terms, rhs)); break;
        case 2: atoms.push_back(Formula::eq(terms, rhs)); break;
        case 3: atoms.push_back(Formula::ge(terms, rhs)); break;
        default: atoms.push_back(Formula::gt(terms, rhs)); break;
      }
    }
    return Formula::conj(std::move(atoms));
  }
};

}  // namespace

System gen_system(uint64_t seed, GenProfile profile) {
  GenState g(seed * 2654435761u + static_cast<uint64_t>(profile));
  int n = g.rng.range(2, 5);
  for (int i = 0; i < n; ++i) {
    std::string name = "P" + std::to_string(i);
    int arity = g.rng.range(1, 2);
    Predicate p{name, {}};
    for (int j = 0; j < arity; ++j) {
      Sort s = g.rng.chance(12) ? Sort::Rat : Sort::Int;
      p.params.push_back(Var{"", s});
    }
    g.decls.push_back(std::move(p));
    g.cone[name] = {name};
  }

  std::set<std::string> used_in_body;  // body-disjoint bookkeeping

  auto pick_body = [&](int head_idx) {
    std::vector<std::string> body;
    int max_preds = head_idx == -1 ? n : head_idx;
    if (max_preds == 0) return body;
    int want = 0;
    switch (profile) {
      case GenProfile::Linear: want = g.rng.range(0, 1); break;
      default: want = g.rng.range(0, 2); break;
    }
    std::set<std::string> cones_taken;
    for (int t = 0; t < want; ++t) {
      std::vector<std::string> candidates;
      for (int i = 0; i < max_preds; ++i) {
        std::string name = "P" + std::to_string(i);
        if (profile == GenProfile::BodyDisjoint &&
            (used_in_body.count(name) ||
             std::find(body.begin(), body.end(), name) != body.end()))
          continue;
        if (profile == GenProfile::Cdd) {
          if (std::find(body.begin(), body.end(), name) != body.end()) continue;
          bool overlap = false;
          for (const auto& m : g.cone[name])
            if (cones_taken.count(m)) overlap = true;
          if (overlap) continue;
        }
        candidates.push_back(name);
      }
      if (candidates.empty()) break;
      std::string pick =
          candidates[static_cast<size_t>(g.rng.range(0, static_cast<int>(candidates.size()) - 1))];
      // The dag profile occasionally duplicates an occurrence.
      if (profile == GenProfile::Dag && !body.empty() && g.rng.chance(10))
        pick = body.back();
      body.push_back(pick);
      if (profile == GenProfile::BodyDisjoint) used_in_body.insert(pick);
      if (profile == GenProfile::Cdd)
        for (const auto& m : g.cone[pick]) cones_taken.insert(m);
    }
    return body;
  };

  auto arity_of = [&](const std::string& name) {
    for (const auto& d : g.decls)
      if (d.name == name) return d.params;
    throw UnknownPredicate(name);
  };

  auto build_clause = [&](int head_idx, const std::vector<std::string>& body) {
    RawClause rc;
    int vc = 0;
    std::vector<Var> pool;
    auto make_args = [&](const std::vector<Var>& params) {
      std::vector<std::variant<Var, LinTerm>> args;
      for (const auto& p : params) {
        bool reuse = !pool.empty() && g.rng.chance(40);
        Var v;
        if (reuse) {
          std::vector<Var> same_sort;
          for (const auto& cand : pool)
            if (cand.sort == p.sort) same_sort.push_back(cand);
          if (!same_sort.empty()) {
            v = same_sort[static_cast<size_t>(
                g.rng.range(0, static_cast<int>(same_sort.size()) - 1))];
            args.emplace_back(v);
            continue;
          }
        }
        v = g.fresh_var(vc, p.sort);
        pool.push_back(v);
        args.emplace_back(v);
      }
      return args;
    };
    if (head_idx >= 0) {
      std::string name = "P" + std::to_string(head_idx);
      rc.head = RawApp{name, make_args(arity_of(name))};
    }
    for (const auto& b : body) rc.body.push_back(RawApp{b, make_args(arity_of(b))});
    rc.constraint = g.random_atoms(pool);
    return rc;
  };

  for (int i = 0; i < n; ++i) {
    int defs = g.rng.range(1, 2);
    for (int d = 0; d < defs; ++d) {
      auto body = pick_body(i);
      g.clauses.push_back(build_clause(i, body));
      std::string name = "P" + std::to_string(i);
      for (const auto& b : body)
        for (const auto& m : g.cone[b]) g.cone[name].insert(m);
    }
  }
  auto qbody = pick_body(-1);
  g.clauses.push_back(build_clause(-1, qbody));

  return System::build(g.decls, g.clauses);
}

System diamond_chain(int depth) {
  std::vector<Predicate> decls;
  std::vector<RawClause> raw;
  auto ivar = [](const std::string& n) { return Var{n, Sort::Int}; };
  auto decl2 = [&](const std::string& n) {
    Predicate p{n, {}};
    p.params = {Var{"", Sort::Int}, Var{"", Sort::Int}};
    decls.push_back(p);
  };
  auto app = [&](const std::string& p, const Var& a, const Var& b) {
    return RawApp{p, {a, b}};
  };

  decl2("X0");
  {
    RawClause c;
    c.head = app("X0", ivar("n"), ivar("a"));
    c.constraint = Formula::eq({{ivar("a"), Rat(1)}}, Rat(0));
    raw.push_back(c);
  }
  for (int i = 1; i <= depth; ++i) {
    std::string L = "L" + std::to_string(i);
    std::string R = "R" + std::to_string(i);
    std::string J = "J" + std::to_string(i);
    std::string X = "X" + std::to_string(i);
    std::string F = "F" + std::to_string(i);
    std::string Xp = "X" + std::to_string(i - 1);
    decl2(L);
    decl2(R);
    decl2(J);
    decl2(X);
    decl2(F);
    Var n = ivar("n"), a = ivar("a"), b = ivar("b"), x = ivar("x"),
        d = ivar("d"), r = ivar("r");
    {
      RawClause c;  // L_i(n,b) <- X_{i-1}(n,a), n >= i, b = a + 1
      c.head = app(L, n, b);
      c.body = {app(Xp, n, a)};
      c.constraint = Formula::conj(
          {Formula::ge({{n, Rat(1)}}, make_rat(i)),
           Formula::eq({{b, Rat(1)}, {a, Rat(-1)}}, Rat(1))});
      raw.push_back(c);
    }
    {
      RawClause c;  // R_i(n,b) <- X_{i-1}(n,a), n < i, b = a + 2
      c.head = app(R, n, b);
      c.body = {app(Xp, n, a)};
      c.constraint = Formula::conj(
          {Formula::lt({{n, Rat(1)}}, make_rat(i)),
           Formula::eq({{b, Rat(1)}, {a, Rat(-1)}}, Rat(2))});
      raw.push_back(c);
    }
    for (const std::string& arm : {L, R}) {
      RawClause c;  // J_i(n,b) <- arm(n,b)
      c.head = app(J, n, b);
      c.body = {app(arm, n, b)};
      c.constraint = Formula::truth(true);
      raw.push_back(c);
    }
    {
      RawClause c;  // F_i(x,d) <- d = x + i
      c.head = app(F, x, d);
      c.constraint = Formula::eq({{d, Rat(1)}, {x, Rat(-1)}}, make_rat(i));
      raw.push_back(c);
    }
    {
      RawClause c;  // X_i(n,r) <- J_i(n,b), F_i(x,d), b = x, r = d
      c.head = app(X, n, r);
      c.body = {app(J, n, b), app(F, x, d)};
      c.constraint = Formula::conj(
          {Formula::eq({{b, Rat(1)}, {x, Rat(-1)}}, Rat(0)),
           Formula::eq({{r, Rat(1)}, {d, Rat(-1)}}, Rat(0))});
      raw.push_back(c);
    }
  }
  {
    RawClause q;  // false <- X_depth(n,r), r < 0
    Var n = ivar("n"), r = ivar("r");
    q.body = {app("X" + std::to_string(depth), n, r)};
    q.constraint = Formula::lt({{r, Rat(1)}}, Rat(0));
    raw.push_back(q);
  }
  return System::build(decls, raw);
}

System shared_leaf_fan(int width) {
  std::vector<Predicate> decls;
  std::vector<RawClause> raw;
  Predicate leaf{"Leaf", {Var{"", Sort::Int}}};
  decls.push_back(leaf);
  {
    RawClause c;
    Var x{"x", Sort::Int};
    c.head = RawApp{"Leaf", {x}};
    c.constraint = Formula::ge({{x, Rat(1)}}, Rat(0));
    raw.push_back(c);
  }
  RawClause query;
  std::vector<std::pair<Var, Rat>> sum;
  for (int i = 1; i <= width; ++i) {
    std::string arm = "Arm" + std::to_string(i);
    decls.push_back(Predicate{arm, {Var{"", Sort::Int}}});
    RawClause c;
    Var x{"x", Sort::Int};
    c.head = RawApp{arm, {x}};
    c.body = {RawApp{"Leaf", {x}}};
    c.constraint = Formula::ge({{x, Rat(1)}}, make_rat(i));
    raw.push_back(c);
    Var q{"q" + std::to_string(i), Sort::Int};
    query.body.push_back(RawApp{arm, {q}});
    sum.emplace_back(q, Rat(1));
  }
  query.constraint = Formula::lt(sum, Rat(0));
  raw.push_back(query);
  return System::build(decls, raw);
}

// ------------------------------------------------------- size comparators

namespace {

constexpr uint64_t kSaturate = 1000000000000000ull;

uint64_t sat_add(uint64_t a, uint64_t b) {
  uint64_t s = a + b;
  return s > kSaturate ? kSaturate : s;
}
uint64_t sat_mul(uint64_t a, uint64_t b) {
  if (a != 0 && b > kSaturate / a) return kSaturate;
  return a * b;
}

struct TreeCounter {
  const System& s;
  std::map<std::string, std::pair<uint64_t, uint64_t>> memo;  // clauses, preds

  std::pair<uint64_t, uint64_t> count(const std::string& pred) {
    auto it = memo.find(pred);
    if (it != memo.end()) return it->second;
    uint64_t clauses = 0;
    uint64_t preds = 1;
    for (const Clause* c : s.defining_clauses(pred)) {
      clauses = sat_add(clauses, 1);
      for (const auto& app : c->body) {
        auto [cc, pp] = count(app.pred);
        clauses = sat_add(clauses, cc);
        preds = sat_add(preds, pp);
      }
    }
    memo[pred] = {clauses, preds};
    return {clauses, preds};
  }
};

struct PathCounter {
  const System& s;
  std::map<std::string, uint64_t> memo;

  uint64_t paths(const std::string& pred) {
    auto it = memo.find(pred);
    if (it != memo.end()) return it->second;
    memo[pred] = 0;  // recursion-free input; placeholder for safety
    uint64_t total = 0;
    for (const Clause* c : s.defining_clauses(pred)) {
      uint64_t per = 1;
      for (const auto& app : c->body) per = sat_mul(per, paths(app.pred));
      total = sat_add(total, per);
    }
    memo[pred] = total;
    return total;
  }
};

// Body member kept (not inlined) by the linear-inlining strategy: the one
// with the largest dependency cone, ties by name.
size_t kept_index(const System& s, const Clause& c) {
  size_t best = 0;
  size_t best_size = 0;
  for (size_t i = 0; i < c.body.size(); ++i) {
    size_t sz = s.tdeps(c.body[i].pred).size() + 1;
    const std::string& name = c.body[i].pred;
    const std::string& bname = c.body[best].pred;
    if (i == 0 || sz > best_size || (sz == best_size && name < bname)) {
      best = i;
      best_size = sz;
    }
  }
  return best;
}

}  // namespace

ExpansionSizes expansion_sizes(const System& s, size_t expansion_budget) {
  if (!s.is_recursion_free())
    throw NotRecursionFree("expansion_sizes requires a recursion-free system");
  ExpansionSizes out;

  Expansion e = expand(s, expansion_budget);
  out.cdd.clauses = e.system.clauses().size();
  out.cdd.preds = e.system.preds().size();

  TreeCounter tc{s};
  uint64_t clauses = 1;  // the query clause itself
  uint64_t preds = 0;
  for (const auto& app : s.query().body) {
    auto [cc, pp] = tc.count(app.pred);
    clauses = sat_add(clauses, cc);
    preds = sat_add(preds, pp);
  }
  out.tree = {clauses, preds};

  // Linear inlining: in every clause with two or more body predicates, the
  // member with the largest cone is kept and the rest are inlined; inlined
  // predicates multiply the host clause by their flat path count.
  PathCounter pc{s};
  std::set<std::string> kept_reachable;
  std::vector<std::string> work;
  uint64_t li_clauses = 0;
  auto process_clause = [&](const Clause& c) {
    uint64_t copies = 1;
    size_t keep = c.body.size() >= 2 ? kept_index(s, c) : 0;
    for (size_t i = 0; i < c.body.size(); ++i) {
      if (c.body.size() >= 2 && i != keep)
        copies = sat_mul(copies, pc.paths(c.body[i].pred));
    }
    li_clauses = sat_add(li_clauses, copies);
    if (!c.body.empty()) {
      const std::string& k = c.body[c.body.size() >= 2 ? keep : 0].pred;
      if (kept_reachable.insert(k).second) work.push_back(k);
    }
  };
  process_clause(s.query());
  while (!work.empty()) {
    std::string p = work.back();
    work.pop_back();
    for (const Clause* c : s.defining_clauses(p)) process_clause(*c);
  }
  out.linear_inline.clauses = li_clauses;
  out.linear_inline.preds = sat_add(kept_reachable.size(), 0);
  return out;
}

}  // namespace shara
