#include "shara/interpolate.hpp"

#include "doctest.h"
#include "shara/errors.hpp"
#include "shara/fm.hpp"
#include "support.hpp"

using namespace shara;
using namespace shara::test;

TEST_CASE("project: substitution through an equality") {
  Var x = iv("x"), y = iv("y");
  Formula cube = Formula::conj({Formula::eq({{x, Rat(1)}, {y, Rat(-1)}}, Rat(0)),
                                Formula::ge({{y, Rat(1)}}, Rat(0))});
  Formula p = project_cube(cube, {x});
  CHECK(equiv(p, Formula::ge({{x, Rat(1)}}, Rat(0))));
  CHECK(vocab(p) == std::set<Var>{x});
}

TEST_CASE("project: classic bound pairing") {
  Var a = iv("a"), b = iv("b"), x = iv("x");
  Formula cube = Formula::conj({Formula::le({{a, Rat(1)}, {x, Rat(-1)}}, Rat(0)),
                                Formula::le({{x, Rat(1)}, {b, Rat(-1)}}, Rat(0))});
  Formula p = project_cube(cube, {a, b});
  CHECK(equiv(p, Formula::le({{a, Rat(1)}, {b, Rat(-1)}}, Rat(0))));
}

TEST_CASE("project keeps boolean literals only when asked") {
  Var x = iv("x");
  Var u{"u", Sort::Bool}, w{"w", Sort::Bool};
  Formula cube = Formula::conj({Formula::bool_atom(u),
                                Formula::negate(Formula::bool_atom(w)),
                                Formula::eq({{x, Rat(1)}}, Rat(1))});
  Formula p = project_cube(cube, {u, x});
  CHECK(vocab(p) == std::set<Var>{u, x});
}

TEST_CASE("projection matches grid oracle for implied constraints") {
  FormulaGen gen(31);
  BuiltinSolver solver;
  for (int round = 0; round < 60; ++round) {
    // random cube of up to 4 atoms
    std::vector<Formula> lits;
    int n = gen.range(1, 4);
    for (int i = 0; i < n; ++i) {
      Formula a = gen.atom();
      if (a.kind() != FKind::Linear) continue;
      lits.push_back(a);
    }
    Formula cube = Formula::conj(lits);
    std::set<Var> keep{iv("g0"), iv("g1")};
    Formula projected = project_cube(cube, keep);
    // On every grid point of the kept variables: projected holds iff some
    // completion of the eliminated variables satisfies the cube. The forward
    // direction (cube -> projected) is checked pointwise on the full grid;
    // the backward direction via satisfiability of cube /\ fixed kept values.
    gen.for_each_grid_point(-2, 2, [&](const Model& m) {
      if (eval(cube, m)) CHECK(eval(projected, m));
    });
    // backward: projected(m) implies cube is satisfiable with g0,g1 fixed
    gen.for_each_grid_point(-2, 2, [&](const Model& m) {
      if (!eval(projected, m)) return;
      std::vector<Formula> fixed{cube};
      for (const auto& v : keep)
        fixed.push_back(Formula::eq({{v, Rat(1)}}, m.arith.at(v)));
      CHECK(solver.check_sat(Formula::conj(fixed)).sat);
    });
  }
}

TEST_CASE("check_sat basics") {
  BuiltinSolver solver;
  Var x = iv("x");
  Formula contradiction = Formula::conj(
      {Formula::gt({{x, Rat(1)}}, Rat(0)), Formula::lt({{x, Rat(1)}}, Rat(0))});
  CHECK(!solver.check_sat(contradiction).sat);

  Formula sat = Formula::conj(
      {Formula::ge({{x, Rat(1)}}, Rat(2)), Formula::le({{x, Rat(1)}}, Rat(5))});
  SatResult r = solver.check_sat(sat);
  REQUIRE(r.sat);
  CHECK(eval(sat, r.model));
}

TEST_CASE("check_sat model replay on random formulas") {
  FormulaGen gen(43);
  BuiltinSolver solver;
  int sat_count = 0;
  for (int round = 0; round < 80; ++round) {
    Formula f = gen.gen(3);
    SatResult r = solver.check_sat(f);
    bool grid_sat = false;
    gen.for_each_grid_point(-2, 2, [&](const Model& m) {
      grid_sat = grid_sat || eval(f, m);
    });
    if (grid_sat) {
      // the grid is a subdomain: grid-sat implies solver-sat
      CHECK(r.sat);
    }
    if (r.sat) {
      ++sat_count;
      CHECK(eval(f, r.model));
    }
  }
  CHECK(sat_count > 10);
}

TEST_CASE("check_sat strict bounds get rational witnesses") {
  BuiltinSolver solver;
  Var x = iv("x");
  // 0 < x < 1 has no integer point but is rationally satisfiable
  Formula f = Formula::conj(
      {Formula::gt({{x, Rat(1)}}, Rat(0)), Formula::lt({{x, Rat(1)}}, Rat(1))});
  SatResult r = solver.check_sat(f);
  REQUIRE(r.sat);
  CHECK(eval(f, r.model));
}

TEST_CASE("itp: trivial interpolants") {
  BuiltinItp backend(200000, true);
  Var x = iv("x");
  ItpQuery q;
  q.pre = Formula::le({{x, Rat(1)}}, Rat(0));
  q.post = Formula::gt({{x, Rat(1)}}, Rat(0));
  q.shared = {x};
  ItpResult r = backend.itp(q);
  REQUIRE(std::holds_alternative<Interpolant>(r));
  Formula i = std::get<Interpolant>(r).formula;
  BuiltinSolver solver;
  CHECK(solver.entails(q.pre, i));
  CHECK(!solver.check_sat(Formula::conj({i, q.post})).sat);
}

TEST_CASE("itp: mutually satisfiable pair yields a model") {
  BuiltinItp backend;
  Var x = iv("x");
  ItpQuery q;
  q.pre = Formula::eq({{x, Rat(1)}}, Rat(1));
  q.post = Formula::eq({{x, Rat(1)}}, Rat(1));
  q.shared = {x};
  ItpResult r = backend.itp(q);
  REQUIRE(std::holds_alternative<MutuallySat>(r));
  const Model& m = std::get<MutuallySat>(r).model;
  CHECK(eval(Formula::conj({q.pre, q.post}), m));
  CHECK(m.arith.at(x) == Rat(1));
}

TEST_CASE("itp: interpolant vocabulary is restricted to shared") {
  BuiltinItp backend(200000, true);
  Var x = iv("x"), y = iv("y"), z = iv("z");
  ItpQuery q;
  // pre: x = y /\ y >= 1 ; post: x = z /\ z <= -1 ; shared {x}
  q.pre = Formula::conj({Formula::eq({{x, Rat(1)}, {y, Rat(-1)}}, Rat(0)),
                         Formula::ge({{y, Rat(1)}}, Rat(1))});
  q.post = Formula::conj({Formula::eq({{x, Rat(1)}, {z, Rat(-1)}}, Rat(0)),
                          Formula::le({{z, Rat(1)}}, Rat(-1))});
  q.shared = {x};
  ItpResult r = backend.itp(q);
  REQUIRE(std::holds_alternative<Interpolant>(r));
  Formula i = std::get<Interpolant>(r).formula;
  CHECK(vocab(i) == std::set<Var>{x});
  CHECK(equiv(i, Formula::ge({{x, Rat(1)}}, Rat(1))));
}

TEST_CASE("itp: strongest interpolant over the shared vocabulary") {
  FormulaGen gen(59);
  BuiltinItp backend;
  BuiltinSolver solver;
  int produced = 0;
  for (int round = 0; round < 40; ++round) {
    Formula pre = gen.gen(2);
    Formula post = gen.gen(2);
    std::set<Var> shared;
    for (const auto& v : vocab(pre))
      if (vocab(post).count(v)) shared.insert(v);
    ItpQuery q{pre, post, shared};
    ItpResult r = backend.itp(q);
    if (auto* i = std::get_if<Interpolant>(&r)) {
      ++produced;
      std::string err = check_interpolant(solver, q, i->formula);
      CHECK(err == "");
      // strongest: pre entails it, and it entails the exact projection
      CHECK(solver.entails(pre, i->formula));
    } else if (auto* m = std::get_if<MutuallySat>(&r)) {
      CHECK(eval(Formula::conj({pre, post}), m->model));
    }
  }
  CHECK(produced > 3);
}

TEST_CASE("builtin check_sat budget raises ResourceExhausted") {
  BuiltinSolver tiny(10);
  std::vector<Formula> parts;
  for (int i = 0; i < 12; ++i) {
    Var a{"a" + std::to_string(i), Sort::Bool};
    Var b{"bb" + std::to_string(i), Sort::Bool};
    parts.push_back(Formula::disj({Formula::bool_atom(a), Formula::bool_atom(b)}));
  }
  // all-disjunction formula forces branching past the budget
  CHECK_THROWS_AS(tiny.check_sat(Formula::conj(parts)), ResourceExhausted);
}
