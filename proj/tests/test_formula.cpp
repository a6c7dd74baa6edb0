#include "shara/formula.hpp"

#include "doctest.h"
#include "shara/errors.hpp"
#include "support.hpp"

using namespace shara;
using namespace shara::test;

TEST_CASE("vocab collects free variables") {
  Var abs1 = iv("abs1"), n = iv("n");
  Var b{"b!L6", Sort::Bool};
  Formula f = Formula::conj({Formula::eq({{abs1, Rat(1)}, {n, Rat(-1)}}, Rat(0)),
                             Formula::bool_atom(b)});
  CHECK(vocab(f) == std::set<Var>{abs1, n, b});

  CHECK(vocab(Formula::truth(true)).empty());

  Formula dup = Formula::disj({Formula::ge({{iv("x"), Rat(1)}}, Rat(0)),
                               Formula::ge({{iv("x"), Rat(1)}}, Rat(0))});
  CHECK(vocab(dup) == std::set<Var>{iv("x")});
}

TEST_CASE("conjunction and disjunction normal form") {
  Formula a = Formula::ge({{iv("x"), Rat(1)}}, Rat(0));
  Formula b = Formula::lt({{iv("y"), Rat(1)}}, Rat(2));
  // flat, sorted, deduplicated
  Formula f = Formula::conj({b, Formula::conj({a, b}), a});
  REQUIRE(f.kind() == FKind::And);
  CHECK(f.children().size() == 2);
  CHECK(Formula::conj({a, b}) == f);
  // constants fold
  CHECK(Formula::conj({a, Formula::truth(true)}) == a);
  CHECK(Formula::conj({a, Formula::truth(false)}).is_false());
  CHECK(Formula::disj({}).is_false());
  CHECK(Formula::conj({}).is_true());
}

TEST_CASE("substitute renames and respects sorts") {
  Var x = iv("x"), d = iv("d"), abs1 = iv("abs1"), res = iv("res");
  // d = 2*x  under  {x -> abs1, d -> res}
  Formula f = Formula::eq({{d, Rat(1)}, {x, Rat(-2)}}, Rat(0));
  Formula g = substitute(f, {{x, abs1}, {d, res}});
  CHECK(g == Formula::eq({{res, Rat(1)}, {abs1, Rat(-2)}}, Rat(0)));
  CHECK(vocab(g) == std::set<Var>{abs1, res});

  CHECK(substitute(f, {}) == f);

  Formula n_ge = Formula::ge({{iv("n"), Rat(1)}}, Rat(0));
  CHECK(substitute(n_ge, {{iv("n"), iv("m")}}) ==
        Formula::ge({{iv("m"), Rat(1)}}, Rat(0)));

  CHECK_THROWS_AS(substitute(n_ge, {{iv("n"), rv("q")}}), SortError);
}

TEST_CASE("substitute composition on disjoint domains") {
  FormulaGen gen(7);
  for (int i = 0; i < 30; ++i) {
    Formula f = gen.gen(3);
    std::map<Var, Var> m1{{iv("g0"), iv("h0")}, {iv("g1"), iv("h1")}};
    std::map<Var, Var> m2{{iv("h0"), iv("k0")}, {iv("g2"), iv("k2")}};
    // m2 after m1 equals the composed map when domains avoid ranges
    std::map<Var, Var> composed{{iv("g0"), iv("k0")},
                                {iv("g1"), iv("h1")},
                                {iv("g2"), iv("k2")}};
    CHECK(substitute(substitute(f, m1), m2) == substitute(f, composed));
  }
}

TEST_CASE("vocab of substitute matches the set equation") {
  FormulaGen gen(11);
  for (int i = 0; i < 30; ++i) {
    Formula f = gen.gen(3);
    std::map<Var, Var> m{{iv("g0"), iv("z0")}, {iv("g3"), iv("z3")}};
    std::set<Var> expected;
    for (const auto& v : vocab(f)) {
      auto it = m.find(v);
      expected.insert(it == m.end() ? v : it->second);
    }
    CHECK(vocab(substitute(f, m)) == expected);
  }
}

TEST_CASE("nnf_dnf on simple shapes") {
  Var a{"a", Sort::Bool}, p{"p", Sort::Bool}, b{"b", Sort::Bool}, q{"q", Sort::Bool};
  Formula f = Formula::disj({Formula::conj({Formula::bool_atom(a), Formula::bool_atom(p)}),
                             Formula::conj({Formula::bool_atom(b), Formula::bool_atom(q)})});
  auto cubes = nnf_dnf(f);
  CHECK(cubes.size() == 2);

  // not (x < 0)  ->  x >= 0
  Formula neg = Formula::negate(Formula::lt({{iv("x"), Rat(1)}}, Rat(0)));
  auto cubes2 = nnf_dnf(neg);
  REQUIRE(cubes2.size() == 1);
  CHECK(cubes2[0] == Formula::ge({{iv("x"), Rat(1)}}, Rat(0)));
}

TEST_CASE("nnf_dnf equivalence against grid evaluation") {
  FormulaGen gen(23);
  for (int round = 0; round < 40; ++round) {
    Formula f = gen.gen(3);
    auto cubes = nnf_dnf(f);
    Formula dnf = Formula::disj(cubes);
    gen.for_each_grid_point(-2, 2, [&](const Model& m) {
      CHECK(eval(f, m) == eval(dnf, m));
    });
  }
}

TEST_CASE("nnf_dnf respects the cube budget") {
  // (a0 or b0) and (a1 or b1) and ... blows up to 2^n cubes
  std::vector<Formula> parts;
  for (int i = 0; i < 10; ++i) {
    Var a{"a" + std::to_string(i), Sort::Bool};
    Var b{"b" + std::to_string(i), Sort::Bool};
    parts.push_back(Formula::disj({Formula::bool_atom(a), Formula::bool_atom(b)}));
  }
  Formula f = Formula::conj(parts);
  CHECK_THROWS_AS(nnf_dnf(f, 100), ResourceExhausted);
  CHECK(nnf_dnf(f, 2000).size() == 1024);
}

TEST_CASE("negation of equalities splits into two cubes") {
  Formula ne = Formula::negate(Formula::eq({{iv("x"), Rat(1)}}, Rat(3)));
  auto cubes = nnf_dnf(ne);
  CHECK(cubes.size() == 2);
  Formula back = Formula::disj(cubes);
  Model at3;
  at3.arith[iv("x")] = Rat(3);
  CHECK(!eval(back, at3));
  at3.arith[iv("x")] = Rat(4);
  CHECK(eval(back, at3));
}

TEST_CASE("linear atom canonical form merges terms") {
  // x + x <= 4  and  2x <= 4  and  x <= 2 coincide
  Formula a = Formula::le({{iv("x"), Rat(1)}, {iv("x"), Rat(1)}}, Rat(4));
  Formula b = Formula::le({{iv("x"), Rat(2)}}, Rat(4));
  Formula c = Formula::le({{iv("x"), Rat(1)}}, Rat(2));
  CHECK(a == b);
  CHECK(b == c);
  // zero coefficients vanish; ground atoms fold to constants
  CHECK(Formula::le({{iv("x"), Rat(0)}}, Rat(1)).is_true());
  CHECK(Formula::lt({}, Rat(0)).is_false());
}

TEST_CASE("smt2 printing uses the standard tokens") {
  Var x = iv("x");
  CHECK(to_smt2(Formula::ge({{x, Rat(1)}}, Rat(0))) == "(>= x 0)");
  CHECK(to_smt2(Formula::le({{x, make_rat(1, 2)}}, Rat(3))) == "(<= x 6)");
  Formula f = Formula::conj({Formula::ge({{x, Rat(1)}}, Rat(0)),
                             Formula::bool_atom(Var{"b!P", Sort::Bool})});
  CHECK(to_smt2(f) == "(and (>= x 0) b!P)");
  CHECK(to_smt2(Formula::eq({{x, Rat(1)}}, make_rat(-1, 2))) ==
        "(= x (- (/ 1 2)))");
}

TEST_CASE("node_count") {
  Formula a = Formula::ge({{iv("x"), Rat(1)}}, Rat(0));
  CHECK(node_count(a) == 1);
  CHECK(node_count(Formula::conj({a, Formula::bool_atom(Var{"u", Sort::Bool})})) == 3);
}
