#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shara/chc.hpp"
#include "shara/interpolate.hpp"
#include "shara/smt2.hpp"

namespace shara::test {

inline std::string fixture_path(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline System load_s_da() { return parse_horn(read_fixture("s_da.smt2")); }
inline System load_s_dd() { return parse_horn(read_fixture("s_dd.smt2")); }

inline Var iv(const std::string& n) { return Var{n, Sort::Int}; }
inline Var rv(const std::string& n) { return Var{n, Sort::Rat}; }

// Semantic equivalence through the builtin decision procedure.
inline bool equiv(const Formula& a, const Formula& b) {
  return BuiltinSolver().equivalent(a, b);
}

// Random formulas over a fixed small variable pool; used by the grid
// differential tests.
struct FormulaGen {
  std::mt19937_64 rng;
  std::vector<Var> arith;
  std::vector<Var> bools;

  explicit FormulaGen(uint64_t seed) : rng(seed) {
    for (int i = 0; i < 4; ++i) arith.push_back(iv("g" + std::to_string(i)));
    for (int i = 0; i < 2; ++i)
      bools.push_back(Var{"gb" + std::to_string(i), Sort::Bool});
  }

  int range(int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
  }

  Formula atom() {
    if (range(0, 4) == 0)
      return Formula::bool_atom(bools[static_cast<size_t>(range(0, 1))]);
    std::vector<std::pair<Var, Rat>> terms;
    int k = range(1, 2);
    for (int i = 0; i < k; ++i)
      terms.emplace_back(arith[static_cast<size_t>(range(0, 3))],
                         make_rat(range(-2, 2) == 0 ? 1 : range(-2, 2)));
    Rat rhs = make_rat(range(-2, 2));
    switch (range(0, 4)) {
      case 0: return Formula::lt(terms, rhs);
      case 1: return Formula::le(terms, rhs);
      case 2: return Formula::eq(terms, rhs);
      case 3: return Formula::ge(terms, rhs);
      default: return Formula::gt(terms, rhs);
    }
  }

  Formula gen(int depth) {
    if (depth == 0) return atom();
    switch (range(0, 3)) {
      case 0: return Formula::negate(gen(depth - 1));
      case 1:
        return Formula::conj({gen(depth - 1), gen(depth - 1)});
      case 2:
        return Formula::disj({gen(depth - 1), gen(depth - 1)});
      default: return atom();
    }
  }

  // All assignments over a small integer grid plus both boolean polarities.
  template <typename Fn>
  void for_each_grid_point(int lo, int hi, Fn fn) const {
    size_t nb = bools.size();
    std::vector<int> vals(arith.size(), lo);
    while (true) {
      for (size_t mask = 0; mask < (size_t{1} << nb); ++mask) {
        Model m;
        for (size_t i = 0; i < arith.size(); ++i)
          m.arith[arith[i]] = make_rat(vals[i]);
        for (size_t i = 0; i < nb; ++i) m.bools[bools[i]] = (mask >> i) & 1;
        fn(m);
      }
      size_t i = 0;
      for (; i < vals.size(); ++i) {
        if (vals[i] < hi) {
          ++vals[i];
          break;
        }
        vals[i] = lo;
      }
      if (i == vals.size()) break;
    }
  }
};

}  // namespace shara::test
