#pragma once

#include <map>
#include <string>
#include <vector>

#include "shara/chc.hpp"

namespace shara {

// Map from predicate name to its interpretation over the canonical
// parameters of that predicate.
using Solution = std::map<std::string, Formula>;

// Reads a system from the SMT-LIB2 HORN subset: set-logic HORN,
// declare-fun/declare-const, asserted (universally quantified) implications
// with a predicate application or `false` head, check-sat. Boolean clause
// variables are encoded as 0/1-constrained Int.
System parse_horn(const std::string& text);

// Serializes a system back to the HORN subset; parse_horn(print_horn(s)) is
// isomorphic to s.
std::string print_horn(const System& s);

// One define-fun per predicate over its canonical parameters.
std::string print_solution(const Solution& sigma, const System& s);

// Reads a define-fun script produced by print_solution (or compatible).
Solution parse_solution(const std::string& text, const System& s);

// Term-level entry points used by the external backend and by tests.
// `env` maps symbol names to variables in scope.
Formula parse_formula(const std::string& text, const std::map<std::string, Var>& env);

struct ModelValue {
  std::string name;
  Rat value;     // arithmetic
  bool boolean;  // when is_bool
  bool is_bool = false;
};
std::vector<ModelValue> parse_value_pairs(const std::string& text);

// Native line-oriented debug format:
//   pred P(Int, Int)
//   P(x, y) <- [Q(x)] ; (= y 0)
//   false <- [P(x, y)] ; (< y 0)
System parse_native(const std::string& text);
std::string print_native(const System& s);

}  // namespace shara
