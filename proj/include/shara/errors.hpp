#pragma once

#include <stdexcept>
#include <string>

namespace shara {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SortError : Error {
  using Error::Error;
};

struct UnknownPredicate : Error {
  explicit UnknownPredicate(const std::string& name)
      : Error("unknown predicate: " + name) {}
};

struct NotRecursionFree : Error {
  using Error::Error;
};

struct NotCDD : Error {
  using Error::Error;
};

struct NotShared : Error {
  using Error::Error;
};

struct ExpansionBudget : Error {
  using Error::Error;
};

struct IncompleteSolution : Error {
  using Error::Error;
};

struct CorrespondenceError : Error {
  using Error::Error;
};

// Syntax error with source position (1-based line/column).
struct ParseError : Error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

struct UnsupportedFeature : Error {
  using Error::Error;
};

struct NoQuery : Error {
  using Error::Error;
};

// The builtin decision procedure ran out of its cube budget.
struct ResourceExhausted : Error {
  using Error::Error;
};

// External interpolation process crashed or could not be spawned.
// Distinct from an Unknown result so drivers may retry.
struct BackendError : Error {
  using Error::Error;
};

// A backend reported Unknown; never converted to sat/unsat downstream.
struct SolverUnknown : Error {
  using Error::Error;
};

struct ValidationUnknown : Error {
  using Error::Error;
};

struct OracleTooLarge : Error {
  using Error::Error;
};

}  // namespace shara
