#pragma once

#include <gmpxx.h>

#include <string>

namespace shara {

// All arithmetic is exact; Fourier-Motzkin and entailment checks are
// unsound under floating point.
using Rat = mpq_class;

inline Rat make_rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat make_rat(const mpz_class& num, const mpz_class& den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Parses an integer or decimal literal ("42", "-7", "2.5").
Rat rat_from_string(const std::string& text);

// Plain text form, e.g. "3", "-1/2".
std::string rat_to_string(const Rat& r);

}  // namespace shara
