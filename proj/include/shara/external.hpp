#pragma once

#include <string>

#include "shara/interpolate.hpp"

namespace shara {

enum class Dialect { SmtInterpol, MathSat };

Dialect dialect_from_string(const std::string& s);

struct ExternalConfig {
  std::string cmd;  // run through /bin/sh -c
  Dialect dialect = Dialect::SmtInterpol;
  int timeout_ms = 30000;
  bool verify = true;          // re-check interpolants with the builtin solver
  std::string script_log;      // when set, the exact script bytes are appended here
};

// Interpolation through an external SMT-LIB2 interpolating solver. One child
// process per query; concurrent queries each own their process.
class ExternalItp : public ItpBackend {
 public:
  explicit ExternalItp(ExternalConfig cfg) : cfg_(std::move(cfg)) {}

  ItpResult itp(const ItpQuery& q) override;
  std::string name() const override { return "external"; }

  // The script prefix sent before check-sat; exposed for contract tests.
  std::string render_script(const ItpQuery& q) const;

 private:
  ExternalConfig cfg_;
  BuiltinSolver checker_;
};

}  // namespace shara
