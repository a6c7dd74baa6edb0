#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "shara/errors.hpp"
#include "shara/expand.hpp"
#include "shara/external.hpp"
#include "shara/oracle.hpp"
#include "shara/smt2.hpp"
#include "shara/solver.hpp"

using namespace shara;

namespace {

// Exit codes: 0 sat/pass, 1 unsat/fail, 2 unknown, 3 usage or error.
constexpr int kSat = 0;
constexpr int kUnsat = 1;
constexpr int kUnknown = 2;
constexpr int kError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

System load_system(const std::string& path) {
  std::string text = read_file(path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".chc")
    return parse_native(text);
  return parse_horn(text);
}

struct BackendOpts {
  std::string backend = "builtin";
  std::string external_cmd;
  std::string dialect = "smtinterpol";
  int timeout_ms = 30000;
};

std::unique_ptr<ItpBackend> make_backend(const BackendOpts& o) {
  if (o.backend == "builtin") return std::make_unique<BuiltinItp>();
  if (o.backend == "external") {
    ExternalConfig cfg;
    cfg.cmd = o.external_cmd;
    if (cfg.cmd.empty()) {
      const char* env = std::getenv("CDD_CHC_EXTERNAL_CMD");
      if (env) cfg.cmd = env;
    }
    if (cfg.cmd.empty())
      throw Error("external backend needs --external-cmd or CDD_CHC_EXTERNAL_CMD");
    cfg.dialect = dialect_from_string(o.dialect);
    cfg.timeout_ms = o.timeout_ms;
    return std::make_unique<ExternalItp>(cfg);
  }
  throw Error("unknown backend: " + o.backend);
}

void write_trace(const std::string& path, const SolveStats& stats) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : stats.trace) {
    arr.push_back({{"predicate", t.pred},
                   {"pre-size", t.pre_size},
                   {"post-size", t.post_size},
                   {"itp-time-ms", t.itp_time_ms},
                   {"interpolant", to_smt2(t.interpolant)}});
  }
  std::ofstream out(path);
  out << arr.dump(2) << "\n";
}

void dump_expansion(const std::string& path, const Expansion& e) {
  std::ofstream out(path);
  out << print_horn(e.system);
  std::ofstream corr(path + ".corr");
  for (const auto& [from, to] : e.corr.to_origin)
    corr << from << " -> " << to << "\n";
}

int cmd_solve(const std::string& input, const BackendOpts& bopts, int kmax,
              const std::string& dump_path, const std::string& trace_path) {
  System s = load_system(input);
  auto backend = make_backend(bopts);
  SolveOptions opts;
  SolveStats stats;

  if (!dump_path.empty()) dump_expansion(dump_path, expand(s));

  if (s.is_recursion_free()) {
    auto sigma = shara(s, *backend, opts, &stats);
    if (!trace_path.empty()) write_trace(trace_path, stats);
    if (sigma) {
      std::cout << "sat\n" << print_solution(*sigma, s);
      return kSat;
    }
    std::cout << "unsat\n";
    try {
      OracleResult o = oracle_solvable(s);
      if (!o.solvable && o.witness) {
        std::vector<int> ids;
        collect_clause_ids(*o.witness, ids);
        std::cout << "(refutation (clauses";
        for (int id : ids) std::cout << " " << id;
        std::cout << "))\n";
      }
    } catch (const OracleTooLarge&) {
    }
    return kUnsat;
  }

  RecResult r = solve_recursive(s, kmax, *backend, opts);
  switch (r.outcome) {
    case RecOutcome::Solved:
      std::cout << "sat\n" << print_solution(r.solution, s);
      return kSat;
    case RecOutcome::Refuted:
      std::cout << "unsat\n(refutation (depth " << r.depth << ")";
      if (!r.refutation_trace.empty()) {
        std::cout << " (clauses";
        for (int id : r.refutation_trace) std::cout << " " << id;
        std::cout << ")";
      }
      std::cout << ")\n";
      return kUnsat;
    case RecOutcome::Unknown:
      std::cout << "unknown\n(reason \"" << r.reason << "\")\n";
      return kUnknown;
  }
  return kError;
}

int cmd_classify(const std::string& input, const std::string& dot_path) {
  System s = load_system(input);
  auto labels = s.classify();
  std::vector<Label> order{Label::RecursionFree, Label::Linear,
                           Label::BodyDisjoint, Label::CDD};
  std::string out;
  for (Label l : order)
    if (labels.count(l)) out += (out.empty() ? "" : " ") + label_name(l);
  std::cout << out << "\n";
  if (!dot_path.empty()) {
    std::ofstream dot(dot_path);
    dot << s.to_dot();
  }
  return kSat;
}

int cmd_expand(const std::string& input, const std::string& output) {
  System s = load_system(input);
  Expansion e = expand(s);
  if (output.empty()) {
    std::cout << print_horn(e.system);
    for (const auto& [from, to] : e.corr.to_origin)
      std::cerr << from << " -> " << to << "\n";
  } else {
    dump_expansion(output, e);
  }
  return kSat;
}

int cmd_validate(const std::string& input, const std::string& solution_path) {
  System s = load_system(input);
  Solution sigma = parse_solution(read_file(solution_path), s);
  for (const auto& [name, p] : s.preds())
    if (!sigma.count(name)) {
      std::cout << "fail (no interpretation for " << name << ")\n";
      return kUnsat;
    }
  ValidationResult r = validate(s, sigma);
  if (r.ok) {
    std::cout << "pass\n";
    return kSat;
  }
  std::cout << "fail (clause " << r.failing_clause << ")\n";
  return kUnsat;
}

int cmd_oracle(const std::string& input) {
  System s = load_system(input);
  OracleResult r = oracle_solvable(s);
  if (r.solvable) {
    std::cout << "solvable\n";
    return kSat;
  }
  std::cout << "unsolvable\n";
  std::function<void(const DerivationTree&, int)> dump =
      [&](const DerivationTree& t, int depth) {
        std::cout << std::string(static_cast<size_t>(depth) * 2, ' ')
                  << "clause " << t.clause_id << "\n";
        for (const auto& c : t.children) dump(c, depth + 1);
      };
  dump(*r.witness, 0);
  return kUnsat;
}

int cmd_bench_sizes(const std::string& input, const std::string& gen_profile,
                    uint64_t seed, int depth) {
  System s = [&] {
    if (!input.empty()) return load_system(input);
    if (gen_profile == "diamond-chain") return diamond_chain(depth);
    return gen_system(seed, profile_from_string(gen_profile));
  }();
  ExpansionSizes sizes = expansion_sizes(s);
  std::cout << "cdd clauses=" << sizes.cdd.clauses << " preds=" << sizes.cdd.preds
            << "\n";
  std::cout << "tree clauses=" << sizes.tree.clauses << " preds=" << sizes.tree.preds
            << "\n";
  std::cout << "linear-inline clauses=" << sizes.linear_inline.clauses
            << " preds=" << sizes.linear_inline.preds << "\n";
  return kSat;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CHC solver based on clause-dependence-disjoint expansions"};
  app.require_subcommand(1);

  BackendOpts bopts;
  int kmax = 16;
  std::string input, output, dump_path, trace_path, dot_path, solution_path;
  std::string gen_profile;
  uint64_t seed = 0;
  int depth = 3;

  auto add_backend_flags = [&](CLI::App* cmd) {
    cmd->add_option("--backend", bopts.backend, "builtin | external");
    cmd->add_option("--external-cmd", bopts.external_cmd,
                    "shell command for the external interpolating solver");
    cmd->add_option("--dialect", bopts.dialect, "smtinterpol | mathsat");
    cmd->add_option("--timeout-ms", bopts.timeout_ms, "external solver timeout");
  };

  auto* solve = app.add_subcommand("solve", "solve a CHC system");
  solve->add_option("input", input)->required();
  add_backend_flags(solve);
  solve->add_option("--kmax", kmax, "unwinding bound for recursive systems");
  solve->add_option("--dump-expansion", dump_path,
                    "write the CDD expansion and its correspondence map");
  solve->add_option("--trace", trace_path, "write a JSON interpolation trace");

  auto* classify = app.add_subcommand("classify", "print class labels");
  classify->add_option("input", input)->required();
  classify->add_option("--dot", dot_path, "write the dependency hypergraph");

  auto* expand_cmd = app.add_subcommand("expand", "write a minimal CDD expansion");
  expand_cmd->add_option("input", input)->required();
  expand_cmd->add_option("-o,--output", output);

  auto* validate_cmd = app.add_subcommand("validate", "check a solution file");
  validate_cmd->add_option("input", input)->required();
  validate_cmd->add_option("solution", solution_path)->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "derivation-tree ground truth");
  oracle_cmd->add_option("input", input)->required();

  auto* bench = app.add_subcommand("bench-sizes", "expansion size comparison");
  bench->add_option("input", input);
  bench->add_option("--gen", gen_profile,
                    "linear | body-disjoint | dag | cdd | diamond-chain");
  bench->add_option("--seed", seed);
  bench->add_option("--depth", depth, "diamond-chain depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kError;
  }

  try {
    if (*solve) return cmd_solve(input, bopts, kmax, dump_path, trace_path);
    if (*classify) return cmd_classify(input, dot_path);
    if (*expand_cmd) return cmd_expand(input, output);
    if (*validate_cmd) return cmd_validate(input, solution_path);
    if (*oracle_cmd) return cmd_oracle(input);
    if (*bench) {
      if (input.empty() && gen_profile.empty())
        throw Error("bench-sizes needs an input file or --gen");
      return cmd_bench_sizes(input, gen_profile, seed, depth);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
