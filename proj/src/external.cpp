#include "shara/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "shara/errors.hpp"
#include "shara/smt2.hpp"

namespace shara {

Dialect dialect_from_string(const std::string& s) {
  if (s == "smtinterpol") return Dialect::SmtInterpol;
  if (s == "mathsat") return Dialect::MathSat;
  throw Error("unknown interpolation dialect: " + s +
              " (expected smtinterpol or mathsat)");
}

namespace {

// Line-oriented conversation with a child process under a deadline.
class Child {
 public:
  Child(const std::string& cmd, int timeout_ms) {
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::milliseconds(timeout_ms);
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw BackendError("pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw BackendError("fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], 0);
      dup2(from_child[1], 1);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", cmd.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
    fcntl(out_, F_SETFL, O_NONBLOCK);
  }

  ~Child() {
    if (in_ >= 0) close(in_);
    if (out_ >= 0) close(out_);
    if (pid_ > 0) {
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  void send(const std::string& bytes) {
    size_t off = 0;
    while (off < bytes.size()) {
      ssize_t n = write(in_, bytes.data() + off, bytes.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw BackendError("write to external solver failed: " +
                           std::string(strerror(errno)));
      }
      off += static_cast<size_t>(n);
    }
  }

  // Reads one line; throws SolverUnknown on timeout, BackendError on EOF.
  std::string read_line() {
    while (true) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        return line;
      }
      fill();
    }
  }

  // Reads a balanced s-expression (may span lines).
  std::string read_sexp() {
    while (true) {
      size_t start = buf_.find_first_not_of(" \t\r\n");
      if (start != std::string::npos && buf_[start] != '(') {
        // bare atom
        size_t end = buf_.find_first_of(" \t\r\n", start);
        if (end != std::string::npos) {
          std::string atom = buf_.substr(start, end - start);
          buf_.erase(0, end);
          return atom;
        }
      } else if (start != std::string::npos) {
        int depth = 0;
        for (size_t i = start; i < buf_.size(); ++i) {
          if (buf_[i] == '(') ++depth;
          if (buf_[i] == ')' && --depth == 0) {
            std::string sexp = buf_.substr(start, i - start + 1);
            buf_.erase(0, i + 1);
            return sexp;
          }
        }
      }
      fill();
    }
  }

 private:
  void fill() {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline_) throw SolverUnknown("external solver timeout");
    auto remain =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline_ - now);
    pollfd p{out_, POLLIN, 0};
    int rc = poll(&p, 1, static_cast<int>(remain.count()) + 1);
    if (rc < 0) throw BackendError("poll failed");
    if (rc == 0) throw SolverUnknown("external solver timeout");
    char chunk[4096];
    ssize_t n = read(out_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) return;
      throw BackendError("read from external solver failed");
    }
    if (n == 0) throw BackendError("external solver exited before replying");
    buf_.append(chunk, static_cast<size_t>(n));
  }

  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buf_;
  std::chrono::steady_clock::time_point deadline_;
};

std::string sort_token(Sort s) {
  switch (s) {
    case Sort::Int: return "Int";
    case Sort::Rat: return "Real";
    case Sort::Bool: return "Bool";
  }
  return "Int";
}

}  // namespace

std::string ExternalItp::render_script(const ItpQuery& q) const {
  std::set<Var> vars = vocab(q.pre);
  for (const auto& v : vocab(q.post)) vars.insert(v);
  bool any_real = false;
  bool any_int = false;
  for (const auto& v : vars) {
    any_real |= v.sort == Sort::Rat;
    any_int |= v.sort == Sort::Int;
  }
  std::string logic = any_real ? (any_int ? "QF_UFLIRA" : "QF_LRA") : "QF_LIA";

  std::ostringstream os;
  os << "(set-option :print-success false)\n";
  os << "(set-option :produce-interpolants true)\n";
  os << "(set-option :produce-models true)\n";
  os << "(set-logic " << logic << ")\n";
  for (const auto& v : vars)
    os << "(declare-fun " << to_smt2(v) << " () " << sort_token(v.sort) << ")\n";
  switch (cfg_.dialect) {
    case Dialect::SmtInterpol:
      os << "(assert (! " << to_smt2(q.pre) << " :named itpA))\n";
      os << "(assert (! " << to_smt2(q.post) << " :named itpB))\n";
      break;
    case Dialect::MathSat:
      os << "(assert (! " << to_smt2(q.pre) << " :interpolation-group g1))\n";
      os << "(assert (! " << to_smt2(q.post) << " :interpolation-group g2))\n";
      break;
  }
  os << "(check-sat)\n";
  return os.str();
}

ItpResult ExternalItp::itp(const ItpQuery& q) {
  if (cfg_.cmd.empty())
    throw BackendError("no external command configured (--external-cmd)");

  std::string script = render_script(q);
  if (!cfg_.script_log.empty()) {
    std::ofstream log(cfg_.script_log, std::ios::app);
    log << script;
  }

  std::set<Var> vars = vocab(q.pre);
  for (const auto& v : vocab(q.post)) vars.insert(v);

  Child child(cfg_.cmd, cfg_.timeout_ms);
  child.send(script);

  std::string verdict = child.read_line();
  if (verdict == "sat") {
    std::ostringstream get;
    get << "(get-value (";
    bool first = true;
    for (const auto& v : vars) {
      get << (first ? "" : " ") << to_smt2(v);
      first = false;
    }
    get << "))\n";
    child.send(get.str());
    std::string reply = child.read_sexp();
    Model m;
    try {
      std::map<std::string, Var> by_name;
      for (const auto& v : vars) by_name[v.name] = v;
      for (const auto& mv : parse_value_pairs(reply)) {
        auto it = by_name.find(mv.name);
        if (it == by_name.end()) continue;
        if (mv.is_bool) m.bools[it->second] = mv.boolean;
        else m.arith[it->second] = mv.value;
      }
    } catch (const Error& e) {
      return ItpUnknown{"could not parse external model: " + std::string(e.what())};
    }
    if (cfg_.verify &&
        !eval(Formula::conj({q.pre, q.post}), m))
      return ItpUnknown{"external model does not satisfy pre/post"};
    return MutuallySat{std::move(m)};
  }
  if (verdict != "unsat")
    return ItpUnknown{"unexpected check-sat reply: " + verdict};

  switch (cfg_.dialect) {
    case Dialect::SmtInterpol:
      child.send("(get-interpolants itpA itpB)\n");
      break;
    case Dialect::MathSat:
      child.send("(get-interpolant (g1))\n");
      break;
  }
  std::string reply = child.read_sexp();
  std::string term = reply;
  if (cfg_.dialect == Dialect::SmtInterpol) {
    // reply is a parenthesized sequence holding exactly one interpolant
    std::string inner = reply;
    size_t l = inner.find('(');
    size_t r = inner.rfind(')');
    if (l == std::string::npos || r == std::string::npos || r <= l)
      return ItpUnknown{"malformed get-interpolants reply: " + reply};
    term = inner.substr(l + 1, r - l - 1);
  }

  std::map<std::string, Var> env;
  for (const auto& v : vars) env[v.name] = v;
  Formula itp_formula;
  try {
    itp_formula = parse_formula(term, env);
  } catch (const Error& e) {
    return ItpUnknown{"could not parse external interpolant: " +
                      std::string(e.what())};
  }

  if (cfg_.verify) {
    std::string err = check_interpolant(checker_, q, itp_formula);
    if (!err.empty())
      return ItpUnknown{"external interpolant rejected: " + err};
  }
  return Interpolant{std::move(itp_formula)};
}

}  // namespace shara
