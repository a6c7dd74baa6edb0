#include "shara/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "shara/errors.hpp"

namespace shara {

std::string sort_name(Sort s) {
  switch (s) {
    case Sort::Rat: return "Real";
    case Sort::Int: return "Int";
    case Sort::Bool: return "Bool";
  }
  return "?";
}

Rat rat_from_string(const std::string& text) {
  std::string t = text;
  bool neg = false;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  auto dot = t.find('.');
  Rat r;
  if (dot == std::string::npos) {
    r = Rat(mpz_class(t));
  } else {
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    size_t frac = t.size() - dot - 1;
    mpz_class den = 1;
    for (size_t i = 0; i < frac; ++i) den *= 10;
    r = Rat(mpz_class(digits.empty() ? "0" : digits), den);
    r.canonicalize();
  }
  return neg ? Rat(-r) : r;
}

std::string rat_to_string(const Rat& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

namespace {

int compare_rat(const Rat& a, const Rat& b) {
  return cmp(a, b);
}

int compare_atom(const LinearAtom& a, const LinearAtom& b) {
  if (a.terms.size() != b.terms.size())
    return a.terms.size() < b.terms.size() ? -1 : 1;
  for (size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].first < b.terms[i].first) return -1;
    if (b.terms[i].first < a.terms[i].first) return 1;
    if (int c = compare_rat(a.terms[i].second, b.terms[i].second)) return c;
  }
  if (a.rel != b.rel) return a.rel < b.rel ? -1 : 1;
  return compare_rat(a.rhs, b.rhs);
}

bool ground_truth(Rel rel, const Rat& lhs, const Rat& rhs) {
  switch (rel) {
    case Rel::Lt: return lhs < rhs;
    case Rel::Le: return lhs <= rhs;
    case Rel::Eq: return lhs == rhs;
  }
  return false;
}

}  // namespace

Formula Formula::truth(bool b) {
  static const auto t = std::make_shared<const Node>(Node{FKind::True, {}, {}, {}});
  static const auto f = std::make_shared<const Node>(Node{FKind::False, {}, {}, {}});
  return Formula(b ? t : f);
}

Formula Formula::bool_atom(const Var& v) {
  if (v.sort != Sort::Bool) throw SortError("boolean atom over non-Bool variable " + v.name);
  return Formula(std::make_shared<const Node>(Node{FKind::BoolAtom, v, {}, {}}));
}

Formula Formula::linear(std::vector<std::pair<Var, Rat>> terms, Rel rel, Rat rhs) {
  std::map<Var, Rat> acc;
  for (auto& [v, c] : terms) {
    if (v.sort == Sort::Bool) throw SortError("Bool variable in linear atom: " + v.name);
    acc[v] += c;
  }
  LinearAtom a;
  for (auto& [v, c] : acc)
    if (c != 0) a.terms.emplace_back(v, c);
  a.rel = rel;
  a.rhs = std::move(rhs);
  if (a.terms.empty()) return truth(ground_truth(a.rel, Rat(0), a.rhs));
  // Scale so the leading coefficient has magnitude one; equalities also get
  // a positive leading sign (both sides of = may be negated freely).
  Rat lead = a.terms.front().second;
  Rat scale = abs(lead);
  if (a.rel == Rel::Eq && lead < 0) scale = -scale;
  if (scale != 1) {
    for (auto& [v, c] : a.terms) c /= scale;
    a.rhs /= scale;
  }
  auto n = std::make_shared<Node>();
  n->kind = FKind::Linear;
  n->atom = std::move(a);
  return Formula(std::move(n));
}

Formula Formula::lt(std::vector<std::pair<Var, Rat>> t, Rat rhs) {
  return linear(std::move(t), Rel::Lt, std::move(rhs));
}
Formula Formula::le(std::vector<std::pair<Var, Rat>> t, Rat rhs) {
  return linear(std::move(t), Rel::Le, std::move(rhs));
}
Formula Formula::eq(std::vector<std::pair<Var, Rat>> t, Rat rhs) {
  return linear(std::move(t), Rel::Eq, std::move(rhs));
}
Formula Formula::ge(std::vector<std::pair<Var, Rat>> t, Rat rhs) {
  for (auto& [v, c] : t) c = -c;
  return linear(std::move(t), Rel::Le, -rhs);
}
Formula Formula::gt(std::vector<std::pair<Var, Rat>> t, Rat rhs) {
  for (auto& [v, c] : t) c = -c;
  return linear(std::move(t), Rel::Lt, -rhs);
}

Formula Formula::negate(const Formula& f) {
  switch (f.kind()) {
    case FKind::True: return truth(false);
    case FKind::False: return truth(true);
    case FKind::Not: return f.children()[0];
    default: break;
  }
  auto n = std::make_shared<Node>();
  n->kind = FKind::Not;
  n->kids = {f};
  return Formula(std::move(n));
}

namespace {

void flatten_into(FKind op, const Formula& f, std::vector<Formula>& out) {
  if (f.kind() == op) {
    for (const auto& k : f.children()) flatten_into(op, k, out);
  } else {
    out.push_back(f);
  }
}

}  // namespace

// Normal form: flat, sorted, deduplicated children; constants folded.
Formula Formula::raw_nary(FKind op, std::vector<Formula> kids) {
  const bool is_and = op == FKind::And;
  std::vector<Formula> flat;
  for (const auto& k : kids) flatten_into(op, k, flat);
  std::vector<Formula> keep;
  for (const auto& k : flat) {
    if (k.kind() == (is_and ? FKind::True : FKind::False)) continue;
    if (k.kind() == (is_and ? FKind::False : FKind::True)) return truth(!is_and);
    keep.push_back(k);
  }
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) return truth(is_and);
  if (keep.size() == 1) return keep[0];
  auto n = std::make_shared<Node>();
  n->kind = op;
  n->kids = std::move(keep);
  return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> kids) { return raw_nary(FKind::And, std::move(kids)); }
Formula Formula::disj(std::vector<Formula> kids) { return raw_nary(FKind::Or, std::move(kids)); }

int Formula::compare(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case FKind::True:
    case FKind::False:
      return 0;
    case FKind::BoolAtom:
      if (a.bool_var() < b.bool_var()) return -1;
      if (b.bool_var() < a.bool_var()) return 1;
      return 0;
    case FKind::Linear:
      return compare_atom(a.atom(), b.atom());
    default: {
      const auto& ka = a.children();
      const auto& kb = b.children();
      if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
      for (size_t i = 0; i < ka.size(); ++i)
        if (int c = compare(ka[i], kb[i])) return c;
      return 0;
    }
  }
}

std::set<Var> vocab(const Formula& f) {
  std::set<Var> out;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula cur = stack.back();
    stack.pop_back();
    switch (cur.kind()) {
      case FKind::BoolAtom:
        out.insert(cur.bool_var());
        break;
      case FKind::Linear:
        for (const auto& [v, c] : cur.atom().terms) out.insert(v);
        break;
      case FKind::Not:
      case FKind::And:
      case FKind::Or:
        for (const auto& k : cur.children()) stack.push_back(k);
        break;
      default:
        break;
    }
  }
  return out;
}

Formula substitute(const Formula& f, const std::map<Var, Var>& m) {
  for (const auto& [from, to] : m)
    if (from.sort != to.sort)
      throw SortError("substitution changes sort of " + from.name + " (" +
                      sort_name(from.sort) + " -> " + sort_name(to.sort) + ")");
  switch (f.kind()) {
    case FKind::True:
    case FKind::False:
      return f;
    case FKind::BoolAtom: {
      auto it = m.find(f.bool_var());
      return it == m.end() ? f : Formula::bool_atom(it->second);
    }
    case FKind::Linear: {
      const auto& a = f.atom();
      std::vector<std::pair<Var, Rat>> terms;
      bool touched = false;
      for (const auto& [v, c] : a.terms) {
        auto it = m.find(v);
        touched |= it != m.end();
        terms.emplace_back(it == m.end() ? v : it->second, c);
      }
      if (!touched) return f;
      return Formula::linear(std::move(terms), a.rel, a.rhs);
    }
    case FKind::Not:
      return Formula::negate(substitute(f.children()[0], m));
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& k : f.children()) kids.push_back(substitute(k, m));
      return f.kind() == FKind::And ? Formula::conj(std::move(kids))
                                    : Formula::disj(std::move(kids));
    }
  }
  return f;
}

namespace {

// One cube under construction: boolean literal polarity plus linear atoms.
struct CubeState {
  std::map<Var, bool> bools;
  std::set<Formula> lins;
};

Formula negate_atom(const LinearAtom& a) {
  // not (t <= c)  ->  t > c ; not (t < c) -> t >= c. Equalities are split by
  // the caller.
  std::vector<std::pair<Var, Rat>> t = a.terms;
  if (a.rel == Rel::Le) return Formula::gt(std::move(t), a.rhs);
  return Formula::ge(std::move(t), a.rhs);
}

struct DnfBuilder {
  std::optional<size_t> budget;
  std::vector<Formula>* out;
  size_t produced = 0;

  void emit(const CubeState& c) {
    if (budget && produced >= *budget)
      throw ResourceExhausted("DNF cube budget exceeded (" +
                              std::to_string(*budget) + ")");
    ++produced;
    std::vector<Formula> lits;
    for (const auto& [v, pos] : c.bools) {
      Formula b = Formula::bool_atom(v);
      lits.push_back(pos ? b : Formula::negate(b));
    }
    for (const auto& l : c.lins) lits.push_back(l);
    out->push_back(Formula::conj(std::move(lits)));
  }

  // work items are (formula, positive?) pairs processed left to right
  void walk(std::vector<std::pair<Formula, bool>> pending, CubeState cube) {
    while (!pending.empty()) {
      auto [f, pos] = pending.back();
      pending.pop_back();
      switch (f.kind()) {
        case FKind::True:
          if (!pos) return;
          break;
        case FKind::False:
          if (pos) return;
          break;
        case FKind::Not:
          pending.emplace_back(f.children()[0], !pos);
          break;
        case FKind::BoolAtom: {
          auto it = cube.bools.find(f.bool_var());
          if (it != cube.bools.end()) {
            if (it->second != pos) return;  // boolean skeleton inconsistent
          } else {
            cube.bools[f.bool_var()] = pos;
          }
          break;
        }
        case FKind::Linear:
          if (pos) {
            cube.lins.insert(f);
          } else if (f.atom().rel == Rel::Eq) {
            // not (t = c) -> t < c or t > c
            auto lt = Formula::lt(f.atom().terms, f.atom().rhs);
            auto gt = Formula::gt(f.atom().terms, f.atom().rhs);
            auto p2 = pending;
            p2.emplace_back(lt, true);
            walk(std::move(p2), cube);
            pending.emplace_back(gt, true);
          } else {
            cube.lins.insert(negate_atom(f.atom()));
          }
          break;
        case FKind::And:
        case FKind::Or: {
          bool conjunctive = (f.kind() == FKind::And) == pos;
          if (conjunctive) {
            for (const auto& k : f.children()) pending.emplace_back(k, pos);
          } else {
            for (const auto& k : f.children()) {
              auto p2 = pending;
              p2.emplace_back(k, pos);
              walk(std::move(p2), cube);
            }
            return;
          }
          break;
        }
      }
    }
    emit(cube);
  }
};

}  // namespace

std::vector<Formula> nnf_dnf(const Formula& f, std::optional<size_t> max_cubes) {
  std::vector<Formula> out;
  DnfBuilder b{max_cubes, &out};
  b.walk({{f, true}}, CubeState{});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool eval(const Formula& f, const Model& m) {
  switch (f.kind()) {
    case FKind::True: return true;
    case FKind::False: return false;
    case FKind::BoolAtom: {
      auto it = m.bools.find(f.bool_var());
      return it != m.bools.end() && it->second;
    }
    case FKind::Linear: {
      Rat lhs = 0;
      for (const auto& [v, c] : f.atom().terms) {
        auto it = m.arith.find(v);
        if (it != m.arith.end()) lhs += c * it->second;
      }
      return ground_truth(f.atom().rel, lhs, f.atom().rhs);
    }
    case FKind::Not: return !eval(f.children()[0], m);
    case FKind::And:
      for (const auto& k : f.children())
        if (!eval(k, m)) return false;
      return true;
    case FKind::Or:
      for (const auto& k : f.children())
        if (eval(k, m)) return true;
      return false;
  }
  return false;
}

size_t node_count(const Formula& f) {
  size_t n = 1;
  for (const auto& k : f.children()) n += node_count(k);
  return n;
}

namespace {

bool simple_symbol(const std::string& s) {
  if (s.empty()) return false;
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  if (std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) &&
        extra.find(c) == std::string::npos)
      return false;
  return true;
}

std::string smt2_rat(const Rat& r, bool as_real) {
  if (r < 0) return "(- " + smt2_rat(Rat(-r), as_real) + ")";
  if (r.get_den() == 1) return r.get_num().get_str();
  if (!as_real)
    return "(/ " + r.get_num().get_str() + " " + r.get_den().get_str() + ")";
  return "(/ " + r.get_num().get_str() + ".0 " + r.get_den().get_str() + ".0)";
}

std::string smt2_term(const std::vector<std::pair<Var, Rat>>& terms) {
  std::vector<std::string> parts;
  for (const auto& [v, c] : terms) {
    std::string vn = to_smt2(v);
    if (c == 1) parts.push_back(vn);
    else if (c == -1) parts.push_back("(- " + vn + ")");
    else parts.push_back("(* " + smt2_rat(c, false) + " " + vn + ")");
  }
  if (parts.size() == 1) return parts[0];
  std::string out = "(+";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::string smt2_atom(const LinearAtom& a) {
  // Prefer the >=/> spelling when all coefficients are negative; the
  // canonical form stores such atoms with a negative leading coefficient.
  bool all_neg = true;
  for (const auto& [v, c] : a.terms) all_neg &= c < 0;
  std::vector<std::pair<Var, Rat>> terms = a.terms;
  Rat rhs = a.rhs;
  std::string op;
  if (a.rel == Rel::Eq) op = "=";
  else if (all_neg) {
    for (auto& [v, c] : terms) c = -c;
    rhs = -rhs;
    op = a.rel == Rel::Le ? ">=" : ">";
  } else {
    op = a.rel == Rel::Le ? "<=" : "<";
  }
  return "(" + op + " " + smt2_term(terms) + " " + smt2_rat(rhs, false) + ")";
}

}  // namespace

std::string to_smt2(const Var& v) {
  if (simple_symbol(v.name)) return v.name;
  return "|" + v.name + "|";
}

std::string to_smt2(const Formula& f) {
  switch (f.kind()) {
    case FKind::True: return "true";
    case FKind::False: return "false";
    case FKind::BoolAtom: return to_smt2(f.bool_var());
    case FKind::Linear: return smt2_atom(f.atom());
    case FKind::Not: return "(not " + to_smt2(f.children()[0]) + ")";
    case FKind::And:
    case FKind::Or: {
      std::string out = f.kind() == FKind::And ? "(and" : "(or";
      for (const auto& k : f.children()) out += " " + to_smt2(k);
      return out + ")";
    }
  }
  return "?";
}

}  // namespace shara
