#include "shara/smt2.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <variant>

#include "shara/errors.hpp"

namespace shara {

namespace {

// ---------------------------------------------------------------- lexing

struct Token {
  enum Kind { LP, RP, Sym, Num, Str, End } kind = End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Token::End;
      return t;
    }
    char c = text_[pos_];
    if (c == '(') {
      advance();
      t.kind = Token::LP;
      return t;
    }
    if (c == ')') {
      advance();
      t.kind = Token::RP;
      return t;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        s += text_[pos_];
        advance();
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated string", t.line, t.col);
      advance();
      t.kind = Token::Str;
      t.text = s;
      return t;
    }
    if (c == '|') {
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '|') {
        s += text_[pos_];
        advance();
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated |symbol|", t.line, t.col);
      advance();
      t.kind = Token::Sym;
      t.text = s;
      return t;
    }
    std::string s;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ';') {
      s += text_[pos_];
      advance();
    }
    if (s.empty()) throw ParseError("unexpected character", t.line, t.col);
    bool numeric = std::isdigit(static_cast<unsigned char>(s[0])) ||
                   (s.size() > 1 && s[0] == '-' &&
                    std::all_of(s.begin() + 1, s.end(), [](char d) {
                      return std::isdigit(static_cast<unsigned char>(d)) || d == '.';
                    }));
    t.kind = numeric ? Token::Num : Token::Sym;
    t.text = s;
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct Sexp {
  bool is_atom = true;
  bool is_number = false;
  std::string atom;
  std::vector<Sexp> list;
  int line = 1;
  int col = 1;

  const std::string& head() const {
    static const std::string empty;
    if (is_atom) return atom;
    if (!list.empty() && list[0].is_atom) return list[0].atom;
    return empty;
  }
  size_t size() const { return list.size(); }
  const Sexp& operator[](size_t i) const { return list[i]; }
};

class Reader {
 public:
  explicit Reader(const std::string& text) : lex_(text) { cur_ = lex_.next(); }

  bool at_end() const { return cur_.kind == Token::End; }

  Sexp read() {
    Sexp s;
    s.line = cur_.line;
    s.col = cur_.col;
    switch (cur_.kind) {
      case Token::Sym:
      case Token::Str:
        s.atom = cur_.text;
        cur_ = lex_.next();
        return s;
      case Token::Num:
        s.atom = cur_.text;
        s.is_number = true;
        cur_ = lex_.next();
        return s;
      case Token::LP: {
        s.is_atom = false;
        cur_ = lex_.next();
        while (cur_.kind != Token::RP) {
          if (cur_.kind == Token::End)
            throw ParseError("unbalanced parenthesis", s.line, s.col);
          s.list.push_back(read());
        }
        cur_ = lex_.next();
        return s;
      }
      case Token::RP:
        throw ParseError("unexpected ')'", cur_.line, cur_.col);
      case Token::End:
        throw ParseError("unexpected end of input", cur_.line, cur_.col);
    }
    return s;
  }

 private:
  Lexer lex_;
  Token cur_;
};

// ------------------------------------------------------------- term parsing

struct LetValue;  // LinTerm | Formula | RawApp

struct TermEnv {
  std::map<std::string, Var> vars;
  std::set<std::string> bool_as_int;  // Bool-sorted source vars encoded as Int
  std::map<std::string, const Sexp*> preds;  // name -> declaration marker
  std::map<std::string, std::shared_ptr<LetValue>> lets;
};

struct LetValue {
  std::variant<LinTerm, Formula, RawApp> v;
};

bool is_pred_symbol(const TermEnv& env, const std::string& s) {
  return env.preds.count(s) > 0;
}

Sort parse_sort(const Sexp& s) {
  if (!s.is_atom) throw UnsupportedFeature("unsupported compound sort");
  if (s.atom == "Int") return Sort::Int;
  if (s.atom == "Real") return Sort::Rat;
  if (s.atom == "Bool") return Sort::Bool;
  throw UnsupportedFeature("unsupported sort: " + s.atom);
}

LinTerm lt_const(Rat c) {
  LinTerm t;
  t.constant = std::move(c);
  return t;
}

LinTerm lt_var(const Var& v) {
  LinTerm t;
  t.coeffs[v] = 1;
  t.constant = 0;
  return t;
}

LinTerm lt_add(const LinTerm& a, const LinTerm& b) {
  LinTerm out = a;
  for (const auto& [v, c] : b.coeffs) {
    out.coeffs[v] += c;
    if (out.coeffs[v] == 0) out.coeffs.erase(v);
  }
  out.constant += b.constant;
  return out;
}

LinTerm lt_scale(const LinTerm& a, const Rat& k) {
  LinTerm out;
  if (k == 0) {
    out.constant = 0;
    return out;
  }
  for (const auto& [v, c] : a.coeffs) out.coeffs[v] = c * k;
  out.constant = a.constant * k;
  return out;
}

Formula lt_rel(const LinTerm& a, Rel rel, const LinTerm& b, bool flip = false) {
  // a rel b  ->  a - b rel 0
  LinTerm d = lt_add(a, lt_scale(b, Rat(-1)));
  std::vector<std::pair<Var, Rat>> terms(d.coeffs.begin(), d.coeffs.end());
  Rat rhs = -d.constant;
  if (!flip) return Formula::linear(std::move(terms), rel, std::move(rhs));
  // flip: a > b / a >= b, normalized through the ge/gt builders
  if (rel == Rel::Lt) return Formula::gt(std::move(terms), std::move(rhs));
  return Formula::ge(std::move(terms), std::move(rhs));
}

class TermParser {
 public:
  explicit TermParser(const TermEnv& env) : env_(env) {}

  Formula formula(const Sexp& s) { return parse_formula(s, env_); }
  LinTerm arith(const Sexp& s) { return parse_arith(s, env_); }

  // Body conjunct decomposition used by the clause walker: splits a body
  // term into predicate applications and residual constraint conjuncts.
  void split_body(const Sexp& s, TermEnv env, std::vector<RawApp>& apps,
                  std::vector<Formula>& constraint) {
    const std::string& h = s.head();
    if (!s.is_atom && h == "let") {
      TermEnv inner = bind_lets(s, env);
      split_body(s[2], std::move(inner), apps, constraint);
      return;
    }
    if (!s.is_atom && h == "and") {
      for (size_t i = 1; i < s.size(); ++i) split_body(s[i], env, apps, constraint);
      return;
    }
    if (s.is_atom && !s.is_number) {
      auto let = env.lets.find(s.atom);
      if (let != env.lets.end()) {
        if (auto* app = std::get_if<RawApp>(&let->second->v)) {
          apps.push_back(*app);
          return;
        }
      }
      if (is_pred_symbol(env, s.atom)) {
        apps.push_back(RawApp{s.atom, {}});
        return;
      }
      if (s.atom == "true") return;
    }
    if (!s.is_atom && is_pred_symbol(env, h)) {
      apps.push_back(parse_app(s, env));
      return;
    }
    constraint.push_back(parse_formula(s, env));
  }

  RawApp parse_app(const Sexp& s, const TermEnv& env) {
    RawApp app;
    if (s.is_atom) {
      app.pred = s.atom;
      return app;
    }
    app.pred = s.head();
    for (size_t i = 1; i < s.size(); ++i) {
      const Sexp& a = s[i];
      // Plain variable arguments stay variables; anything else becomes a
      // linear term to be flattened by System::build.
      if (a.is_atom && !a.is_number && env.vars.count(a.atom) &&
          !env.lets.count(a.atom)) {
        app.args.emplace_back(env.vars.at(a.atom));
      } else {
        app.args.emplace_back(parse_arith(a, env));
      }
    }
    return app;
  }

  TermEnv bind_lets(const Sexp& s, const TermEnv& env) {
    if (s.size() != 3 || s[1].is_atom)
      throw ParseError("malformed let", s.line, s.col);
    TermEnv inner = env;
    for (const auto& b : s[1].list) {
      if (b.is_atom || b.size() != 2 || !b[0].is_atom)
        throw ParseError("malformed let binding", b.line, b.col);
      auto lv = std::make_shared<LetValue>();
      const Sexp& val = b[1];
      if (!val.is_atom && is_pred_symbol(env, val.head())) {
        lv->v = parse_app(val, env);
      } else if (val.is_atom && !val.is_number && is_pred_symbol(env, val.atom)) {
        lv->v = RawApp{val.atom, {}};
      } else {
        try {
          lv->v = parse_arith(val, env);
        } catch (const Error&) {
          lv->v = parse_formula(val, env);
        }
      }
      inner.lets[b[0].atom] = std::move(lv);
    }
    return inner;
  }

 private:
  Formula parse_formula(const Sexp& s, const TermEnv& env) {
    if (s.is_atom) {
      if (s.atom == "true") return Formula::truth(true);
      if (s.atom == "false") return Formula::truth(false);
      auto let = env.lets.find(s.atom);
      if (let != env.lets.end()) {
        if (auto* f = std::get_if<Formula>(&let->second->v)) return *f;
        if (auto* t = std::get_if<LinTerm>(&let->second->v))
          return formula_of_term(*t, s);
        throw UnsupportedFeature("predicate application in formula position");
      }
      auto it = env.vars.find(s.atom);
      if (it != env.vars.end()) return formula_of_var(it->second, env, s);
      if (is_pred_symbol(env, s.atom))
        throw UnsupportedFeature(
            "predicate application outside a clause body: " + s.atom);
      throw ParseError("unknown identifier: " + s.atom, s.line, s.col);
    }
    const std::string& h = s.head();
    if (h == "let") {
      TermParser inner(env);
      TermEnv e2 = inner.bind_lets(s, env);
      return parse_formula(s[2], e2);
    }
    if (h == "and" || h == "or") {
      std::vector<Formula> kids;
      for (size_t i = 1; i < s.size(); ++i) kids.push_back(parse_formula(s[i], env));
      return h == "and" ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    if (h == "not") {
      if (s.size() != 2) throw ParseError("not expects one argument", s.line, s.col);
      return Formula::negate(parse_formula(s[1], env));
    }
    if (h == "=>") {
      std::vector<Formula> kids;
      for (size_t i = 1; i + 1 < s.size(); ++i)
        kids.push_back(Formula::negate(parse_formula(s[i], env)));
      kids.push_back(parse_formula(s[s.size() - 1], env));
      return Formula::disj(std::move(kids));
    }
    if (h == "ite") {
      if (s.size() != 4) throw ParseError("ite expects three arguments", s.line, s.col);
      Formula c = parse_formula(s[1], env);
      // Only boolean ite is supported here; arithmetic ite raises below
      // through the arith parser.
      Formula t = parse_formula(s[2], env);
      Formula e = parse_formula(s[3], env);
      return Formula::disj({Formula::conj({c, t}),
                            Formula::conj({Formula::negate(c), e})});
    }
    if (h == "<" || h == "<=" || h == ">" || h == ">=") {
      if (s.size() < 3) throw ParseError("relation expects two arguments", s.line, s.col);
      std::vector<Formula> chain;
      for (size_t i = 1; i + 1 < s.size(); ++i) {
        LinTerm a = parse_arith(s[i], env);
        LinTerm b = parse_arith(s[i + 1], env);
        if (h == "<") chain.push_back(lt_rel(a, Rel::Lt, b));
        else if (h == "<=") chain.push_back(lt_rel(a, Rel::Le, b));
        else if (h == ">") chain.push_back(lt_rel(a, Rel::Lt, b, true));
        else chain.push_back(lt_rel(a, Rel::Le, b, true));
      }
      return Formula::conj(std::move(chain));
    }
    if (h == "=") {
      if (s.size() < 3) throw ParseError("= expects two arguments", s.line, s.col);
      std::vector<Formula> chain;
      for (size_t i = 1; i + 1 < s.size(); ++i)
        chain.push_back(parse_eq(s[i], s[i + 1], env));
      return Formula::conj(std::move(chain));
    }
    if (h == "forall" || h == "exists")
      throw UnsupportedFeature("nested quantifier in constraint");
    if (h == "distinct" || h == "xor" || h == "div" || h == "mod" || h == "select" ||
        h == "store")
      throw UnsupportedFeature("unsupported operator: " + h);
    if (is_pred_symbol(env, h))
      throw UnsupportedFeature("predicate application outside a clause body: " + h);
    throw ParseError("cannot parse formula: " + h, s.line, s.col);
  }

  Formula parse_eq(const Sexp& a, const Sexp& b, const TermEnv& env) {
    try {
      LinTerm ta = parse_arith(a, env);
      LinTerm tb = parse_arith(b, env);
      return lt_rel(ta, Rel::Eq, tb);
    } catch (const ParseError&) {
    } catch (const UnsupportedFeature&) {
    }
    Formula fa = parse_formula(a, env);
    Formula fb = parse_formula(b, env);
    return Formula::disj({Formula::conj({fa, fb}),
                          Formula::conj({Formula::negate(fa), Formula::negate(fb)})});
  }

  Formula formula_of_var(const Var& v, const TermEnv& env, const Sexp& s) {
    if (v.sort == Sort::Bool) return Formula::bool_atom(v);
    if (env.bool_as_int.count(v.name))
      return Formula::eq({{v, Rat(1)}}, Rat(1));
    throw ParseError("variable " + v.name + " used as a formula", s.line, s.col);
  }

  Formula formula_of_term(const LinTerm& t, const Sexp& s) {
    // A let-bound arithmetic term in formula position only makes sense for
    // encoded booleans: compare with 1.
    std::vector<std::pair<Var, Rat>> terms(t.coeffs.begin(), t.coeffs.end());
    (void)s;
    return Formula::eq(std::move(terms), Rat(1) - t.constant);
  }

  LinTerm parse_arith(const Sexp& s, const TermEnv& env) {
    if (s.is_atom) {
      if (s.is_number) return lt_const(rat_from_string(s.atom));
      auto let = env.lets.find(s.atom);
      if (let != env.lets.end()) {
        if (auto* t = std::get_if<LinTerm>(&let->second->v)) return *t;
        throw UnsupportedFeature("non-arithmetic let binding in term position");
      }
      auto it = env.vars.find(s.atom);
      if (it != env.vars.end()) {
        if (it->second.sort == Sort::Bool)
          throw UnsupportedFeature("Bool variable in arithmetic term");
        return lt_var(it->second);
      }
      throw ParseError("unknown identifier: " + s.atom, s.line, s.col);
    }
    const std::string& h = s.head();
    if (h == "let") {
      TermParser inner(env);
      TermEnv e2 = inner.bind_lets(s, env);
      return parse_arith(s[2], e2);
    }
    if (h == "+") {
      LinTerm out = lt_const(Rat(0));
      for (size_t i = 1; i < s.size(); ++i) out = lt_add(out, parse_arith(s[i], env));
      return out;
    }
    if (h == "-") {
      if (s.size() == 2) return lt_scale(parse_arith(s[1], env), Rat(-1));
      LinTerm out = parse_arith(s[1], env);
      for (size_t i = 2; i < s.size(); ++i)
        out = lt_add(out, lt_scale(parse_arith(s[i], env), Rat(-1)));
      return out;
    }
    if (h == "*") {
      LinTerm acc = lt_const(Rat(1));
      bool have_var = false;
      LinTerm varpart;
      Rat factor = 1;
      for (size_t i = 1; i < s.size(); ++i) {
        LinTerm t = parse_arith(s[i], env);
        if (t.coeffs.empty()) {
          factor *= t.constant;
        } else if (!have_var) {
          have_var = true;
          varpart = t;
        } else {
          throw UnsupportedFeature("nonlinear multiplication");
        }
      }
      return have_var ? lt_scale(varpart, factor) : lt_const(factor);
    }
    if (h == "/") {
      if (s.size() != 3) throw ParseError("/ expects two arguments", s.line, s.col);
      LinTerm num = parse_arith(s[1], env);
      LinTerm den = parse_arith(s[2], env);
      if (!den.coeffs.empty() || den.constant == 0)
        throw UnsupportedFeature("division by a non-constant");
      return lt_scale(num, Rat(1) / den.constant);
    }
    if (h == "ite") throw UnsupportedFeature("arithmetic ite");
    throw ParseError("cannot parse arithmetic term: " + h, s.line, s.col);
  }

  const TermEnv& env_;
};

// --------------------------------------------------------------- script

struct DeclaredPred {
  std::string name;
  std::vector<Sort> sorts;       // encoded: Bool -> Int
};

struct ScriptState {
  std::vector<DeclaredPred> preds;
  std::vector<RawClause> clauses;
  bool logic_seen = false;
};

void parse_clause_term(const Sexp& term, TermEnv env, ScriptState& st);

void parse_assert(const Sexp& s, ScriptState& st) {
  if (s.size() != 2) throw ParseError("assert expects one term", s.line, s.col);
  TermEnv env;
  for (const auto& p : st.preds) env.preds[p.name] = nullptr;
  parse_clause_term(s[1], std::move(env), st);
}

void bind_quantified(const Sexp& binders, TermEnv& env) {
  for (const auto& b : binders.list) {
    if (b.is_atom || b.size() != 2 || !b[0].is_atom)
      throw ParseError("malformed quantifier binding", b.line, b.col);
    Sort srt = parse_sort(b[1]);
    if (srt == Sort::Bool) {
      env.vars[b[0].atom] = Var{b[0].atom, Sort::Int};
      env.bool_as_int.insert(b[0].atom);
    } else {
      env.vars[b[0].atom] = Var{b[0].atom, srt};
    }
  }
}

void finish_clause(const Sexp& body, const Sexp* head, TermEnv env, ScriptState& st) {
  TermParser tp(env);
  RawClause rc;
  std::vector<Formula> cons;
  tp.split_body(body, env, rc.body, cons);
  // 0/1 bounds for encoded boolean variables.
  for (const auto& name : env.bool_as_int) {
    Var v = env.vars.at(name);
    cons.push_back(Formula::ge({{v, Rat(1)}}, Rat(0)));
    cons.push_back(Formula::le({{v, Rat(1)}}, Rat(1)));
  }
  rc.constraint = Formula::conj(std::move(cons));
  if (head) {
    if (head->is_atom && head->atom == "false") {
      // query
    } else if ((head->is_atom && env.preds.count(head->atom)) ||
               (!head->is_atom && env.preds.count(head->head()))) {
      rc.head = tp.parse_app(*head, env);
    } else {
      throw UnsupportedFeature("clause head must be a predicate application or false");
    }
  }
  st.clauses.push_back(std::move(rc));
}

void parse_clause_term(const Sexp& term, TermEnv env, ScriptState& st) {
  const std::string& h = term.head();
  if (!term.is_atom && h == "forall") {
    if (term.size() != 3) throw ParseError("malformed forall", term.line, term.col);
    bind_quantified(term[1], env);
    parse_clause_term(term[2], std::move(env), st);
    return;
  }
  if (!term.is_atom && h == "let") {
    TermParser tp(env);
    TermEnv e2 = tp.bind_lets(term, env);
    parse_clause_term(term[2], std::move(e2), st);
    return;
  }
  if (!term.is_atom && h == "not") {
    // (not (exists X body)) is an alternative query spelling.
    const Sexp& inner = term[1];
    if (!inner.is_atom && inner.head() == "exists") {
      if (inner.size() != 3) throw ParseError("malformed exists", inner.line, inner.col);
      bind_quantified(inner[1], env);
      finish_clause(inner[2], nullptr, std::move(env), st);
      return;
    }
  }
  if (!term.is_atom && h == "=>") {
    if (term.size() != 3)
      throw ParseError("=> in a clause expects two arguments", term.line, term.col);
    const Sexp& head = term[2];
    if (head.is_atom && head.atom == "false") {
      finish_clause(term[1], nullptr, std::move(env), st);
    } else {
      finish_clause(term[1], &head, std::move(env), st);
    }
    return;
  }
  // A bare head is a fact; a bare `false` is an unconditional query.
  static const Sexp true_body = [] {
    Sexp s;
    s.atom = "true";
    return s;
  }();
  if (term.is_atom && term.atom == "false") {
    finish_clause(true_body, nullptr, std::move(env), st);
    return;
  }
  if ((term.is_atom && env.preds.count(term.atom)) ||
      (!term.is_atom && env.preds.count(h))) {
    finish_clause(true_body, &term, std::move(env), st);
    return;
  }
  throw UnsupportedFeature("assertion is not a Horn clause");
}

System system_from_state(const ScriptState& st) {
  std::vector<Predicate> decls;
  for (const auto& p : st.preds) {
    Predicate d{p.name, {}};
    for (const auto& s : p.sorts) d.params.push_back(Var{"", s});
    decls.push_back(std::move(d));
  }
  return System::build(decls, st.clauses);
}

}  // namespace

System parse_horn(const std::string& text) {
  Reader r(text);
  ScriptState st;
  while (!r.at_end()) {
    Sexp s = r.read();
    if (s.is_atom) throw ParseError("expected a command", s.line, s.col);
    const std::string& cmd = s.head();
    if (cmd == "set-logic") {
      if (s.size() == 2 && s[1].is_atom && s[1].atom != "HORN")
        throw UnsupportedFeature("unsupported logic: " + s[1].atom);
      st.logic_seen = true;
    } else if (cmd == "set-info" || cmd == "set-option" || cmd == "check-sat" ||
               cmd == "get-model" || cmd == "exit" || cmd == "echo" ||
               cmd == "get-info") {
      // no effect on the system
    } else if (cmd == "declare-fun") {
      if (s.size() != 4 || !s[1].is_atom || s[2].is_atom)
        throw ParseError("malformed declare-fun", s.line, s.col);
      if (!s[3].is_atom || s[3].atom != "Bool")
        throw UnsupportedFeature("declare-fun must return Bool in HORN scripts");
      DeclaredPred p;
      p.name = s[1].atom;
      for (const auto& arg : s[2].list) {
        Sort srt = parse_sort(arg);
        p.sorts.push_back(srt == Sort::Bool ? Sort::Int : srt);
      }
      st.preds.push_back(std::move(p));
    } else if (cmd == "declare-const") {
      throw UnsupportedFeature("declare-const is not part of the HORN subset");
    } else if (cmd == "assert") {
      parse_assert(s, st);
    } else if (cmd == "push" || cmd == "pop" || cmd == "declare-sort" ||
               cmd == "define-sort" || cmd == "define-fun") {
      throw UnsupportedFeature("unsupported command: " + cmd);
    } else {
      throw ParseError("unknown command: " + cmd, s.line, s.col);
    }
  }
  return system_from_state(st);
}

namespace {

std::string print_sort(Sort s) { return sort_name(s); }

void collect_clause_vars(const Clause& c, std::vector<Var>& out) {
  std::set<Var> seen;
  auto note = [&](const Var& v) {
    if (seen.insert(v).second) out.push_back(v);
  };
  if (c.head)
    for (const auto& v : c.head->args) note(v);
  for (const auto& app : c.body)
    for (const auto& v : app.args) note(v);
  for (const auto& v : vocab(c.constraint)) note(v);
  std::sort(out.begin(), out.end());
}

std::string print_app(const PredApp& app) {
  Var p{app.pred, Sort::Bool};
  if (app.args.empty()) return to_smt2(p);
  std::string out = "(" + to_smt2(p);
  for (const auto& v : app.args) out += " " + to_smt2(v);
  return out + ")";
}

}  // namespace

std::string print_horn(const System& s) {
  std::ostringstream os;
  os << "(set-logic HORN)\n";
  for (const auto& [name, p] : s.preds()) {
    os << "(declare-fun " << to_smt2(Var{name, Sort::Bool}) << " (";
    for (size_t i = 0; i < p.params.size(); ++i)
      os << (i ? " " : "") << print_sort(p.params[i].sort);
    os << ") Bool)\n";
  }
  for (const auto& c : s.clauses()) {
    std::string head = c.head ? print_app(*c.head) : "false";
    std::string bodystr;
    {
      std::vector<std::string> parts;
      for (const auto& app : c.body) parts.push_back(print_app(app));
      if (!c.constraint.is_true() || parts.empty())
        parts.push_back(to_smt2(c.constraint));
      if (parts.size() == 1) {
        bodystr = parts[0];
      } else {
        bodystr = "(and";
        for (const auto& p : parts) bodystr += " " + p;
        bodystr += ")";
      }
    }
    std::vector<Var> vars;
    collect_clause_vars(c, vars);
    os << "(assert ";
    if (!vars.empty()) {
      os << "(forall (";
      for (size_t i = 0; i < vars.size(); ++i)
        os << (i ? " " : "") << "(" << to_smt2(vars[i]) << " "
           << print_sort(vars[i].sort) << ")";
      os << ") ";
    }
    os << "(=> " << bodystr << " " << head << ")";
    if (!vars.empty()) os << ")";
    os << ")\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

std::string print_solution(const Solution& sigma, const System& s) {
  std::ostringstream os;
  for (const auto& [name, f] : sigma) {
    const Predicate& p = s.pred(name);
    os << "(define-fun " << to_smt2(Var{name, Sort::Bool}) << " (";
    for (size_t i = 0; i < p.params.size(); ++i)
      os << (i ? " " : "") << "(" << to_smt2(p.params[i]) << " "
         << print_sort(p.params[i].sort) << ")";
    os << ") Bool " << to_smt2(f) << ")\n";
  }
  return os.str();
}

Solution parse_solution(const std::string& text, const System& s) {
  Reader r(text);
  Solution out;
  while (!r.at_end()) {
    Sexp e = r.read();
    if (e.is_atom && (e.atom == "sat" || e.atom == "unsat" || e.atom == "unknown"))
      continue;
    if (e.is_atom || e.head() != "define-fun")
      throw ParseError("expected define-fun", e.line, e.col);
    if (e.size() != 5 || !e[1].is_atom)
      throw ParseError("malformed define-fun", e.line, e.col);
    const std::string& name = e[1].atom;
    if (!s.preds().count(name)) throw UnknownPredicate(name);
    const Predicate& p = s.pred(name);
    if (e[2].size() != p.params.size())
      throw Error("define-fun arity mismatch for " + name);
    TermEnv env;
    std::map<Var, Var> to_canonical;
    for (size_t i = 0; i < e[2].size(); ++i) {
      const Sexp& b = e[2][i];
      if (b.is_atom || b.size() != 2 || !b[0].is_atom)
        throw ParseError("malformed parameter", b.line, b.col);
      Sort srt = parse_sort(b[1]);
      if (srt != p.params[i].sort)
        throw SortError("parameter sort mismatch for " + name);
      Var v{b[0].atom, srt};
      env.vars[b[0].atom] = v;
      to_canonical[v] = p.params[i];
    }
    TermParser tp(env);
    Formula f = tp.formula(e[4]);
    out[name] = substitute(f, to_canonical);
  }
  return out;
}

Formula parse_formula(const std::string& text, const std::map<std::string, Var>& env) {
  Reader r(text);
  Sexp s = r.read();
  TermEnv te;
  te.vars = env;
  TermParser tp(te);
  return tp.formula(s);
}

std::vector<ModelValue> parse_value_pairs(const std::string& text) {
  Reader r(text);
  Sexp s = r.read();
  if (s.is_atom) throw ParseError("expected a list of value pairs", s.line, s.col);
  std::vector<ModelValue> out;
  for (const auto& pair : s.list) {
    if (pair.is_atom || pair.size() != 2 || !pair[0].is_atom)
      throw ParseError("malformed value pair", pair.line, pair.col);
    ModelValue mv;
    mv.name = pair[0].atom;
    const Sexp& v = pair[1];
    if (v.is_atom && (v.atom == "true" || v.atom == "false")) {
      mv.is_bool = true;
      mv.boolean = v.atom == "true";
    } else {
      // numeral | (- n) | (/ p q) | (- (/ p q))
      std::function<Rat(const Sexp&)> num = [&](const Sexp& e) -> Rat {
        if (e.is_atom) return rat_from_string(e.atom);
        if (e.head() == "-" && e.size() == 2) return Rat(-num(e[1]));
        if (e.head() == "/" && e.size() == 3)
          return Rat(num(e[1]) / num(e[2]));
        throw ParseError("cannot parse value", e.line, e.col);
      };
      mv.value = num(v);
    }
    out.push_back(std::move(mv));
  }
  return out;
}

// ------------------------------------------------------------ native format

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses "name(a, b, c)" or "name" into name + arg names.
std::pair<std::string, std::vector<std::string>> parse_native_app(
    const std::string& text, int line) {
  auto lp = text.find('(');
  if (lp == std::string::npos) return {trim(text), {}};
  auto rp = text.rfind(')');
  if (rp == std::string::npos || rp < lp)
    throw ParseError("malformed application: " + text, line, 1);
  std::string name = trim(text.substr(0, lp));
  std::vector<std::string> args;
  std::string inner = text.substr(lp + 1, rp - lp - 1);
  std::string cur;
  for (char c : inner) {
    if (c == ',') {
      args.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) args.push_back(trim(cur));
  return {name, args};
}

}  // namespace

System parse_native(const std::string& text) {
  std::istringstream is(text);
  std::string linebuf;
  int lineno = 0;

  std::map<std::string, std::vector<Sort>> decls;
  std::vector<std::string> decl_order;
  struct PendingClause {
    std::string head;
    std::vector<std::pair<std::string, std::vector<std::string>>> body;
    std::string cons;
    int line;
  };
  std::vector<PendingClause> pending;

  while (std::getline(is, linebuf)) {
    ++lineno;
    std::string line = trim(linebuf);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("pred ", 0) == 0) {
      auto [name, sorts] = parse_native_app(line.substr(5), lineno);
      std::vector<Sort> ss;
      for (const auto& s : sorts) {
        if (s == "Int") ss.push_back(Sort::Int);
        else if (s == "Rat" || s == "Real") ss.push_back(Sort::Rat);
        else throw ParseError("unknown sort in pred declaration: " + s, lineno, 1);
      }
      decls[name] = ss;
      decl_order.push_back(name);
      continue;
    }
    auto arrow = line.find("<-");
    if (arrow == std::string::npos)
      throw ParseError("expected `head <- [body] ; constraint`", lineno, 1);
    PendingClause pc;
    pc.line = lineno;
    pc.head = trim(line.substr(0, arrow));
    std::string rest = trim(line.substr(arrow + 2));
    auto semi = rest.find(';');
    std::string bodypart = semi == std::string::npos ? rest : trim(rest.substr(0, semi));
    pc.cons = semi == std::string::npos ? "" : trim(rest.substr(semi + 1));
    if (!bodypart.empty()) {
      if (bodypart.front() != '[' || bodypart.back() != ']')
        throw ParseError("body must be bracketed", lineno, 1);
      std::string inner = trim(bodypart.substr(1, bodypart.size() - 2));
      // split on commas at paren depth zero
      int depth = 0;
      std::string cur;
      std::vector<std::string> apps;
      for (char c : inner) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
          apps.push_back(trim(cur));
          cur.clear();
        } else {
          cur += c;
        }
      }
      if (!trim(cur).empty()) apps.push_back(trim(cur));
      for (const auto& a : apps) pc.body.push_back(parse_native_app(a, lineno));
    }
    pending.push_back(std::move(pc));
  }

  // Sort inference from application positions; constraint-only variables
  // default to Int.
  std::map<std::string, Sort> var_sorts;
  auto note_app = [&](const std::pair<std::string, std::vector<std::string>>& app,
                      int line) {
    auto it = decls.find(app.first);
    if (it == decls.end())
      throw ParseError("undeclared predicate: " + app.first, line, 1);
    if (it->second.size() != app.second.size())
      throw ParseError("arity mismatch for " + app.first, line, 1);
    for (size_t i = 0; i < app.second.size(); ++i) {
      auto [vit, fresh] = var_sorts.emplace(app.second[i], it->second[i]);
      if (!fresh && vit->second != it->second[i])
        throw ParseError("conflicting sorts for variable " + app.second[i], line, 1);
    }
  };

  std::vector<RawClause> raw;
  for (auto& pc : pending) {
    for (auto& b : pc.body) note_app(b, pc.line);
    std::pair<std::string, std::vector<std::string>> head_app;
    bool has_head = pc.head != "false";
    if (has_head) {
      head_app = parse_native_app(pc.head, pc.line);
      note_app(head_app, pc.line);
    }
    RawClause rc;
    TermEnv env;
    for (const auto& [n, s] : var_sorts) env.vars[n] = Var{n, s};
    if (!pc.cons.empty()) {
      // pre-scan: unseen symbols in the constraint default to Int
      Reader r(pc.cons);
      Sexp cs = r.read();
      std::function<void(const Sexp&)> scan = [&](const Sexp& e) {
        if (e.is_atom) {
          static const std::set<std::string> ops = {
              "and", "or", "not", "=>", "=", "<", "<=", ">", ">=",
              "+", "-", "*", "/", "true", "false", "let", "ite"};
          if (!e.is_number && !ops.count(e.atom) && !env.vars.count(e.atom))
            env.vars[e.atom] = Var{e.atom, Sort::Int};
          return;
        }
        for (size_t i = 0; i < e.size(); ++i) scan(e[i]);
      };
      scan(cs);
      TermParser tp(env);
      rc.constraint = tp.formula(cs);
    } else {
      rc.constraint = Formula::truth(true);
    }
    auto to_rawapp = [&](const std::pair<std::string, std::vector<std::string>>& a) {
      RawApp app{a.first, {}};
      for (const auto& v : a.second) app.args.emplace_back(env.vars.at(v));
      return app;
    };
    if (has_head) rc.head = to_rawapp(head_app);
    for (const auto& b : pc.body) rc.body.push_back(to_rawapp(b));
    raw.push_back(std::move(rc));
  }

  std::vector<Predicate> dp;
  for (const auto& name : decl_order) {
    Predicate p{name, {}};
    for (Sort s : decls[name]) p.params.push_back(Var{"", s});
    dp.push_back(std::move(p));
  }
  return System::build(dp, raw);
}

std::string print_native(const System& s) {
  std::ostringstream os;
  for (const auto& [name, p] : s.preds()) {
    os << "pred " << name << "(";
    for (size_t i = 0; i < p.params.size(); ++i)
      os << (i ? ", " : "") << (p.params[i].sort == Sort::Rat ? "Rat" : "Int");
    os << ")\n";
  }
  for (const auto& c : s.clauses()) {
    auto app_str = [](const PredApp& a) {
      std::string out = a.pred + "(";
      for (size_t i = 0; i < a.args.size(); ++i)
        out += (i ? ", " : "") + a.args[i].name;
      return out + ")";
    };
    os << (c.head ? app_str(*c.head) : "false") << " <- [";
    for (size_t i = 0; i < c.body.size(); ++i)
      os << (i ? ", " : "") << app_str(c.body[i]);
    os << "] ; " << to_smt2(c.constraint) << "\n";
  }
  return os.str();
}

}  // namespace shara
