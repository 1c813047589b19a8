#pragma once

// Concrete syntax for knowledge bases, fact files and queries.
//
//   domain person = { john, mary }.
//   value rhythm = { nsr, vf, vt }.
//   pred rhythm(person, time).
//   cpred epi(person, time).
//   prob rhythm(X, t, nsr) | rhythm(X, t-1, nsr) = 0.05 <- no_inter(X, t-1), epi(X, t-1).
//   ctx no_inter(X, t) <- not dfib(X, t), not cpr(X, t).
//   combine rhythm with noisy_max(distinguished=nsr).
//
// Predicates and constants are case-insensitive. A name starting with an
// uppercase letter is a variable; in a `time` position every name is a
// variable and may carry a +k / -k offset.

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <string_view>

#include "ctkb/combining.hpp"
#include "ctkb/syntax.hpp"

namespace ctkb {

// ---------------------------------------------------------------------------
// Typing of variables

struct DomainRef {
  enum class Kind { Attribute, Values, Time };
  Kind kind = Kind::Attribute;
  std::string name;  // domain name, or the predicate for Kind::Values

  bool operator==(const DomainRef&) const = default;
};

inline DomainRef domain_at(const PredicateDecl& decl, std::size_t pos) {
  if (pos < decl.args.size()) {
    if (decl.args[pos] == kTimeDomain) return {DomainRef::Kind::Time, kTimeDomain};
    return {DomainRef::Kind::Attribute, decl.args[pos]};
  }
  return {DomainRef::Kind::Values, decl.name};
}

/// Members of a finite domain (empty for time, whose members come from the
/// session bounds).
inline const std::vector<std::string>& members(const KnowledgeBase& kb, const DomainRef& d) {
  static const std::vector<std::string> none;
  const AttributeDomain* dom = nullptr;
  if (d.kind == DomainRef::Kind::Attribute) dom = kb.domain(d.name);
  if (d.kind == DomainRef::Kind::Values) dom = kb.values_of(d.name);
  return dom ? dom->members : none;
}

using VariableTypes = std::map<std::string, DomainRef>;

namespace detail {

inline void collect_types(const KnowledgeBase& kb, const Atom& a, VariableTypes& out) {
  const auto* decl = kb.predicate(a.pred);
  if (!decl) return;
  for (std::size_t i = 0; i < a.args.size() && i < decl->arity(); ++i)
    if (a.args[i].is_variable()) out.emplace(a.args[i].name, domain_at(*decl, i));
}

}  // namespace detail

inline VariableTypes variable_types(const KnowledgeBase& kb, const ProbSentence& s) {
  VariableTypes out;
  detail::collect_types(kb, s.cons, out);
  for (const auto& a : s.ante) detail::collect_types(kb, a, out);
  for (const auto& l : s.context) detail::collect_types(kb, l.atom, out);
  return out;
}

inline VariableTypes variable_types(const KnowledgeBase& kb, const ContextClause& c) {
  VariableTypes out;
  detail::collect_types(kb, c.head, out);
  for (const auto& l : c.body) detail::collect_types(kb, l.atom, out);
  return out;
}

inline VariableTypes variable_types(const KnowledgeBase& kb, const Atom& a) {
  VariableTypes out;
  detail::collect_types(kb, a, out);
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

enum class Tok {
  Ident, Int, Number, LParen, RParen, LBrace, RBrace, Comma, Dot, Bar, Eq, Arrow, Plus, Minus,
  End, Bad
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

inline const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Bar: return "'|'";
    case Tok::Eq: return "'='";
    case Tok::Arrow: return "'<-'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::End: return "end of input";
    case Tok::Bad: return "invalid character";
  }
  return "token";
}

inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto digit = [&](std::size_t j) {
    return j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]));
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.loc = {line, col};
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && digit(i + 1))) {
      std::size_t j = i;
      while (digit(j)) ++j;
      bool real = false;
      if (j < src.size() && src[j] == '.' && digit(j + 1)) {
        real = true;
        ++j;
        while (digit(j)) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E') &&
          (digit(j + 1) || ((j + 1 < src.size() && (src[j + 1] == '+' || src[j + 1] == '-')) &&
                            digit(j + 2)))) {
        real = true;
        j += 2;
        while (digit(j)) ++j;
      }
      if (!real && j < src.size() && ident_char(src[j])) {
        // constants such as `1min`
        while (j < src.size() && ident_char(src[j])) ++j;
        t.kind = Tok::Ident;
      } else {
        t.kind = real ? Tok::Number : Tok::Int;
      }
      t.text = std::string(src.substr(start, j - start));
      advance(j - start);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(start, j - start));
      advance(j - start);
      out.push_back(std::move(t));
      continue;
    }
    std::size_t len = 1;
    switch (c) {
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '{': t.kind = Tok::LBrace; break;
      case '}': t.kind = Tok::RBrace; break;
      case ',': t.kind = Tok::Comma; break;
      case '.': t.kind = Tok::Dot; break;
      case '|': t.kind = Tok::Bar; break;
      case '=': t.kind = Tok::Eq; break;
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '<':
        if (i + 1 < src.size() && src[i + 1] == '-') {
          t.kind = Tok::Arrow;
          len = 2;
        } else {
          t.kind = Tok::Bad;
        }
        break;
      default: t.kind = Tok::Bad; break;
    }
    t.text = std::string(src.substr(start, len));
    advance(len);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool starts_upper(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

struct SyntaxError {};

// Recursive-descent reader over the token stream. Terms are read without
// knowledge of declarations; the resolver fixes them up afterwards.
class Reader {
 public:
  Reader(std::vector<Token> toks, std::string file, std::vector<Diagnostic>& diags)
      : toks_(std::move(toks)), file_(std::move(file)), diags_(diags) {}

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_end() const { return at(Tok::End); }

  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  Token expect(Tok k, const char* what = nullptr) {
    if (!at(k)) {
      fail(peek().loc, std::string("expected ") + (what ? what : describe(k)) + ", found " +
                           found(peek()));
    }
    return take();
  }

  bool accept(Tok k) {
    if (!at(k)) return false;
    take();
    return true;
  }

  bool at_keyword(const char* kw) const { return at(Tok::Ident) && lower(peek().text) == kw; }

  [[noreturn]] void fail(SourceLoc loc, std::string msg) {
    diags_.push_back({file_, loc, Severity::Error, std::move(msg)});
    throw SyntaxError{};
  }

  // Skip past the next statement terminator after a syntax error.
  void recover() {
    while (!at_end() && !at(Tok::Dot)) take();
    accept(Tok::Dot);
  }

  static std::string found(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  Term term() {
    Term t;
    t.loc = peek().loc;
    if (at(Tok::Minus)) {
      take();
      auto n = expect(Tok::Int, "integer");
      t.kind = Term::Kind::Integer;
      t.offset = -parse_int(n);
      return t;
    }
    if (at(Tok::Int)) {
      t.kind = Term::Kind::Integer;
      t.offset = parse_int(take());
      return t;
    }
    auto id = expect(Tok::Ident, "term");
    t.name = id.text;
    if (at(Tok::Plus) || at(Tok::Minus)) {
      bool minus = take().kind == Tok::Minus;
      auto n = expect(Tok::Int, "integer offset");
      t.kind = Term::Kind::Variable;
      t.offset = minus ? -parse_int(n) : parse_int(n);
      return t;
    }
    t.kind = starts_upper(id.text) ? Term::Kind::Variable : Term::Kind::Constant;
    return t;
  }

  Atom atom() {
    Atom a;
    a.loc = peek().loc;
    a.pred = lower(expect(Tok::Ident, "predicate name").text);
    if (accept(Tok::LParen)) {
      if (!at(Tok::RParen)) {
        a.args.push_back(term());
        while (accept(Tok::Comma)) a.args.push_back(term());
      }
      expect(Tok::RParen);
    }
    return a;
  }

  Literal literal() {
    Literal l;
    if (at_keyword("not")) {
      take();
      l.negated = true;
    }
    l.atom = atom();
    return l;
  }

  std::vector<Literal> literals() {
    std::vector<Literal> out{literal()};
    while (accept(Tok::Comma)) out.push_back(literal());
    return out;
  }

  std::vector<std::string> name_set() {
    expect(Tok::LBrace);
    std::vector<std::string> out;
    if (!at(Tok::RBrace)) {
      out.push_back(lower(expect(Tok::Ident, "name").text));
      while (accept(Tok::Comma)) out.push_back(lower(expect(Tok::Ident, "name").text));
    }
    expect(Tok::RBrace);
    return out;
  }

  double number() {
    auto t = peek();
    if (!at(Tok::Number) && !at(Tok::Int)) fail(t.loc, "expected probability, found " + found(t));
    take();
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      fail(t.loc, "malformed number '" + t.text + "'");
    return v;
  }

  std::int64_t parse_int(const Token& t) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      fail(t.loc, "malformed integer '" + t.text + "'");
    return v;
  }

  const std::string& file() const { return file_; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string file_;
  std::vector<Diagnostic>& diags_;
};

// Resolves raw atoms against the declarations: lowercases constants, turns
// names in time positions into variables, and checks arity and membership.
class Resolver {
 public:
  Resolver(const KnowledgeBase& kb, std::string file, std::vector<Diagnostic>& diags)
      : kb_(kb), file_(std::move(file)), diags_(diags) {}

  void error(SourceLoc loc, std::string msg) {
    diags_.push_back({file_, loc, Severity::Error, std::move(msg)});
  }

  // Returns false when the atom could not be resolved.
  bool resolve(Atom& a, PredKind expected, VariableTypes& vars) {
    const auto* decl = kb_.predicate(a.pred);
    if (!decl) {
      error(a.loc, "undeclared predicate '" + a.pred + "'");
      return false;
    }
    if (decl->kind != expected) {
      error(a.loc, "'" + a.pred + "' is a " +
                       (decl->probabilistic() ? "p-predicate" : "c-predicate") +
                       " but a " +
                       (expected == PredKind::Probabilistic ? "p-atom" : "c-atom") +
                       " is required here");
      return false;
    }
    if (a.args.size() != decl->arity()) {
      error(a.loc, "arity mismatch for '" + a.pred + "': expected " +
                       std::to_string(decl->arity()) + " arguments, found " +
                       std::to_string(a.args.size()));
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      Term& t = a.args[i];
      DomainRef dom = domain_at(*decl, i);
      if (dom.kind == DomainRef::Kind::Time) {
        if (t.kind == Term::Kind::Constant) t.kind = Term::Kind::Variable;
      } else {
        if (t.kind == Term::Kind::Integer) {
          error(t.loc, "integer in non-time position " + std::to_string(i + 1) + " of '" +
                           a.pred + "'");
          ok = false;
          continue;
        }
        if (t.kind == Term::Kind::Variable && t.offset != 0) {
          error(t.loc, "time offset on '" + t.name + "' outside a time position");
          ok = false;
          continue;
        }
        if (t.kind == Term::Kind::Constant) {
          t.name = lower(t.name);
          const auto& ms = members(kb_, dom);
          if (std::find(ms.begin(), ms.end(), t.name) == ms.end()) {
            if (dom.kind == DomainRef::Kind::Values)
              error(t.loc, "value '" + t.name + "' is not in VAL(" + a.pred + ")");
            else
              error(t.loc, "constant '" + t.name + "' is not in domain '" + dom.name + "'");
            ok = false;
          }
        }
      }
      if (t.kind == Term::Kind::Variable) {
        auto [it, inserted] = vars.emplace(t.name, dom);
        if (!inserted && !(it->second == dom)) {
          error(t.loc, "variable '" + t.name + "' used with conflicting domains '" +
                           it->second.name + "' and '" + dom.name + "'");
          ok = false;
        }
      }
    }
    return ok;
  }

 private:
  const KnowledgeBase& kb_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
};

struct RawStatement {
  enum class Kind { Domain, Value, Pred, CPred, Prob, Ctx, Combine };
  Kind kind;
  SourceLoc loc;
  std::string name;
  std::vector<std::string> names;
  ProbSentence sentence;
  ContextClause clause;
  CombineDecl combine;
  SourceLoc alpha_loc;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Knowledge bases

/// Parses and validates a knowledge base. Throws Error(ErrorKind::Parse) with
/// every diagnostic found; never returns a partially valid KB.
inline KnowledgeBase parse_kb(std::string_view text, const std::string& file = "<input>",
                              const RuleRegistry& registry = RuleRegistry::builtin()) {
  using detail::RawStatement;
  using detail::Tok;
  std::vector<Diagnostic> diags;
  detail::Reader r(detail::lex(text), file, diags);
  std::vector<RawStatement> stmts;

  while (!r.at_end()) {
    try {
      RawStatement st{};
      st.loc = r.peek().loc;
      if (!r.at(Tok::Ident)) r.fail(r.peek().loc, "expected a statement, found " +
                                                      detail::Reader::found(r.peek()));
      std::string kw = detail::lower(r.take().text);
      if (kw == "domain" || kw == "value") {
        st.kind = kw == "domain" ? RawStatement::Kind::Domain : RawStatement::Kind::Value;
        st.name = detail::lower(r.expect(Tok::Ident, "name").text);
        r.expect(Tok::Eq);
        st.names = r.name_set();
      } else if (kw == "pred" || kw == "cpred") {
        st.kind = kw == "pred" ? RawStatement::Kind::Pred : RawStatement::Kind::CPred;
        st.name = detail::lower(r.expect(Tok::Ident, "predicate name").text);
        if (r.accept(Tok::LParen)) {
          if (!r.at(Tok::RParen)) {
            st.names.push_back(detail::lower(r.expect(Tok::Ident, "domain name").text));
            while (r.accept(Tok::Comma))
              st.names.push_back(detail::lower(r.expect(Tok::Ident, "domain name").text));
          }
          r.expect(Tok::RParen);
        }
      } else if (kw == "prob") {
        st.kind = RawStatement::Kind::Prob;
        st.sentence.loc = st.loc;
        st.sentence.cons = r.atom();
        if (r.accept(Tok::Bar)) {
          st.sentence.ante.push_back(r.atom());
          while (r.accept(Tok::Comma)) st.sentence.ante.push_back(r.atom());
        }
        r.expect(Tok::Eq);
        st.alpha_loc = r.peek().loc;
        st.sentence.alpha = r.number();
        if (r.accept(Tok::Arrow)) st.sentence.context = r.literals();
      } else if (kw == "ctx") {
        st.kind = RawStatement::Kind::Ctx;
        st.clause.loc = st.loc;
        st.clause.head = r.atom();
        if (r.accept(Tok::Arrow)) st.clause.body = r.literals();
      } else if (kw == "combine") {
        st.kind = RawStatement::Kind::Combine;
        st.combine.loc = st.loc;
        st.combine.pred = detail::lower(r.expect(Tok::Ident, "predicate name").text);
        if (!r.at_keyword("with")) r.fail(r.peek().loc, "expected 'with', found " +
                                                            detail::Reader::found(r.peek()));
        r.take();
        st.combine.rule = detail::lower(r.expect(Tok::Ident, "combining rule name").text);
        if (r.accept(Tok::LParen)) {
          if (!r.at(Tok::RParen)) {
            do {
              auto key = detail::lower(r.expect(Tok::Ident, "parameter name").text);
              r.expect(Tok::Eq);
              auto v = r.take();
              if (v.kind != Tok::Ident && v.kind != Tok::Int && v.kind != Tok::Number)
                r.fail(v.loc, "expected parameter value, found " + detail::Reader::found(v));
              st.combine.params.emplace_back(
                  key, v.kind == Tok::Ident ? detail::lower(v.text) : v.text);
            } while (r.accept(Tok::Comma));
          }
          r.expect(Tok::RParen);
        }
      } else {
        r.fail(st.loc, "unknown statement '" + kw + "'");
      }
      r.expect(Tok::Dot, "'.' at end of statement");
      stmts.push_back(std::move(st));
    } catch (const detail::SyntaxError&) {
      r.recover();
    }
  }

  KnowledgeBase kb;
  auto error = [&](SourceLoc loc, std::string msg) {
    diags.push_back({file, loc, Severity::Error, std::move(msg)});
  };

  // Declarations first, so statements may appear in any order.
  for (auto& st : stmts) {
    switch (st.kind) {
      case RawStatement::Kind::Domain:
      case RawStatement::Kind::Value: {
        bool is_domain = st.kind == RawStatement::Kind::Domain;
        if (is_domain && st.name == kTimeDomain) {
          error(st.loc, "'time' is a reserved domain");
          break;
        }
        auto& target = is_domain ? kb.domains : kb.values;
        if (std::any_of(target.begin(), target.end(),
                        [&](const AttributeDomain& d) { return d.name == st.name; })) {
          error(st.loc, std::string("duplicate declaration of ") +
                            (is_domain ? "domain '" : "VAL(") + st.name +
                            (is_domain ? "'" : ")"));
          break;
        }
        std::set<std::string> seen;
        bool ok = true;
        for (const auto& m : st.names) {
          if (!seen.insert(m).second) {
            error(st.loc, "duplicate member '" + m + "' in '" + st.name + "'");
            ok = false;
          }
        }
        if (!is_domain && st.names.empty()) {
          error(st.loc, "VAL(" + st.name + ") must not be empty");
          ok = false;
        }
        if (ok) target.push_back(AttributeDomain{st.name, st.names, st.loc});
        break;
      }
      case RawStatement::Kind::Pred:
      case RawStatement::Kind::CPred:
        if (kb.predicate(st.name)) {
          error(st.loc, "duplicate declaration of predicate '" + st.name + "'");
          break;
        }
        kb.predicates.push_back(PredicateDecl{
            st.name,
            st.kind == RawStatement::Kind::Pred ? PredKind::Probabilistic : PredKind::Context,
            st.names, st.loc});
        break;
      default: break;
    }
  }
  for (const auto& p : kb.predicates) {
    int timed = 0;
    for (const auto& d : p.args) {
      if (d == kTimeDomain) {
        ++timed;
      } else if (!kb.domain(d)) {
        error(p.loc, "undeclared domain '" + d + "' in declaration of '" + p.name + "'");
      }
    }
    if (timed > 1) error(p.loc, "predicate '" + p.name + "' has more than one time attribute");
    if (p.probabilistic() && !kb.values_of(p.name))
      error(p.loc, "p-predicate '" + p.name + "' has no 'value " + p.name + " = {...}' declaration");
  }
  for (const auto& v : kb.values) {
    const auto* p = kb.predicate(v.name);
    if (!p)
      error(v.loc, "VAL declared for undeclared predicate '" + v.name + "'");
    else if (!p->probabilistic())
      error(v.loc, "VAL declared for c-predicate '" + v.name + "'");
  }

  detail::Resolver res(kb, file, diags);
  for (auto& st : stmts) {
    switch (st.kind) {
      case RawStatement::Kind::Prob: {
        auto& s = st.sentence;
        if (!(s.alpha >= 0.0 && s.alpha <= 1.0))
          error(st.alpha_loc, "probability " + std::to_string(s.alpha) + " out of range [0,1]");
        VariableTypes vars;
        bool ok = res.resolve(s.cons, PredKind::Probabilistic, vars);
        for (auto& a : s.ante) ok = res.resolve(a, PredKind::Probabilistic, vars) && ok;
        for (auto& l : s.context) ok = res.resolve(l.atom, PredKind::Context, vars) && ok;
        if (ok) kb.pb.push_back(std::move(s));
        break;
      }
      case RawStatement::Kind::Ctx: {
        auto& c = st.clause;
        VariableTypes vars;
        bool ok = res.resolve(c.head, PredKind::Context, vars);
        for (auto& l : c.body) ok = res.resolve(l.atom, PredKind::Context, vars) && ok;
        if (ok) kb.cb.push_back(std::move(c));
        break;
      }
      case RawStatement::Kind::Combine: {
        auto& c = st.combine;
        const auto* p = kb.predicate(c.pred);
        if (!p) {
          error(c.loc, "combine declared for undeclared predicate '" + c.pred + "'");
          break;
        }
        if (!p->probabilistic()) {
          error(c.loc, "combine declared for c-predicate '" + c.pred + "'");
          break;
        }
        if (std::any_of(kb.cr.begin(), kb.cr.end(),
                        [&](const CombineDecl& d) { return d.pred == c.pred; })) {
          error(c.loc, "duplicate combine declaration for '" + c.pred + "'");
          break;
        }
        if (!registry.find(c.rule)) {
          error(c.loc, "unknown combining rule '" + c.rule + "'");
          break;
        }
        if (auto d = c.param("distinguished")) {
          const auto* vals = kb.values_of(c.pred);
          if (vals && !vals->contains(*d)) {
            error(c.loc, "distinguished value '" + *d + "' is not in VAL(" + c.pred + ")");
            break;
          }
        }
        kb.cr.push_back(std::move(c));
        break;
      }
      default: break;
    }
  }

  if (!diags.empty()) {
    std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return std::pair(a.loc.line, a.loc.col) < std::pair(b.loc.line, b.loc.col);
    });
    throw Error(ErrorKind::Parse, std::move(diags));
  }
  return kb;
}

/// Parses a single atom (a query, or one fact) against the declarations of kb.
inline Atom parse_atom(const KnowledgeBase& kb, std::string_view text, PredKind kind,
                       const std::string& file = "<query>") {
  std::vector<Diagnostic> diags;
  detail::Reader r(detail::lex(text), file, diags);
  Atom a;
  try {
    a = r.atom();
    r.accept(detail::Tok::Dot);
    if (!r.at_end())
      r.fail(r.peek().loc, "unexpected " + detail::Reader::found(r.peek()) + " after atom");
  } catch (const detail::SyntaxError&) {
    throw Error(ErrorKind::Parse, std::move(diags));
  }
  VariableTypes vars;
  detail::Resolver res(kb, file, diags);
  res.resolve(a, kind, vars);
  if (!diags.empty()) throw Error(ErrorKind::Parse, std::move(diags));
  return a;
}

/// Parses a context, evidence or plan file: a sequence of `atom.` statements.
inline std::vector<Atom> parse_facts(const KnowledgeBase& kb, std::string_view text, PredKind kind,
                                     const std::string& file = "<facts>") {
  std::vector<Diagnostic> diags;
  detail::Reader r(detail::lex(text), file, diags);
  detail::Resolver res(kb, file, diags);
  std::vector<Atom> out;
  while (!r.at_end()) {
    try {
      Atom a = r.atom();
      r.expect(detail::Tok::Dot, "'.' after fact");
      VariableTypes vars;
      if (res.resolve(a, kind, vars)) out.push_back(std::move(a));
    } catch (const detail::SyntaxError&) {
      r.recover();
    }
  }
  if (!diags.empty()) throw Error(ErrorKind::Parse, std::move(diags));
  return out;
}

// ---------------------------------------------------------------------------
// Printing

inline std::string to_string(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Constant: return t.name;
    case Term::Kind::Integer: return std::to_string(t.offset);
    case Term::Kind::Variable:
      if (t.offset > 0) return t.name + "+" + std::to_string(t.offset);
      if (t.offset < 0) return t.name + "-" + std::to_string(-t.offset);
      return t.name;
  }
  return {};
}

inline std::string to_string(const Atom& a) {
  std::string s = a.pred;
  if (a.args.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ", ";
    s += to_string(a.args[i]);
  }
  return s + ')';
}

inline std::string to_string(const Literal& l) {
  return (l.negated ? "not " : "") + to_string(l.atom);
}

/// Shortest decimal text that reads back as the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

namespace detail {

inline std::string join_literals(const std::vector<Literal>& ls) {
  std::string s;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (i) s += ", ";
    s += to_string(ls[i]);
  }
  return s;
}

inline std::string join_names(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) s += ", ";
    s += names[i];
  }
  return s;
}

}  // namespace detail

inline std::string to_string(const ProbSentence& s) {
  std::string out = "prob " + to_string(s.cons);
  for (std::size_t i = 0; i < s.ante.size(); ++i) out += (i ? ", " : " | ") + to_string(s.ante[i]);
  out += " = " + format_number(s.alpha);
  if (!s.context.empty()) out += " <- " + detail::join_literals(s.context);
  return out + '.';
}

inline std::string to_string(const ContextClause& c) {
  std::string out = "ctx " + to_string(c.head);
  if (!c.body.empty()) out += " <- " + detail::join_literals(c.body);
  return out + '.';
}

/// Canonical text of a KB; parse_kb(pretty_print(kb)) == kb.
inline std::string pretty_print(const KnowledgeBase& kb) {
  std::string out;
  for (const auto& d : kb.domains)
    out += "domain " + d.name + " = { " + detail::join_names(d.members) + " }.\n";
  for (const auto& d : kb.values)
    out += "value " + d.name + " = { " + detail::join_names(d.members) + " }.\n";
  for (const auto& p : kb.predicates) {
    out += p.probabilistic() ? "pred " : "cpred ";
    out += p.name;
    if (!p.args.empty()) out += "(" + detail::join_names(p.args) + ")";
    out += ".\n";
  }
  for (const auto& c : kb.cr) {
    out += "combine " + c.pred + " with " + c.rule;
    if (!c.params.empty()) {
      out += '(';
      for (std::size_t i = 0; i < c.params.size(); ++i) {
        if (i) out += ", ";
        out += c.params[i].first + "=" + c.params[i].second;
      }
      out += ')';
    }
    out += ".\n";
  }
  for (const auto& s : kb.pb) out += to_string(s) + '\n';
  for (const auto& c : kb.cb) out += to_string(c) + '\n';
  return out;
}

}  // namespace ctkb
