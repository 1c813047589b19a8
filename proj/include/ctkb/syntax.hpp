#pragma once

// Abstract syntax of knowledge bases and the ground objects the engine
// reasons about.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ctkb/diagnostics.hpp"

namespace ctkb {

inline constexpr const char* kTimeDomain = "time";

struct Bounds {
  std::int64_t from = 0;
  std::int64_t to = 0;

  bool contains(std::int64_t t) const { return from <= t && t <= to; }
  bool operator==(const Bounds&) const = default;
};

struct AttributeDomain {
  std::string name;
  std::vector<std::string> members;
  SourceLoc loc;

  bool contains(const std::string& m) const {
    return std::find(members.begin(), members.end(), m) != members.end();
  }
  std::optional<std::size_t> index_of(const std::string& m) const {
    auto it = std::find(members.begin(), members.end(), m);
    if (it == members.end()) return std::nullopt;
    return static_cast<std::size_t>(it - members.begin());
  }
  bool operator==(const AttributeDomain&) const = default;
};

enum class PredKind { Probabilistic, Context };

/// Declaration of a p- or c-predicate. `args` lists the attribute domains of
/// the non-value positions; for p-predicates the value attribute follows them
/// and ranges over the declared VAL set (see KnowledgeBase::values_of).
struct PredicateDecl {
  std::string name;
  PredKind kind = PredKind::Probabilistic;
  std::vector<std::string> args;
  SourceLoc loc;

  bool probabilistic() const { return kind == PredKind::Probabilistic; }
  std::size_t arity() const { return args.size() + (probabilistic() ? 1 : 0); }
  std::optional<std::size_t> time_position() const {
    for (std::size_t i = 0; i < args.size(); ++i)
      if (args[i] == kTimeDomain) return i;
    return std::nullopt;
  }
  bool operator==(const PredicateDecl&) const = default;
};

/// Constant, variable (optionally offset, time positions only) or integer.
struct Term {
  enum class Kind { Constant, Variable, Integer };

  Kind kind = Kind::Constant;
  std::string name;
  std::int64_t offset = 0;  // integer value for Kind::Integer
  SourceLoc loc;

  static Term constant(std::string n) { return {Kind::Constant, std::move(n), 0, {}}; }
  static Term variable(std::string n, std::int64_t off = 0) {
    return {Kind::Variable, std::move(n), off, {}};
  }
  static Term integer(std::int64_t v) { return {Kind::Integer, {}, v, {}}; }

  bool is_variable() const { return kind == Kind::Variable; }
  bool is_ground() const { return kind != Kind::Variable; }
  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string pred;
  std::vector<Term> args;
  SourceLoc loc;

  bool is_ground() const {
    return std::all_of(args.begin(), args.end(), [](const Term& t) { return t.is_ground(); });
  }
  bool operator==(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool negated = false;
  bool operator==(const Literal&) const = default;
};

struct ContextClause {
  Atom head;
  std::vector<Literal> body;
  SourceLoc loc;
  bool operator==(const ContextClause&) const = default;
};

struct ProbSentence {
  Atom cons;
  std::vector<Atom> ante;
  double alpha = 0.0;
  std::vector<Literal> context;
  SourceLoc loc;

  bool context_free() const { return context.empty(); }
  bool operator==(const ProbSentence&) const = default;
};

struct CombineDecl {
  std::string pred;
  std::string rule;
  std::vector<std::pair<std::string, std::string>> params;
  SourceLoc loc;

  std::optional<std::string> param(const std::string& key) const {
    for (const auto& [k, v] : params)
      if (k == key) return v;
    return std::nullopt;
  }
  bool operator==(const CombineDecl&) const = default;
};

inline constexpr const char* kDefaultCombiningRule = "noisy_max";

/// KB = <PD, PB, CB, CR> together with the declared attribute and value
/// domains. Statement order within each part is preserved.
struct KnowledgeBase {
  std::vector<AttributeDomain> domains;
  std::vector<AttributeDomain> values;  // VAL(p), named after p
  std::vector<PredicateDecl> predicates;
  std::vector<ProbSentence> pb;
  std::vector<ContextClause> cb;
  std::vector<CombineDecl> cr;

  const PredicateDecl* predicate(const std::string& name) const {
    for (const auto& p : predicates)
      if (p.name == name) return &p;
    return nullptr;
  }
  const AttributeDomain* domain(const std::string& name) const {
    for (const auto& d : domains)
      if (d.name == name) return &d;
    return nullptr;
  }
  const AttributeDomain* values_of(const std::string& pred) const {
    for (const auto& d : values)
      if (d.name == pred) return &d;
    return nullptr;
  }
  /// Combining-rule declaration for p, or the default noisy_max.
  CombineDecl combining_rule(const std::string& pred) const {
    for (const auto& c : cr)
      if (c.pred == pred) return c;
    return CombineDecl{pred, kDefaultCombiningRule, {}, {}};
  }
  bool operator==(const KnowledgeBase&) const = default;
};

// ---------------------------------------------------------------------------
// Ground level

/// A ground argument: an integer time point or a constant.
using Symbol = std::variant<std::int64_t, std::string>;

inline std::string to_string(const Symbol& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
  return std::get<std::string>(s);
}

/// obj(A): the predicate with every argument but the value. Ground c-atoms use
/// the same representation (all of their arguments).
struct Object {
  std::string pred;
  std::vector<Symbol> args;

  auto operator<=>(const Object&) const = default;
  bool operator==(const Object&) const = default;
};

inline std::string to_string(const Object& o) {
  std::string s = o.pred;
  if (o.args.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < o.args.size(); ++i) {
    if (i) s += ',';
    s += to_string(o.args[i]);
  }
  return s + ')';
}

/// A ground p-atom: obj(A) together with val(A).
struct GroundAtom {
  Object obj;
  std::string value;

  auto operator<=>(const GroundAtom&) const = default;
  bool operator==(const GroundAtom&) const = default;
};

inline std::string to_string(const GroundAtom& a) {
  std::string s = a.obj.pred + '(';
  for (const auto& arg : a.obj.args) s += to_string(arg) + ',';
  return s + a.value + ')';
}

/// Timestamp of a ground object, if its predicate is timed.
inline std::optional<std::int64_t> time_of(const KnowledgeBase& kb, const Object& o) {
  const auto* decl = kb.predicate(o.pred);
  if (!decl) return std::nullopt;
  auto pos = decl->time_position();
  if (!pos || *pos >= o.args.size()) return std::nullopt;
  return std::get<std::int64_t>(o.args[*pos]);
}

inline bool within(const KnowledgeBase& kb, const Object& o, const Bounds& b) {
  auto t = time_of(kb, o);
  return !t || b.contains(*t);
}

/// VAL order of a ground object's predicate.
inline const std::vector<std::string>& values_of(const KnowledgeBase& kb, const Object& o) {
  static const std::vector<std::string> none;
  const auto* d = kb.values_of(o.pred);
  return d ? d->members : none;
}

/// Ext(A): every value-variant of a ground p-atom, in VAL order.
inline std::vector<GroundAtom> ext(const KnowledgeBase& kb, const GroundAtom& a) {
  std::vector<GroundAtom> out;
  for (const auto& v : values_of(kb, a.obj)) out.push_back(GroundAtom{a.obj, v});
  return out;
}

/// No two atoms share obj with different val.
inline bool coherent(const std::vector<GroundAtom>& atoms) {
  std::map<Object, std::string> seen;
  for (const auto& a : atoms) {
    auto [it, inserted] = seen.emplace(a.obj, a.value);
    if (!inserted && it->second != a.value) return false;
  }
  return true;
}

}  // namespace ctkb
