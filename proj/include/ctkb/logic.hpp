#pragma once

// Substitutions, unification, grounding of the context base and SLDNF
// resolution under Clark completion semantics.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ctkb/lang.hpp"

namespace ctkb {

// ---------------------------------------------------------------------------
// Substitutions

namespace detail {
inline auto term_key(const Term& t) { return std::tie(t.kind, t.name, t.offset); }
}  // namespace detail

/// Mapping variable -> term. Kept idempotent: no bound variable occurs in the
/// range.
struct Substitution {
  std::map<std::string, Term> bindings;

  const Term* lookup(const std::string& var) const {
    auto it = bindings.find(var);
    return it == bindings.end() ? nullptr : &it->second;
  }

  Term apply(const Term& t) const {
    if (!t.is_variable()) return t;
    const Term* b = lookup(t.name);
    if (!b) return t;
    Term out = *b;
    out.loc = t.loc;
    if (out.kind != Term::Kind::Constant) out.offset += t.offset;
    return out;
  }

  Atom apply(const Atom& a) const {
    Atom out = a;
    for (auto& t : out.args) t = apply(t);
    return out;
  }

  Literal apply(const Literal& l) const { return {apply(l.atom), l.negated}; }

  /// Restriction to the given variables.
  Substitution restrict_to(const std::set<std::string>& vars) const {
    Substitution out;
    for (const auto& [k, v] : bindings)
      if (vars.count(k)) out.bindings.emplace(k, v);
    return out;
  }

  bool operator==(const Substitution& o) const {
    if (bindings.size() != o.bindings.size()) return false;
    auto it = o.bindings.begin();
    for (const auto& [k, v] : bindings) {
      if (k != it->first || detail::term_key(v) != detail::term_key(it->second)) return false;
      ++it;
    }
    return true;
  }

  bool operator<(const Substitution& o) const {
    return std::lexicographical_compare(
        bindings.begin(), bindings.end(), o.bindings.begin(), o.bindings.end(),
        [](const auto& a, const auto& b) {
          return std::tie(a.first, a.second.kind, a.second.name, a.second.offset) <
                 std::tie(b.first, b.second.kind, b.second.name, b.second.offset);
        });
  }
};

inline std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s.bindings) {
    if (!first) out += ", ";
    first = false;
    out += k + "=" + to_string(v);
  }
  return out + "}";
}

namespace detail {

inline void collect_vars(const Atom& a, std::set<std::string>& out) {
  for (const auto& t : a.args)
    if (t.is_variable()) out.insert(t.name);
}

// Adds var -> t (t already fully substituted) and rewrites the existing range.
inline void bind_var(Substitution& s, const std::string& var, const Term& t) {
  Substitution single;
  single.bindings.emplace(var, t);
  for (auto& [k, v] : s.bindings) v = single.apply(v);
  s.bindings.emplace(var, t);
}

inline bool unify_terms(Substitution& s, Term a, Term b) {
  a = s.apply(a);
  b = s.apply(b);
  using K = Term::Kind;
  if (a.kind != K::Variable && b.kind == K::Variable) std::swap(a, b);
  if (a.kind == K::Variable) {
    if (b.kind == K::Variable) {
      if (a.name == b.name) return a.offset == b.offset;
      // a + ka = b + kb  =>  a = b + (kb - ka)
      detail::bind_var(s, a.name, Term::variable(b.name, b.offset - a.offset));
      return true;
    }
    if (b.kind == K::Integer) {
      detail::bind_var(s, a.name, Term::integer(b.offset - a.offset));
      return true;
    }
    if (a.offset != 0) return false;
    detail::bind_var(s, a.name, Term::constant(b.name));
    return true;
  }
  if (a.kind != b.kind) return false;
  return a.kind == K::Integer ? a.offset == b.offset : a.name == b.name;
}

}  // namespace detail

inline std::set<std::string> variables_of(const Atom& a) {
  std::set<std::string> out;
  detail::collect_vars(a, out);
  return out;
}

/// Most general unifier. Time offsets are solved symbolically, so t-1
/// unifies with 2 by t -> 3.
inline std::optional<Substitution> unify(const Atom& a, const Atom& b) {
  if (a.pred != b.pred || a.args.size() != b.args.size()) return std::nullopt;
  Substitution s;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!detail::unify_terms(s, a.args[i], b.args[i])) return std::nullopt;
  return s;
}

// ---------------------------------------------------------------------------
// Grounding

inline Symbol to_symbol(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Integer: return t.offset;
    case Term::Kind::Constant: return t.name;
    case Term::Kind::Variable: break;
  }
  throw std::logic_error("to_symbol: variable '" + t.name + "' is not ground");
}

inline Term to_term(const Symbol& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return Term::integer(*i);
  return Term::constant(std::get<std::string>(s));
}

/// Ground c-atom, or obj() of a ground p-atom when `drop_value` is set.
inline Object ground_object(const Atom& a, const Substitution& s, bool drop_value = false) {
  Object o{a.pred, {}};
  std::size_t n = a.args.size() - (drop_value && !a.args.empty() ? 1 : 0);
  for (std::size_t i = 0; i < n; ++i) o.args.push_back(to_symbol(s.apply(a.args[i])));
  return o;
}

inline GroundAtom ground_patom(const Atom& a, const Substitution& s) {
  return {ground_object(a, s, true), to_string(to_symbol(s.apply(a.args.back())))};
}

/// Atom form of a ground object; the value slot, if requested, is a fresh
/// variable that cannot occur in source text.
inline Atom object_atom(const Object& o, std::optional<std::string> value_var = std::nullopt) {
  Atom a{o.pred, {}, {}};
  for (const auto& s : o.args) a.args.push_back(to_term(s));
  if (value_var) a.args.push_back(Term::variable(*value_var));
  return a;
}

inline Atom ground_atom_to_atom(const GroundAtom& g) {
  Atom a = object_atom(g.obj);
  a.args.push_back(Term::constant(g.value));
  return a;
}

inline constexpr const char* kValueVar = "?value";

/// Per time variable, the offset range it occurs with.
inline std::map<std::string, std::pair<std::int64_t, std::int64_t>> time_offsets(
    const KnowledgeBase& kb, const std::vector<const Atom*>& atoms) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> out;
  for (const auto* a : atoms) {
    const auto* decl = kb.predicate(a->pred);
    if (!decl) continue;
    auto pos = decl->time_position();
    if (!pos || *pos >= a->args.size()) continue;
    const Term& t = a->args[*pos];
    if (!t.is_variable()) continue;
    auto [it, inserted] = out.emplace(t.name, std::pair(t.offset, t.offset));
    if (!inserted) {
      it->second.first = std::min(it->second.first, t.offset);
      it->second.second = std::max(it->second.second, t.offset);
    }
  }
  return out;
}

/// Enumerates every type-consistent assignment of `vars` (those not already
/// bound in `base`). Time variables range so that some occurrence lands in
/// `bounds`.
inline void for_each_grounding(
    const KnowledgeBase& kb, const VariableTypes& vars,
    const std::map<std::string, std::pair<std::int64_t, std::int64_t>>& offsets,
    const Bounds& bounds, const Substitution& base,
    const std::function<void(const Substitution&)>& visit) {
  std::vector<std::pair<std::string, DomainRef>> todo;
  for (const auto& [v, d] : vars)
    if (!base.lookup(v)) todo.emplace_back(v, d);
  Substitution cur = base;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == todo.size()) {
      visit(cur);
      return;
    }
    const auto& [var, dom] = todo[i];
    if (dom.kind == DomainRef::Kind::Time) {
      std::int64_t lo = bounds.from, hi = bounds.to;
      if (auto it = offsets.find(var); it != offsets.end()) {
        lo = bounds.from - it->second.second;
        hi = bounds.to - it->second.first;
      }
      for (std::int64_t t = lo; t <= hi; ++t) {
        cur.bindings[var] = Term::integer(t);
        rec(i + 1);
      }
    } else {
      for (const auto& m : members(kb, dom)) {
        cur.bindings[var] = Term::constant(m);
        rec(i + 1);
      }
    }
    cur.bindings.erase(var);
  };
  rec(0);
}

inline bool atom_within(const KnowledgeBase& kb, const Atom& a, const Substitution& s,
                        const Bounds& b) {
  const auto* decl = kb.predicate(a.pred);
  auto pos = decl ? decl->time_position() : std::nullopt;
  if (!pos) return true;
  return b.contains(std::get<std::int64_t>(to_symbol(s.apply(a.args[*pos]))));
}

// ---------------------------------------------------------------------------
// Ground context programs

struct GroundLiteral {
  Object atom;
  bool negated = false;
  auto operator<=>(const GroundLiteral&) const = default;
  bool operator==(const GroundLiteral&) const = default;
};

struct GroundClause {
  Object head;
  std::vector<GroundLiteral> body;
  auto operator<=>(const GroundClause&) const = default;
  bool operator==(const GroundClause&) const = default;
};

/// ground(CB) over the session bounds and declared domains, plus the context
/// facts C as body-less clauses.
struct GroundedContextProgram {
  std::vector<GroundClause> clauses;
  std::set<Object> facts;
  Bounds bounds;
  std::map<Object, std::vector<std::size_t>> by_head;

  std::size_t atom_count() const {
    std::set<Object> atoms;
    for (const auto& c : clauses) {
      atoms.insert(c.head);
      for (const auto& l : c.body) atoms.insert(l.atom);
    }
    return atoms.size();
  }

  void index() {
    by_head.clear();
    for (std::size_t i = 0; i < clauses.size(); ++i) by_head[clauses[i].head].push_back(i);
  }
};

/// Grounds every CB clause whose head falls inside `bounds`. Body atoms may
/// fall outside; they have no clauses and therefore fail.
inline GroundedContextProgram ground_context_program(const KnowledgeBase& kb,
                                                     const std::vector<Object>& facts,
                                                     const Bounds& bounds,
                                                     bool include_facts = true) {
  GroundedContextProgram p;
  p.bounds = bounds;
  std::set<GroundClause> seen;
  for (const auto& c : kb.cb) {
    std::vector<const Atom*> atoms{&c.head};
    for (const auto& l : c.body) atoms.push_back(&l.atom);
    for_each_grounding(kb, variable_types(kb, c), time_offsets(kb, atoms), bounds, {},
                       [&](const Substitution& s) {
                         if (!atom_within(kb, c.head, s, bounds)) return;
                         GroundClause g{ground_object(c.head, s), {}};
                         for (const auto& l : c.body)
                           g.body.push_back({ground_object(l.atom, s), l.negated});
                         if (seen.insert(g).second) p.clauses.push_back(std::move(g));
                       });
  }
  if (include_facts) {
    for (const auto& f : facts) {
      p.facts.insert(f);
      GroundClause g{f, {}};
      if (seen.insert(g).second) p.clauses.push_back(std::move(g));
    }
  }
  p.index();
  return p;
}

/// SLDNF over a ground context program. Negative literals are selected only
/// when ground and succeed by finite failure. Results of completed ground
/// derivations are memoised per prover instance.
class SldnfProver {
 public:
  explicit SldnfProver(const GroundedContextProgram& program,
                       std::optional<std::size_t> depth_bound = std::nullopt)
      : program_(program), depth_bound_(depth_bound ? *depth_bound : program.atom_count() + 1) {}

  bool prove(const Object& atom) { return prove(atom, 0); }

  bool holds(const GroundLiteral& l) { return prove(l.atom) != l.negated; }

  /// Answers for a (possibly non-ground) conjunction: the distinct ground
  /// substitutions for the goal's variables, sorted. A ground goal yields
  /// either one empty substitution (yes) or none (no).
  std::vector<Substitution> solve(const std::vector<Literal>& goal) {
    std::set<std::string> vars;
    for (const auto& l : goal) detail::collect_vars(l.atom, vars);
    std::set<Substitution> answers;
    solve_rec(goal, Substitution{}, vars, answers);
    return {answers.begin(), answers.end()};
  }

  std::size_t depth_bound() const { return depth_bound_; }

 private:
  bool prove(const Object& atom, std::size_t depth) {
    if (auto it = memo_.find(atom); it != memo_.end()) return it->second;
    if (depth > depth_bound_)
      throw Error(ErrorKind::DepthExceeded, "SLDNF depth bound " + std::to_string(depth_bound_) +
                                                " exceeded at " + to_string(atom));
    bool result = false;
    if (auto it = program_.by_head.find(atom); it != program_.by_head.end()) {
      for (std::size_t idx : it->second) {
        const auto& clause = program_.clauses[idx];
        bool all = true;
        for (const auto& l : clause.body) {
          if (prove(l.atom, depth + 1) == l.negated) {
            all = false;
            break;
          }
        }
        if (all) {
          result = true;
          break;
        }
      }
    }
    memo_.emplace(atom, result);
    return result;
  }

  void solve_rec(std::vector<Literal> goal, const Substitution& s,
                 const std::set<std::string>& vars, std::set<Substitution>& answers) {
    if (goal.empty()) {
      answers.insert(s.restrict_to(vars));
      return;
    }
    std::size_t pick = goal.size();
    for (std::size_t i = 0; i < goal.size(); ++i) {
      if (!goal[i].negated || s.apply(goal[i].atom).is_ground()) {
        pick = i;
        break;
      }
    }
    if (pick == goal.size())
      throw Error(ErrorKind::NotAllowed,
                  "floundering: only non-ground negative literals remain, e.g. not " +
                      to_string(s.apply(goal.front().atom)));
    Literal lit = s.apply(goal[pick]);
    goal.erase(goal.begin() + static_cast<std::ptrdiff_t>(pick));
    if (lit.atom.is_ground()) {
      if (prove(ground_object(lit.atom, {})) != lit.negated) solve_rec(goal, s, vars, answers);
      return;
    }
    auto first = program_.by_head.lower_bound(Object{lit.atom.pred, {}});
    for (auto it = first; it != program_.by_head.end() && it->first.pred == lit.atom.pred; ++it) {
      auto mgu = unify(lit.atom, object_atom(it->first));
      if (!mgu || !prove(it->first)) continue;
      Substitution next = s;
      for (const auto& [k, v] : mgu->bindings) detail::bind_var(next, k, v);
      solve_rec(goal, next, vars, answers);
    }
  }

  const GroundedContextProgram& program_;
  std::size_t depth_bound_;
  std::map<Object, bool> memo_;
};

inline std::vector<Substitution> sldnf_solve(const GroundedContextProgram& program,
                                             const std::vector<Literal>& goal) {
  SldnfProver prover(program);
  return prover.solve(goal);
}

// ---------------------------------------------------------------------------
// Static checks

/// First cycle found by depth-first search in node order, as the sequence of
/// nodes along it; empty when the graph is acyclic.
template <typename Node>
std::vector<Node> find_cycle(const std::map<Node, std::vector<Node>>& edges) {
  enum class Mark { White, Grey, Black };
  std::map<Node, Mark> mark;
  std::vector<Node> stack;
  std::vector<Node> cycle;
  std::function<bool(const Node&)> visit = [&](const Node& n) {
    mark[n] = Mark::Grey;
    stack.push_back(n);
    if (auto it = edges.find(n); it != edges.end()) {
      for (const auto& m : it->second) {
        Mark mm = mark.count(m) ? mark[m] : Mark::White;
        if (mm == Mark::Grey) {
          auto from = std::find(stack.begin(), stack.end(), m);
          cycle.assign(from, stack.end());
          return true;
        }
        if (mm == Mark::White && visit(m)) return true;
      }
    }
    stack.pop_back();
    mark[n] = Mark::Black;
    return false;
  };
  for (const auto& [n, _] : edges) {
    if ((!mark.count(n) || mark[n] == Mark::White) && visit(n)) return cycle;
  }
  return {};
}

struct AcyclicityReport {
  std::vector<Object> cycle;  // empty when acyclic
  bool acyclic() const { return cycle.empty(); }
};

/// Dependency graph of ground(CB) over the bounds: each head depends on every
/// body atom, positive or negated.
inline AcyclicityReport check_acyclic(const KnowledgeBase& kb, const Bounds& bounds) {
  auto program = ground_context_program(kb, {}, bounds, false);
  std::map<Object, std::vector<Object>> edges;
  for (const auto& c : program.clauses) {
    auto& out = edges[c.head];
    for (const auto& l : c.body) out.push_back(l.atom);
  }
  for (auto& [_, v] : edges) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return {find_cycle(edges)};
}

/// Finite-groundability check. Every variable must occur in a position that
/// binds it: a p-atom, a clause head, or a positive context literal. A variable
/// seen only under `not` is rejected. This is a sufficient condition for the
/// usual allowedness criterion on the grounded, bounded programs used here.
inline std::vector<Diagnostic> check_allowed(const KnowledgeBase& kb,
                                             const std::string& file = "<kb>") {
  std::vector<Diagnostic> out;
  auto check = [&](SourceLoc loc, const std::set<std::string>& binding,
                   const std::vector<Literal>& lits, const std::string& what) {
    std::set<std::string> reported;
    for (const auto& l : lits) {
      if (!l.negated) continue;
      for (const auto& t : l.atom.args) {
        if (!t.is_variable() || binding.count(t.name) || !reported.insert(t.name).second) continue;
        out.push_back({file, loc, Severity::Error,
                       "variable '" + t.name + "' in " + what +
                           " occurs only in negated context literals and cannot be grounded"});
      }
    }
  };
  for (const auto& s : kb.pb) {
    std::set<std::string> binding;
    detail::collect_vars(s.cons, binding);
    for (const auto& a : s.ante) detail::collect_vars(a, binding);
    for (const auto& l : s.context)
      if (!l.negated) detail::collect_vars(l.atom, binding);
    check(s.loc, binding, s.context, "sentence for '" + s.cons.pred + "'");
  }
  for (const auto& c : kb.cb) {
    std::set<std::string> binding;
    detail::collect_vars(c.head, binding);
    for (const auto& l : c.body)
      if (!l.negated) detail::collect_vars(l.atom, binding);
    check(c.loc, binding, c.body, "clause for '" + c.head.pred + "'");
  }
  return out;
}

}  // namespace ctkb
