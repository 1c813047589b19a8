#pragma once

// Inference sessions: context facts, evidence, time bounds and the query.

#include "ctkb/logic.hpp"

namespace ctkb {

struct SessionInput {
  std::vector<Atom> context;   // ground c-atoms (C)
  std::vector<Atom> evidence;  // p-atoms (E)
  Bounds bounds;
  Atom query;  // complete query: the value argument is a variable
  std::string context_file = "<context>";
  std::string evidence_file = "<evidence>";
  std::string query_file = "<query>";
};

/// A session after validation: C and ground(E) are explicit sets.
struct Session {
  std::vector<Object> context;
  std::vector<GroundAtom> evidence;
  Bounds bounds;
  Atom query;

  std::set<Object> evidence_objects() const {
    std::set<Object> out;
    for (const auto& e : evidence) out.insert(e.obj);
    return out;
  }
};

namespace detail {

inline std::optional<std::int64_t> constant_time(const KnowledgeBase& kb, const Atom& a) {
  const auto* decl = kb.predicate(a.pred);
  auto pos = decl ? decl->time_position() : std::nullopt;
  if (!pos || *pos >= a.args.size() || a.args[*pos].kind != Term::Kind::Integer) return std::nullopt;
  return a.args[*pos].offset;
}

}  // namespace detail

/// Checks bounds, time confinement of C and E, coherence of ground(E) and the
/// shape of the query. Throws Error(ErrorKind::Validation) listing every
/// problem; a query or fact timed outside the bounds is ErrorKind::Bounds.
inline Session validate_session(const KnowledgeBase& kb, const SessionInput& in) {
  std::vector<Diagnostic> diags;
  bool bounds_only = true;
  auto error = [&](const std::string& file, SourceLoc loc, std::string msg, bool bounds = false) {
    diags.push_back({file, loc, Severity::Error, std::move(msg)});
    bounds_only = bounds_only && bounds;
  };
  Session s;
  s.bounds = in.bounds;
  if (in.bounds.from > in.bounds.to)
    error("<session>", {}, "time bounds [" + std::to_string(in.bounds.from) + "," +
                               std::to_string(in.bounds.to) + "] are empty");

  auto confined = [&](const Atom& a, const std::string& file, const char* what) {
    if (auto t = detail::constant_time(kb, a); t && !in.bounds.contains(*t)) {
      error(file, a.loc, std::string(what) + " " + to_string(a) + " is timed outside [" +
                             std::to_string(in.bounds.from) + "," + std::to_string(in.bounds.to) + "]",
            true);
      return false;
    }
    return true;
  };

  for (const auto& c : in.context) {
    const auto* decl = kb.predicate(c.pred);
    if (!decl || decl->probabilistic() || c.args.size() != decl->arity()) {
      error(in.context_file, c.loc, "context fact " + to_string(c) + " is not a declared c-atom");
      continue;
    }
    if (!c.is_ground()) {
      error(in.context_file, c.loc, "context fact " + to_string(c) + " is not ground");
      continue;
    }
    if (confined(c, in.context_file, "context fact")) s.context.push_back(ground_object(c, {}));
  }
  std::sort(s.context.begin(), s.context.end());
  s.context.erase(std::unique(s.context.begin(), s.context.end()), s.context.end());

  std::set<GroundAtom> ground_e;
  for (const auto& e : in.evidence) {
    const auto* decl = kb.predicate(e.pred);
    if (!decl || !decl->probabilistic() || e.args.size() != decl->arity()) {
      error(in.evidence_file, e.loc, "evidence " + to_string(e) + " is not a declared p-atom");
      continue;
    }
    if (e.args.back().is_variable()) {
      error(in.evidence_file, e.loc, "evidence " + to_string(e) + " leaves its value unbound");
      continue;
    }
    if (!confined(e, in.evidence_file, "evidence")) continue;
    std::vector<const Atom*> atoms{&e};
    for_each_grounding(kb, variable_types(kb, e), time_offsets(kb, atoms), in.bounds, {},
                       [&](const Substitution& sub) {
                         if (atom_within(kb, e, sub, in.bounds)) ground_e.insert(ground_patom(e, sub));
                       });
  }
  s.evidence.assign(ground_e.begin(), ground_e.end());
  for (std::size_t i = 1; i < s.evidence.size(); ++i) {
    if (s.evidence[i].obj == s.evidence[i - 1].obj)
      error(in.evidence_file, {}, "incoherent evidence: " + to_string(s.evidence[i - 1]) + " and " +
                                      to_string(s.evidence[i]) + " assign two values to " +
                                      to_string(s.evidence[i].obj));
  }

  const Atom& q = in.query;
  const auto* qdecl = kb.predicate(q.pred);
  if (!qdecl || !qdecl->probabilistic() || q.args.size() != qdecl->arity()) {
    error(in.query_file, q.loc, "query " + to_string(q) + " is not a declared p-atom");
  } else if (!q.args.back().is_variable()) {
    error(in.query_file, q.loc, "query " + to_string(q) + ": the last argument must be a variable");
  } else {
    const auto& v = q.args.back().name;
    for (std::size_t i = 0; i + 1 < q.args.size(); ++i) {
      if (q.args[i].is_variable() && q.args[i].name == v)
        error(in.query_file, q.loc, "query " + to_string(q) + ": value variable '" + v +
                                        "' also occurs in another argument");
    }
    confined(q, in.query_file, "query");
  }
  s.query = q;

  if (!diags.empty()) {
    auto kind = bounds_only ? ErrorKind::Bounds : ErrorKind::Validation;
    throw Error(kind, std::move(diags));
  }
  return s;
}

struct QueryInstance {
  Substitution bindings;  // over the query's non-value variables
  Object object;
};

/// Ground instances of the query's object within the bounds, sorted.
inline std::vector<QueryInstance> query_instances(const KnowledgeBase& kb, const Session& s) {
  Atom pattern = s.query;
  pattern.args.pop_back();
  Atom as_obj = pattern;  // non-value arguments only
  std::vector<const Atom*> atoms{&as_obj};
  VariableTypes vars;
  const auto* decl = kb.predicate(s.query.pred);
  for (std::size_t i = 0; i < pattern.args.size(); ++i)
    if (pattern.args[i].is_variable()) vars.emplace(pattern.args[i].name, domain_at(*decl, i));
  std::vector<QueryInstance> out;
  std::set<std::string> names;
  for (const auto& [k, _] : vars) names.insert(k);
  for_each_grounding(kb, vars, time_offsets(kb, atoms), s.bounds, {}, [&](const Substitution& sub) {
    Object o{pattern.pred, {}};
    for (const auto& t : pattern.args) o.args.push_back(to_symbol(sub.apply(t)));
    if (!within(kb, o, s.bounds)) return;
    out.push_back({sub.restrict_to(names), std::move(o)});
  });
  std::sort(out.begin(), out.end(),
            [](const QueryInstance& a, const QueryInstance& b) { return a.object < b.object; });
  return out;
}

/// Parse + validate in one step from file contents.
inline SessionInput make_session_input(const KnowledgeBase& kb, std::string_view query,
                                       std::string_view context, std::string_view evidence,
                                       Bounds bounds) {
  SessionInput in;
  in.query = parse_atom(kb, query, PredKind::Probabilistic, in.query_file);
  in.context = parse_facts(kb, context, PredKind::Context, in.context_file);
  in.evidence = parse_facts(kb, evidence, PredKind::Probabilistic, in.evidence_file);
  in.bounds = bounds;
  return in;
}

/// Static checks every pipeline runs before touching the session: the context
/// base must be acyclic over the bounds and the KB allowed.
inline void require_static_checks(const KnowledgeBase& kb, const Bounds& bounds) {
  if (auto report = check_acyclic(kb, bounds); !report.acyclic()) {
    std::string w;
    for (const auto& o : report.cycle) w += (w.empty() ? "" : " -> ") + to_string(o);
    throw Error(ErrorKind::Cycle, "context base is cyclic: " + w + " -> " + to_string(report.cycle.front()));
  }
  if (auto diags = check_allowed(kb); !diags.empty())
    throw Error(ErrorKind::NotAllowed, std::move(diags));
}

}  // namespace ctkb
