#pragma once

// The relevant part of a knowledge base for one session: context discharge,
// the bounded relevant atom set, the relevant probabilistic base, and the
// combined base with its quantification and consistency checks.

#include <cmath>
#include <map>
#include <set>

#include "ctkb/combining.hpp"
#include "ctkb/session.hpp"

namespace ctkb {

/// A ground, context-free sentence P(cons | ante) = alpha.
struct GroundSentence {
  GroundAtom cons;
  std::vector<GroundAtom> ante;  // sorted, duplicate-free, coherent
  double alpha = 0.0;

  auto operator<=>(const GroundSentence&) const = default;
  bool operator==(const GroundSentence&) const = default;
};

inline std::string to_string(const GroundSentence& s) {
  std::string out = "P(" + to_string(s.cons);
  for (std::size_t i = 0; i < s.ante.size(); ++i) out += (i ? ", " : " | ") + to_string(s.ante[i]);
  return out + ") = " + format_number(s.alpha);
}

struct DischargeResult {
  std::vector<GroundSentence> sentences;  // sorted, unique
  // Objects whose applicable instances needed an antecedent outside the bounds.
  std::map<Object, std::set<Object>> out_of_bounds;
};

namespace detail {

inline std::map<std::string, std::pair<std::int64_t, std::int64_t>> sentence_offsets(
    const KnowledgeBase& kb, const ProbSentence& s) {
  std::vector<const Atom*> patoms{&s.cons};
  for (const auto& a : s.ante) patoms.push_back(&a);
  auto out = time_offsets(kb, patoms);
  std::vector<const Atom*> catoms;
  for (const auto& l : s.context) catoms.push_back(&l.atom);
  for (const auto& [v, r] : time_offsets(kb, catoms)) out.emplace(v, r);
  return out;
}

// Grounds sentence `s` under `sub` (which binds every variable), returning
// nothing if the instance is outside the bounds, incoherent, or its context
// fails. Out-of-bounds antecedents of applicable instances are reported.
inline std::optional<GroundSentence> instantiate(const KnowledgeBase& kb, const ProbSentence& s,
                                                 const Substitution& sub, const Bounds& bounds,
                                                 SldnfProver& prover,
                                                 std::map<Object, std::set<Object>>& oob) {
  if (!atom_within(kb, s.cons, sub, bounds)) return std::nullopt;
  std::vector<Object> outside;
  for (const auto& a : s.ante)
    if (!atom_within(kb, a, sub, bounds)) outside.push_back(ground_object(a, sub, true));
  // A context literal outside the bounds cannot be decided. It blocks an
  // instance, but not the demand the instance makes on the missing window.
  for (const auto& l : s.context) {
    if (!atom_within(kb, l.atom, sub, bounds)) {
      if (outside.empty()) return std::nullopt;
      continue;
    }
    if (!prover.holds({ground_object(l.atom, sub), l.negated})) return std::nullopt;
  }
  GroundSentence g{ground_patom(s.cons, sub), {}, s.alpha};
  if (!outside.empty()) {
    oob[g.cons.obj].insert(outside.begin(), outside.end());
    return std::nullopt;
  }
  for (const auto& a : s.ante) g.ante.push_back(ground_patom(a, sub));
  std::sort(g.ante.begin(), g.ante.end());
  g.ante.erase(std::unique(g.ante.begin(), g.ante.end()), g.ante.end());
  // Conditioning on two values of one object is vacuous.
  if (!coherent(g.ante)) return std::nullopt;
  return g;
}

}  // namespace detail

/// Conditions PB on completed(C u CB): every ground instance inside the
/// bounds whose context SLDNF proves is kept with its context stripped.
inline DischargeResult discharge_contexts(const KnowledgeBase& kb, const Session& session) {
  auto program = ground_context_program(kb, session.context, session.bounds);
  SldnfProver prover(program);
  std::set<GroundSentence> out;
  DischargeResult result;
  for (const auto& s : kb.pb) {
    for_each_grounding(kb, variable_types(kb, s), detail::sentence_offsets(kb, s), session.bounds, {},
                       [&](const Substitution& sub) {
                         if (auto g = detail::instantiate(kb, s, sub, session.bounds, prover,
                                                          result.out_of_bounds))
                           out.insert(std::move(*g));
                       });
  }
  result.sentences.assign(out.begin(), out.end());
  return result;
}

/// RAS over the bounds. Ext-closed, so it is kept as a set of objects.
struct RelevantAtomSet {
  std::set<Object> objects;
  Bounds bounds;

  bool contains(const GroundAtom& a) const { return objects.count(a.obj) > 0; }

  std::vector<GroundAtom> atoms(const KnowledgeBase& kb) const {
    std::vector<GroundAtom> out;
    for (const auto& o : objects)
      for (const auto& v : values_of(kb, o)) out.push_back({o, v});
    return out;
  }
};

/// Least fixpoint seeded with ground(E): a sentence whose antecedents are all
/// relevant makes its consequent (and so its whole extension) relevant.
inline RelevantAtomSet compute_ras(const std::vector<GroundSentence>& sentences,
                                   const Session& session) {
  RelevantAtomSet ras;
  ras.bounds = session.bounds;
  std::map<Object, std::vector<std::size_t>> waiting;
  std::vector<std::size_t> unsatisfied(sentences.size(), 0);
  std::vector<Object> queue;
  auto add = [&](const Object& o) {
    if (ras.objects.insert(o).second) queue.push_back(o);
  };
  for (const auto& e : session.evidence) add(e.obj);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::set<Object> objs;
    for (const auto& a : sentences[i].ante) objs.insert(a.obj);
    unsatisfied[i] = objs.size();
    for (const auto& o : objs) waiting[o].push_back(i);
    if (objs.empty()) add(sentences[i].cons.obj);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    auto it = waiting.find(queue[head]);
    if (it == waiting.end()) continue;
    for (std::size_t i : it->second)
      if (--unsatisfied[i] == 0) add(sentences[i].cons.obj);
  }
  return ras;
}

/// Sentences whose consequent and antecedents all lie in the RAS.
inline std::vector<GroundSentence> relevant_sentences(const std::vector<GroundSentence>& sentences,
                                                      const RelevantAtomSet& ras) {
  std::vector<GroundSentence> out;
  for (const auto& s : sentences) {
    if (!ras.contains(s.cons)) continue;
    if (std::all_of(s.ante.begin(), s.ante.end(), [&](const GroundAtom& a) { return ras.contains(a); }))
      out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combined base

/// The combined conditional table of one object: one row per joint
/// assignment of its parents (first parent most significant), one cell per
/// value. A cell is empty when no sentence quantifies it.
struct CombinedNode {
  Object object;
  std::vector<std::string> values;
  std::vector<Object> parents;
  std::vector<std::vector<std::string>> parent_values;
  std::vector<std::vector<std::optional<double>>> rows;

  std::size_t row_count() const { return rows.size(); }

  std::vector<std::size_t> decode(std::size_t row) const {
    std::vector<std::size_t> idx(parents.size());
    for (std::size_t i = parents.size(); i-- > 0;) {
      idx[i] = row % parent_values[i].size();
      row /= parent_values[i].size();
    }
    return idx;
  }

  std::vector<GroundAtom> assignment(std::size_t row) const {
    auto idx = decode(row);
    std::vector<GroundAtom> out;
    for (std::size_t i = 0; i < parents.size(); ++i)
      out.push_back({parents[i], parent_values[i][idx[i]]});
    return out;
  }

  bool complete_row(std::size_t row) const {
    return std::all_of(rows[row].begin(), rows[row].end(), [](const auto& c) { return c.has_value() && !std::isnan(*c); });
  }
};

struct CombinedBase {
  std::map<Object, CombinedNode> nodes;

  const CombinedNode* find(const Object& o) const {
    auto it = nodes.find(o);
    return it == nodes.end() ? nullptr : &it->second;
  }

  /// The base as ground sentences, one per quantified cell.
  std::vector<GroundSentence> sentences() const {
    std::vector<GroundSentence> out;
    for (const auto& [o, n] : nodes) {
      for (std::size_t r = 0; r < n.row_count(); ++r) {
        auto given = n.assignment(r);
        for (std::size_t v = 0; v < n.values.size(); ++v)
          if (n.rows[r][v]) out.push_back({{o, n.values[v]}, given, *n.rows[r][v]});
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

/// Groups the sentences for each consequent object into rule groups (same
/// antecedent atoms, consequent varying over VAL). For every joint parent
/// assignment the applicable groups, at most one per antecedent assignment,
/// are merged by the predicate's combining rule; a lone group passes through.
inline CombinedBase combine_rpb(const KnowledgeBase& kb, const std::vector<GroundSentence>& rpb,
                                const RuleRegistry& registry = RuleRegistry::builtin()) {
  struct Group {
    std::vector<GroundAtom> ante;
    std::map<std::string, double> cells;
  };
  std::map<Object, std::map<std::vector<GroundAtom>, Group>> by_obj;
  for (const auto& s : rpb) {
    auto& g = by_obj[s.cons.obj][s.ante];
    g.ante = s.ante;
    auto [it, inserted] = g.cells.emplace(s.cons.value, s.alpha);
    if (!inserted && it->second != s.alpha)
      throw Error(ErrorKind::Combine, "conflicting duplicate sentences: " +
                                          to_string(GroundSentence{s.cons, s.ante, it->second}) +
                                          " and " + to_string(s));
  }
  CombinedBase out;
  for (const auto& [obj, groups] : by_obj) {
    CombinedNode node;
    node.object = obj;
    node.values = values_of(kb, obj);
    std::set<Object> parents;
    for (const auto& [ante, _] : groups)
      for (const auto& a : ante) parents.insert(a.obj);
    node.parents.assign(parents.begin(), parents.end());
    std::size_t rows = 1;
    for (const auto& p : node.parents) {
      node.parent_values.push_back(values_of(kb, p));
      rows *= node.parent_values.back().size();
    }
    // Each group as (parent index, value index) requirements.
    std::vector<std::pair<const Group*, std::vector<std::pair<std::size_t, std::size_t>>>> reqs;
    for (const auto& [ante, g] : groups) {
      std::vector<std::pair<std::size_t, std::size_t>> r;
      bool valid = true;
      for (const auto& a : ante) {
        auto pi = static_cast<std::size_t>(
            std::lower_bound(node.parents.begin(), node.parents.end(), a.obj) - node.parents.begin());
        const auto& pv = node.parent_values[pi];
        auto vi = std::find(pv.begin(), pv.end(), a.value);
        if (vi == pv.end()) valid = false;
        r.emplace_back(pi, static_cast<std::size_t>(vi - pv.begin()));
      }
      if (valid) reqs.emplace_back(&g, std::move(r));
    }
    const auto decl = kb.combining_rule(obj.pred);
    const auto& rule = registry.resolve(decl.rule);
    node.rows.assign(rows, std::vector<std::optional<double>>(node.values.size()));
    for (std::size_t r = 0; r < rows; ++r) {
      auto idx = node.decode(r);
      std::vector<const Group*> applicable;
      for (const auto& [g, req] : reqs) {
        if (std::all_of(req.begin(), req.end(),
                        [&](const auto& pv) { return idx[pv.first] == pv.second; }))
          applicable.push_back(g);
      }
      auto& row = node.rows[r];
      if (applicable.size() == 1) {
        for (std::size_t v = 0; v < node.values.size(); ++v)
          if (auto it = applicable[0]->cells.find(node.values[v]); it != applicable[0]->cells.end())
            row[v] = it->second;
        continue;
      }
      if (applicable.empty()) continue;
      bool complete = std::all_of(applicable.begin(), applicable.end(), [&](const Group* g) {
        return g->cells.size() == node.values.size();
      });
      if (!complete) {
        // Cells every group quantifies are known to exist but cannot be
        // combined; they stay NaN so the row is never mistaken for complete.
        for (std::size_t v = 0; v < node.values.size(); ++v) {
          bool everywhere = std::all_of(applicable.begin(), applicable.end(), [&](const Group* g) {
            return g->cells.count(node.values[v]) > 0;
          });
          if (everywhere) row[v] = std::nan("");
        }
        continue;
      }
      std::vector<CauseMechanism> mechanisms;
      for (const auto* g : applicable) {
        CauseMechanism m{g->ante, {}};
        for (const auto& v : node.values) m.distribution.push_back(g->cells.at(v));
        mechanisms.push_back(std::move(m));
      }
      try {
        auto combined = apply_rule(rule, obj, node.values, mechanisms, decl.params);
        for (std::size_t v = 0; v < node.values.size(); ++v) row[v] = combined.distribution[v];
      } catch (const Error& e) {
        throw Error(ErrorKind::Combine, to_string(obj) + ": " + e.what());
      }
    }
    out.nodes.emplace(obj, std::move(node));
  }
  return out;
}

struct QuantificationIssue {
  Object object;
  std::vector<GroundAtom> given;
  std::string value;  // empty: the object has no sentence at all
  std::string message;
};

/// Every RAS object is a consequent, and every cell of every row is
/// quantified.
inline std::vector<QuantificationIssue> check_complete_quantification(const CombinedBase& cb,
                                                                      const RelevantAtomSet& ras) {
  std::vector<QuantificationIssue> out;
  for (const auto& o : ras.objects) {
    if (!cb.find(o))
      out.push_back({o, {}, {}, "no sentence has " + to_string(o) + " as its consequent"});
  }
  for (const auto& [o, n] : cb.nodes) {
    for (std::size_t r = 0; r < n.row_count(); ++r) {
      for (std::size_t v = 0; v < n.values.size(); ++v) {
        if (n.rows[r][v]) continue;
        auto given = n.assignment(r);
        std::string msg = "missing CPT cell: " + to_string(GroundAtom{o, n.values[v]});
        if (!given.empty()) {
          msg += " given ";
          for (std::size_t i = 0; i < given.size(); ++i) msg += (i ? ", " : "") + to_string(given[i]);
        }
        out.push_back({o, std::move(given), n.values[v], std::move(msg)});
      }
    }
  }
  return out;
}

struct RowSumViolation {
  Object object;
  std::vector<GroundAtom> given;
  double sum = 0.0;
};

struct ConsistencyReport {
  std::vector<Object> cycle;  // an influenced-by cycle, if any
  std::vector<RowSumViolation> row_sums;
  bool consistent() const { return cycle.empty() && row_sums.empty(); }
};

inline std::map<Object, std::vector<Object>> influence_graph(const CombinedBase& cb) {
  std::map<Object, std::vector<Object>> edges;
  for (const auto& [o, n] : cb.nodes) edges[o] = n.parents;
  return edges;
}

/// No object influences itself, and every complete row sums to one.
inline ConsistencyReport check_consistency(const CombinedBase& cb, double tolerance = kSumTolerance) {
  ConsistencyReport rep;
  rep.cycle = find_cycle(influence_graph(cb));
  for (const auto& [o, n] : cb.nodes) {
    for (std::size_t r = 0; r < n.row_count(); ++r) {
      if (!n.complete_row(r)) continue;
      double sum = 0.0;
      for (const auto& c : n.rows[r]) sum += *c;
      if (!(std::abs(sum - 1.0) <= tolerance)) rep.row_sums.push_back({o, n.assignment(r), sum});
    }
  }
  return rep;
}

inline std::string describe(const RowSumViolation& v) {
  std::string msg = "probabilities of " + to_string(v.object);
  if (!v.given.empty()) {
    msg += " given ";
    for (std::size_t i = 0; i < v.given.size(); ++i) msg += (i ? ", " : "") + to_string(v.given[i]);
  }
  return msg + " sum to " + format_number(v.sum) + ", not 1";
}

inline std::string describe_cycle(const std::vector<Object>& cycle) {
  std::string w;
  for (const auto& o : cycle) w += (w.empty() ? "" : " -> ") + to_string(o);
  return w + " -> " + to_string(cycle.front());
}

/// Ancestor closure (inclusive) of `seeds` in the combined base.
inline std::set<Object> ancestors(const CombinedBase& cb, const std::set<Object>& seeds) {
  std::set<Object> out;
  std::vector<Object> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    Object o = stack.back();
    stack.pop_back();
    if (!out.insert(o).second) continue;
    if (const auto* n = cb.find(o))
      for (const auto& p : n->parents) stack.push_back(p);
  }
  return out;
}

/// Restriction of a combined base to a set of objects.
inline CombinedBase restrict_to(const CombinedBase& cb, const std::set<Object>& objects) {
  CombinedBase out;
  for (const auto& o : objects)
    if (const auto* n = cb.find(o)) out.nodes.emplace(o, *n);
  return out;
}

/// Throws if the base fails complete quantification or consistency.
inline void require_well_formed(const CombinedBase& cb, const RelevantAtomSet& ras) {
  auto cons = check_consistency(cb);
  if (!cons.cycle.empty())
    throw Error(ErrorKind::Cycle, "influenced-by cycle: " + describe_cycle(cons.cycle));
  if (auto issues = check_complete_quantification(cb, ras); !issues.empty())
    throw Error(ErrorKind::Quantification, issues.front().message);
  if (!cons.row_sums.empty()) throw Error(ErrorKind::Consistency, describe(cons.row_sums.front()));
}

/// Forward pipeline for one session: discharge, RAS, RPB, CRPB.
struct RelevantBase {
  Session session;
  DischargeResult discharged;
  RelevantAtomSet ras;
  std::vector<GroundSentence> rpb;
  CombinedBase crpb;
};

inline RelevantBase build_relevant_base(const KnowledgeBase& kb, const Session& session,
                                        const RuleRegistry& registry = RuleRegistry::builtin()) {
  RelevantBase rb;
  rb.session = session;
  rb.discharged = discharge_contexts(kb, session);
  rb.ras = compute_ras(rb.discharged.sentences, session);
  rb.rpb = relevant_sentences(rb.discharged.sentences, rb.ras);
  rb.crpb = combine_rpb(kb, rb.rpb, registry);
  return rb;
}

}  // namespace ctkb
