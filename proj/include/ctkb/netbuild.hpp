#pragma once

// Construction of supporting Bayesian networks by backward chaining from the
// query and evidence objects.

#include <sstream>

#include "ctkb/relevance.hpp"

namespace ctkb {

/// One random variable. The CPT is laid out row-major: one row per joint
/// parent assignment (first parent most significant), value index fastest.
struct NetNode {
  Object object;
  std::vector<std::string> values;
  std::vector<std::size_t> parents;  // indices into BayesNet::nodes, ascending
  std::vector<double> cpt;

  std::size_t cardinality() const { return values.size(); }
  std::size_t row_count() const { return values.empty() ? 0 : cpt.size() / values.size(); }
};

struct BayesNet {
  std::vector<NetNode> nodes;  // sorted by object

  std::optional<std::size_t> index_of(const Object& o) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), o,
                               [](const NetNode& n, const Object& x) { return n.object < x; });
    if (it == nodes.end() || it->object != o) return std::nullopt;
    return static_cast<std::size_t>(it - nodes.begin());
  }

  std::vector<std::size_t> roots() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].parents.empty()) out.push_back(i);
    return out;
  }

  std::size_t cpt_entries() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.cpt.size();
    return n;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.parents.size();
    return n;
  }

  /// Parents before children; ties broken by node order.
  std::vector<std::size_t> topological_order() const {
    std::vector<std::size_t> indegree(nodes.size(), 0);
    std::vector<std::vector<std::size_t>> children(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      indegree[i] = nodes[i].parents.size();
      for (auto p : nodes[i].parents) children[p].push_back(i);
    }
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (indegree[i] == 0) ready.insert(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      auto i = *ready.begin();
      ready.erase(ready.begin());
      order.push_back(i);
      for (auto c : children[i])
        if (--indegree[c] == 0) ready.insert(c);
    }
    if (order.size() != nodes.size()) throw Error(ErrorKind::Cycle, "network is cyclic");
    return order;
  }

  /// Ancestor closure (inclusive) of the given nodes.
  std::vector<bool> ancestors(const std::vector<std::size_t>& seeds) const {
    std::vector<bool> mark(nodes.size(), false);
    std::vector<std::size_t> stack(seeds.begin(), seeds.end());
    while (!stack.empty()) {
      auto i = stack.back();
      stack.pop_back();
      if (mark[i]) continue;
      mark[i] = true;
      for (auto p : nodes[i].parents) stack.push_back(p);
    }
    return mark;
  }
};

/// Network over `objects` from a combined base. Every object must have a
/// complete, normalized specification and the graph must be acyclic.
inline BayesNet net_from_combined(const CombinedBase& cb, const std::set<Object>& objects) {
  BayesNet net;
  for (const auto& o : objects) {
    const auto* n = cb.find(o);
    if (!n)
      throw Error(ErrorKind::Quantification, "no sentence has " + to_string(o) + " as its consequent");
    for (const auto& p : n->parents)
      if (!objects.count(p))
        throw Error(ErrorKind::Quantification,
                    "parent " + to_string(p) + " of " + to_string(o) + " is not in the network");
  }
  RelevantAtomSet scope;
  scope.objects = objects;
  auto restricted = restrict_to(cb, objects);
  require_well_formed(restricted, scope);
  for (const auto& o : objects) {
    const auto& n = *restricted.find(o);
    NetNode node;
    node.object = o;
    node.values = n.values;
    node.cpt.reserve(n.row_count() * n.values.size());
    for (const auto& row : n.rows)
      for (const auto& c : row) node.cpt.push_back(*c);
    net.nodes.push_back(std::move(node));
  }
  for (auto& node : net.nodes) {
    const auto& n = *restricted.find(node.object);
    for (const auto& p : n.parents) node.parents.push_back(*net.index_of(p));
  }
  return net;
}

struct NetBuildResult {
  BayesNet net;
  std::vector<QueryInstance> answered;  // instances with a supporting network
  std::vector<QueryInstance> unanswered;
};

/// Backward construction of the supporting networks for every ground
/// evidence atom and query instance. Each reached object is explored once,
/// across its whole extension: the sentences whose consequent unifies with it
/// are grounded, their contexts proved by SLDNF against C u CB, and their
/// antecedent objects explored in turn. Support is then the least fixpoint
/// over the explored objects, seeded by the evidence.
inline NetBuildResult build_net(const KnowledgeBase& kb, const Session& session,
                                const RuleRegistry& registry = RuleRegistry::builtin()) {
  auto program = ground_context_program(kb, session.context, session.bounds);
  SldnfProver prover(program);

  std::map<std::string, std::vector<std::size_t>> by_cons;
  for (std::size_t i = 0; i < kb.pb.size(); ++i) by_cons[kb.pb[i].cons.pred].push_back(i);
  std::vector<VariableTypes> types;
  std::vector<std::map<std::string, std::pair<std::int64_t, std::int64_t>>> offsets;
  for (const auto& s : kb.pb) {
    types.push_back(variable_types(kb, s));
    offsets.push_back(detail::sentence_offsets(kb, s));
  }

  auto instances = query_instances(kb, session);
  auto evidence = session.evidence_objects();

  std::map<Object, std::set<GroundSentence>> candidates;
  std::map<Object, std::set<Object>> oob;
  std::set<Object> explored;
  std::vector<Object> work(evidence.begin(), evidence.end());
  for (const auto& q : instances) work.push_back(q.object);
  while (!work.empty()) {
    Object o = work.back();
    work.pop_back();
    if (!explored.insert(o).second) continue;
    auto& mine = candidates[o];
    auto it = by_cons.find(o.pred);
    if (it == by_cons.end()) continue;
    Atom target = object_atom(o);
    for (std::size_t idx : it->second) {
      const auto& s = kb.pb[idx];
      Atom head = s.cons;
      head.args.pop_back();
      auto theta = unify(head, target);
      if (!theta) continue;
      for_each_grounding(kb, types[idx], offsets[idx], session.bounds, *theta,
                         [&](const Substitution& sub) {
                           auto g = detail::instantiate(kb, s, sub, session.bounds, prover, oob);
                           if (!g) return;
                           for (const auto& a : g->ante)
                             if (!explored.count(a.obj)) work.push_back(a.obj);
                           mine.insert(std::move(*g));
                         });
    }
  }

  // Least fixpoint of support over the explored objects.
  std::set<Object> supported(evidence.begin(), evidence.end());
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [o, sentences] : candidates) {
      if (supported.count(o)) continue;
      for (const auto& s : sentences) {
        if (std::all_of(s.ante.begin(), s.ante.end(),
                        [&](const GroundAtom& a) { return supported.count(a.obj) > 0; })) {
          supported.insert(o);
          changed = true;
          break;
        }
      }
    }
  }

  for (const auto& o : explored) {
    if (supported.count(o) && !evidence.count(o)) continue;
    auto d = oob.find(o);
    bool has_applicable = false;
    for (const auto& s : candidates[o])
      if (std::all_of(s.ante.begin(), s.ante.end(),
                      [&](const GroundAtom& a) { return supported.count(a.obj) > 0; }))
        has_applicable = true;
    if (has_applicable) continue;
    if (d != oob.end()) {
      std::string need;
      for (const auto& x : d->second) need += (need.empty() ? "" : ", ") + to_string(x);
      throw Error(ErrorKind::Bounds, "support for " + to_string(o) + " requires " + need +
                                         ", outside [" + std::to_string(session.bounds.from) + "," +
                                         std::to_string(session.bounds.to) + "]");
    }
    if (evidence.count(o))
      throw Error(ErrorKind::Quantification,
                  "no sentence has evidence object " + to_string(o) + " as its consequent");
  }

  NetBuildResult result;
  std::vector<Object> seeds(evidence.begin(), evidence.end());
  for (const auto& q : instances) {
    if (supported.count(q.object)) {
      result.answered.push_back(q);
      seeds.push_back(q.object);
    } else {
      result.unanswered.push_back(q);
    }
  }

  // Network objects: supported ancestors through applicable sentences.
  std::set<Object> objects;
  std::vector<GroundSentence> applicable;
  while (!seeds.empty()) {
    Object o = seeds.back();
    seeds.pop_back();
    if (!objects.insert(o).second) continue;
    for (const auto& s : candidates[o]) {
      if (!std::all_of(s.ante.begin(), s.ante.end(),
                       [&](const GroundAtom& a) { return supported.count(a.obj) > 0; }))
        continue;
      applicable.push_back(s);
      for (const auto& a : s.ante) seeds.push_back(a.obj);
    }
  }
  result.net = net_from_combined(combine_rpb(kb, applicable, registry), objects);
  return result;
}

/// The whole (iota, tau)-bounded network: every object of the RAS.
inline BayesNet build_full_net(const KnowledgeBase& kb, const Session& session,
                               const RuleRegistry& registry = RuleRegistry::builtin()) {
  auto rb = build_relevant_base(kb, session, registry);
  return net_from_combined(rb.crpb, rb.ras.objects);
}

/// `pred(args)@t` with the time argument pulled out.
inline std::string node_label(const KnowledgeBase& kb, const Object& o) {
  const auto* decl = kb.predicate(o.pred);
  std::size_t tpos = o.args.size();
  if (decl)
    if (auto p = decl->time_position()) tpos = *p;
  std::string s = o.pred;
  std::vector<std::string> args;
  for (std::size_t i = 0; i < o.args.size(); ++i)
    if (i != tpos) args.push_back(to_string(o.args[i]));
  if (!args.empty()) {
    s += '(';
    for (std::size_t i = 0; i < args.size(); ++i) s += (i ? "," : "") + args[i];
    s += ')';
  }
  if (tpos < o.args.size()) s += "@" + to_string(o.args[tpos]);
  return s;
}

/// Graphviz description: one vertex per node, one edge per parent link.
inline std::string export_dot(const KnowledgeBase& kb, const BayesNet& net) {
  std::ostringstream os;
  os << "digraph bayesnet {\n";
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    std::string label = node_label(kb, net.nodes[i].object);
    std::string escaped;
    for (char c : label) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    os << "  n" << i << " [label=\"" << escaped << "\"];\n";
  }
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    for (auto p : net.nodes[i].parents) os << "  n" << p << " -> n" << i << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace ctkb
