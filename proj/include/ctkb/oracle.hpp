#pragma once

// Reference answers by brute force: possible-model enumeration over the
// combined base, rejection sampling, and d-separation.

#include <random>

#include "ctkb/infer.hpp"

namespace ctkb {

inline constexpr std::size_t kEnumerationGuard = 10'000'000;

/// One value index per object of the enclosing JointDistribution.
struct PossibleModel {
  std::vector<std::size_t> assignment;
};

struct JointDistribution {
  std::vector<Object> objects;  // topological order
  std::vector<std::vector<std::string>> values;
  std::vector<std::pair<PossibleModel, double>> models;  // zero-mass models omitted

  std::optional<std::size_t> position(const Object& o) const {
    auto it = std::find(objects.begin(), objects.end(), o);
    if (it == objects.end()) return std::nullopt;
    return static_cast<std::size_t>(it - objects.begin());
  }

  double total() const {
    double z = 0;
    for (const auto& [_, p] : models) z += p;
    return z;
  }
};

/// Chain-rule product over the combined base, restricted to `objects`
/// (which must be closed under parents). Models of zero mass are skipped.
inline JointDistribution enumerate_joint(const CombinedBase& cb, const std::set<Object>& objects,
                                         std::size_t guard = kEnumerationGuard) {
  std::map<Object, std::vector<Object>> graph;
  for (const auto& o : objects) {
    const auto* n = cb.find(o);
    if (!n) throw Error(ErrorKind::Quantification, "no sentence has " + to_string(o) + " as its consequent");
    auto& out = graph[o];
    for (const auto& p : n->parents) {
      if (!objects.count(p))
        throw Error(ErrorKind::Quantification, "parent " + to_string(p) + " of " + to_string(o) + " is missing");
      out.push_back(p);
    }
  }
  if (auto cycle = find_cycle(graph); !cycle.empty())
    throw Error(ErrorKind::Cycle, "influenced-by cycle: " + describe_cycle(cycle));

  JointDistribution joint;
  std::set<Object> placed;
  while (joint.objects.size() < objects.size()) {
    for (const auto& o : objects) {
      if (placed.count(o)) continue;
      const auto& ps = graph[o];
      if (std::all_of(ps.begin(), ps.end(), [&](const Object& p) { return placed.count(p) > 0; })) {
        placed.insert(o);
        joint.objects.push_back(o);
        joint.values.push_back(cb.find(o)->values);
        break;
      }
    }
  }
  std::size_t n = joint.objects.size();
  std::vector<const CombinedNode*> nodes;
  std::vector<std::vector<std::size_t>> parent_pos;
  for (const auto& o : joint.objects) {
    nodes.push_back(cb.find(o));
    std::vector<std::size_t> pp;
    for (const auto& p : nodes.back()->parents) pp.push_back(*joint.position(p));
    parent_pos.push_back(std::move(pp));
  }

  std::vector<std::size_t> current(n, 0);
  auto cell = [&](std::size_t k) -> double {
    const auto& node = *nodes[k];
    std::size_t row = 0;
    for (std::size_t i = 0; i < parent_pos[k].size(); ++i)
      row = row * node.parent_values[i].size() + current[parent_pos[k][i]];
    const auto& c = node.rows[row][current[k]];
    if (!c || std::isnan(*c))
      throw Error(ErrorKind::Quantification, "missing CPT cell for " + to_string(joint.objects[k]));
    return *c;
  };
  // Counting pass first, so an oversized joint is rejected before it is stored.
  std::size_t count = 0;
  auto counter = [&](auto& self, std::size_t k) -> void {
    if (k == n) {
      if (++count > guard)
        throw Error(ErrorKind::EnumerationGuard,
                    "more than " + std::to_string(guard) + " possible models with positive mass");
      return;
    }
    for (std::size_t v = 0; v < joint.values[k].size(); ++v) {
      current[k] = v;
      if (cell(k) > 0) self(self, k + 1);
    }
    current[k] = 0;
  };
  counter(counter, 0);
  joint.models.reserve(count);
  auto dfs = [&](auto& self, std::size_t k, double mass) -> void {
    if (k == n) {
      joint.models.push_back({{current}, mass});
      return;
    }
    for (std::size_t v = 0; v < joint.values[k].size(); ++v) {
      current[k] = v;
      double p = cell(k);
      if (p > 0) self(self, k + 1, mass * p);
    }
    current[k] = 0;
  };
  dfs(dfs, 0, 1.0);
  return joint;
}

/// P(query = v | evidence) for every v, as ratios of summed model masses.
inline PosteriorVector conditional(const JointDistribution& joint, const Object& query,
                                   const std::vector<GroundAtom>& evidence) {
  auto qpos = joint.position(query);
  if (!qpos) throw Error(ErrorKind::Validation, to_string(query) + " is not in the joint");
  std::vector<std::pair<std::size_t, std::size_t>> ev;
  for (const auto& e : evidence) {
    auto p = joint.position(e.obj);
    if (!p) throw Error(ErrorKind::Validation, "evidence object " + to_string(e.obj) + " is not in the joint");
    const auto& vals = joint.values[*p];
    auto v = std::find(vals.begin(), vals.end(), e.value);
    if (v == vals.end()) throw Error(ErrorKind::Validation, "value '" + e.value + "' not in VAL");
    ev.emplace_back(*p, static_cast<std::size_t>(v - vals.begin()));
  }
  std::vector<double> mass(joint.values[*qpos].size(), 0.0);
  double z = 0;
  for (const auto& [m, p] : joint.models) {
    if (!std::all_of(ev.begin(), ev.end(), [&](const auto& e) { return m.assignment[e.first] == e.second; }))
      continue;
    mass[m.assignment[*qpos]] += p;
    z += p;
  }
  if (!(z >= kZeroEvidence)) throw Error(ErrorKind::ImpossibleEvidence, "evidence has probability zero");
  PosteriorVector out{query, joint.values[*qpos], {}};
  for (double x : mass) out.probabilities.push_back(x / z);
  return out;
}

struct ReferenceAnswer {
  std::vector<InstanceAnswer> instances;
  std::vector<QueryInstance> unanswered;
  JointDistribution joint;
};

/// Forward route: discharge, RAS, CRPB, then enumeration over the ancestral
/// closure of the query instances in the RAS and the evidence objects.
inline ReferenceAnswer reference_answer(const KnowledgeBase& kb, const SessionInput& input,
                                        const RuleRegistry& registry = RuleRegistry::builtin(),
                                        std::size_t guard = kEnumerationGuard) {
  require_static_checks(kb, input.bounds);
  Session session = validate_session(kb, input);
  auto rb = build_relevant_base(kb, session, registry);
  ReferenceAnswer out;
  std::set<Object> seeds = session.evidence_objects();
  std::vector<QueryInstance> answered;
  for (auto& q : query_instances(kb, session)) {
    if (rb.ras.objects.count(q.object)) {
      seeds.insert(q.object);
      answered.push_back(std::move(q));
    } else {
      out.unanswered.push_back(std::move(q));
    }
  }
  auto scope = ancestors(rb.crpb, seeds);
  RelevantAtomSet ras;
  ras.objects = scope;
  ras.bounds = session.bounds;
  require_well_formed(restrict_to(rb.crpb, scope), ras);
  out.joint = enumerate_joint(rb.crpb, scope, guard);
  for (auto& q : answered)
    out.instances.push_back({q.bindings, conditional(out.joint, q.object, session.evidence)});
  return out;
}

struct SampleResult {
  std::size_t drawn = 0;
  std::size_t accepted = 0;
  std::vector<PosteriorVector> posteriors;  // aligned with the targets
};

/// Ancestral sampling with rejection of samples that disagree with the
/// evidence. Deterministic for a fixed (net, n, seed).
inline SampleResult forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed,
                                   const NetEvidence& evidence, const std::vector<std::size_t>& targets) {
  std::mt19937_64 rng(seed);
  auto order = net.topological_order();
  std::vector<std::vector<std::size_t>> counts;
  for (auto t : targets) counts.emplace_back(net.nodes.at(t).cardinality(), 0);
  std::vector<std::size_t> state(net.nodes.size(), 0);
  SampleResult out;
  out.drawn = n;
  for (std::size_t s = 0; s < n; ++s) {
    bool keep = true;
    for (auto i : order) {
      const auto& node = net.nodes[i];
      std::size_t row = 0;
      for (auto p : node.parents) row = row * net.nodes[p].cardinality() + state[p];
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      std::size_t k = node.cardinality();
      std::size_t v = k - 1;
      double acc = 0;
      for (std::size_t j = 0; j < k; ++j) {
        acc += node.cpt[row * k + j];
        if (u < acc) {
          v = j;
          break;
        }
      }
      state[i] = v;
      if (auto e = evidence.find(i); e != evidence.end() && e->second != v) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    ++out.accepted;
    for (std::size_t t = 0; t < targets.size(); ++t) ++counts[t][state[targets[t]]];
  }
  if (out.accepted == 0) throw Error(ErrorKind::Sampling, "no sample agreed with the evidence");
  for (std::size_t t = 0; t < targets.size(); ++t) {
    PosteriorVector pv{net.nodes[targets[t]].object, net.nodes[targets[t]].values, {}};
    for (auto c : counts[t]) pv.probabilities.push_back(static_cast<double>(c) / out.accepted);
    out.posteriors.push_back(std::move(pv));
  }
  return out;
}

/// True iff every node of `xs` is d-separated from every node of `ys` given
/// `zs`, decided on the moralized ancestral graph.
inline bool d_separated(const BayesNet& net, const std::set<std::size_t>& xs, const std::set<std::size_t>& ys,
                        const std::set<std::size_t>& zs) {
  std::vector<std::size_t> seeds(xs.begin(), xs.end());
  seeds.insert(seeds.end(), ys.begin(), ys.end());
  seeds.insert(seeds.end(), zs.begin(), zs.end());
  auto keep = net.ancestors(seeds);
  std::vector<std::set<std::size_t>> adj(net.nodes.size());
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (!keep[i]) continue;
    const auto& ps = net.nodes[i].parents;
    for (auto p : ps) {
      adj[i].insert(p);
      adj[p].insert(i);
    }
    for (auto a : ps)
      for (auto b : ps)
        if (a != b) adj[a].insert(b);
  }
  std::vector<bool> seen(net.nodes.size(), false);
  std::vector<std::size_t> stack;
  for (auto x : xs)
    if (!zs.count(x)) stack.push_back(x);
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    if (seen[i]) continue;
    seen[i] = true;
    if (ys.count(i)) return false;
    for (auto j : adj[i])
      if (!zs.count(j) && !seen[j]) stack.push_back(j);
  }
  return true;
}

/// Largest absolute difference between two posterior vectors.
inline double max_deviation(const PosteriorVector& a, const PosteriorVector& b) {
  if (a.probabilities.size() != b.probabilities.size()) return std::numeric_limits<double>::infinity();
  double d = 0;
  for (std::size_t i = 0; i < a.probabilities.size(); ++i)
    d = std::max(d, std::abs(a.probabilities[i] - b.probabilities[i]));
  return d;
}

}  // namespace ctkb
