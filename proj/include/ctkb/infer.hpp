#pragma once

// Exact posterior computation by variable elimination.

#include <numeric>

#include "ctkb/netbuild.hpp"

namespace ctkb {

inline constexpr double kZeroEvidence = 1e-300;

/// A table over a set of network nodes. Scope is ascending by node index;
/// the table is row-major with the first scope variable most significant.
struct Factor {
  std::vector<std::size_t> scope;
  std::vector<std::size_t> cards;
  std::vector<double> table;

  static Factor unit() { return {{}, {}, {1.0}}; }

  std::size_t size() const { return table.size(); }

  std::optional<std::size_t> position(std::size_t var) const {
    auto it = std::lower_bound(scope.begin(), scope.end(), var);
    if (it == scope.end() || *it != var) return std::nullopt;
    return static_cast<std::size_t>(it - scope.begin());
  }
};

namespace detail {

// Advance a mixed-radix counter; returns false on wrap-around.
inline bool next_assignment(std::vector<std::size_t>& idx, const std::vector<std::size_t>& cards) {
  for (std::size_t i = idx.size(); i-- > 0;) {
    if (++idx[i] < cards[i]) return true;
    idx[i] = 0;
  }
  return false;
}

}  // namespace detail

inline Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.scope.begin(), a.scope.end(), b.scope.begin(), b.scope.end(),
                 std::back_inserter(out.scope));
  std::vector<std::size_t> stride_a(out.scope.size(), 0), stride_b(out.scope.size(), 0);
  std::size_t total = 1;
  for (std::size_t i = 0; i < out.scope.size(); ++i) {
    auto pa = a.position(out.scope[i]);
    auto pb = b.position(out.scope[i]);
    out.cards.push_back(pa ? a.cards[*pa] : b.cards[*pb]);
    total *= out.cards.back();
  }
  auto strides = [](const Factor& f) {
    std::vector<std::size_t> s(f.scope.size(), 1);
    for (std::size_t i = f.scope.size(); i-- > 1;) s[i - 1] = s[i] * f.cards[i];
    return s;
  };
  auto sa = strides(a), sb = strides(b);
  for (std::size_t i = 0; i < out.scope.size(); ++i) {
    if (auto p = a.position(out.scope[i])) stride_a[i] = sa[*p];
    if (auto p = b.position(out.scope[i])) stride_b[i] = sb[*p];
  }
  out.table.resize(total);
  std::vector<std::size_t> idx(out.scope.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k < total; ++k) {
    out.table[k] = a.table[ia] * b.table[ib];
    for (std::size_t i = idx.size(); i-- > 0;) {
      if (++idx[i] < out.cards[i]) {
        ia += stride_a[i];
        ib += stride_b[i];
        break;
      }
      ia -= stride_a[i] * (out.cards[i] - 1);
      ib -= stride_b[i] * (out.cards[i] - 1);
      idx[i] = 0;
    }
  }
  return out;
}

inline Factor sum_out(const Factor& f, std::size_t var) {
  auto pos = f.position(var);
  if (!pos) return f;
  Factor out;
  std::size_t inner = 1;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (i == *pos) continue;
    out.scope.push_back(f.scope[i]);
    out.cards.push_back(f.cards[i]);
  }
  for (std::size_t i = *pos + 1; i < f.scope.size(); ++i) inner *= f.cards[i];
  std::size_t card = f.cards[*pos];
  std::size_t outer = f.size() / (inner * card);
  out.table.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < card; ++c)
      for (std::size_t i = 0; i < inner; ++i)
        out.table[o * inner + i] += f.table[(o * card + c) * inner + i];
  return out;
}

/// Fixes `var` to value index `value` and drops it from the scope.
inline Factor reduce(const Factor& f, std::size_t var, std::size_t value) {
  auto pos = f.position(var);
  if (!pos) return f;
  Factor out;
  std::size_t inner = 1;
  for (std::size_t i = 0; i < f.scope.size(); ++i) {
    if (i == *pos) continue;
    out.scope.push_back(f.scope[i]);
    out.cards.push_back(f.cards[i]);
  }
  for (std::size_t i = *pos + 1; i < f.scope.size(); ++i) inner *= f.cards[i];
  std::size_t card = f.cards[*pos];
  std::size_t outer = f.size() / (inner * card);
  out.table.resize(outer * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i)
      out.table[o * inner + i] = f.table[(o * card + value) * inner + i];
  return out;
}

/// The CPT of node `i` as a factor over the node and its parents.
inline Factor node_factor(const BayesNet& net, std::size_t i) {
  const auto& node = net.nodes[i];
  Factor raw;
  raw.scope = node.parents;
  raw.scope.push_back(i);
  for (auto p : node.parents) raw.cards.push_back(net.nodes[p].cardinality());
  raw.cards.push_back(node.cardinality());
  raw.table = node.cpt;
  if (std::is_sorted(raw.scope.begin(), raw.scope.end())) return raw;
  // Reorder into ascending scope.
  std::vector<std::size_t> perm(raw.scope.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](auto x, auto y) { return raw.scope[x] < raw.scope[y]; });
  Factor out;
  for (auto p : perm) {
    out.scope.push_back(raw.scope[p]);
    out.cards.push_back(raw.cards[p]);
  }
  std::vector<std::size_t> stride(raw.scope.size(), 1);
  for (std::size_t k = raw.scope.size(); k-- > 1;) stride[k - 1] = stride[k] * raw.cards[k];
  out.table.resize(raw.table.size());
  std::vector<std::size_t> idx(out.scope.size(), 0);
  std::size_t k = 0;
  do {
    std::size_t src = 0;
    for (std::size_t j = 0; j < perm.size(); ++j) src += idx[j] * stride[perm[j]];
    out.table[k++] = raw.table[src];
  } while (detail::next_assignment(idx, out.cards));
  return out;
}

/// Evidence as node index -> value index.
using NetEvidence = std::map<std::size_t, std::size_t>;

inline NetEvidence net_evidence(const BayesNet& net, const std::vector<GroundAtom>& evidence) {
  NetEvidence out;
  for (const auto& e : evidence) {
    auto i = net.index_of(e.obj);
    if (!i) throw Error(ErrorKind::Validation, "evidence object " + to_string(e.obj) + " is not in the network");
    const auto& vals = net.nodes[*i].values;
    auto v = std::find(vals.begin(), vals.end(), e.value);
    if (v == vals.end())
      throw Error(ErrorKind::Validation, "value '" + e.value + "' is not in VAL of " + to_string(e.obj));
    out[*i] = static_cast<std::size_t>(v - vals.begin());
  }
  return out;
}

/// Min-fill elimination order over `vars` for the interaction graph of
/// `factors`; ties go to the smallest node index.
inline std::vector<std::size_t> min_fill_order(const std::vector<Factor>& factors,
                                               const std::set<std::size_t>& vars) {
  std::map<std::size_t, std::set<std::size_t>> adj;
  for (auto v : vars) adj[v];
  for (const auto& f : factors)
    for (auto a : f.scope)
      for (auto b : f.scope)
        if (a != b) adj[a].insert(b);
  std::set<std::size_t> remaining = vars;
  std::vector<std::size_t> order;
  while (!remaining.empty()) {
    std::size_t best = 0, best_fill = std::numeric_limits<std::size_t>::max();
    for (auto v : remaining) {
      std::size_t fill = 0;
      const auto& nb = adj[v];
      for (auto a = nb.begin(); a != nb.end(); ++a)
        for (auto b = std::next(a); b != nb.end(); ++b)
          if (!adj[*a].count(*b)) ++fill;
      if (fill < best_fill) {
        best_fill = fill;
        best = v;
      }
    }
    const auto nb = adj[best];
    for (auto a : nb) {
      for (auto b : nb)
        if (a != b) adj[a].insert(b);
      adj[a].erase(best);
    }
    adj.erase(best);
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

/// P(target, evidence) as a factor over the target, computed on the
/// ancestral closure of target and evidence. An explicit order, when given,
/// must list every variable to be eliminated.
inline Factor eliminate(const BayesNet& net, const NetEvidence& evidence, std::size_t target,
                        const std::optional<std::vector<std::size_t>>& order = std::nullopt) {
  if (target >= net.nodes.size()) throw Error(ErrorKind::Validation, "target is not a network node");
  std::vector<std::size_t> seeds{target};
  for (const auto& [i, _] : evidence) {
    if (i >= net.nodes.size()) throw Error(ErrorKind::Validation, "evidence node is not in the network");
    seeds.push_back(i);
  }
  auto keep = net.ancestors(seeds);
  std::vector<Factor> factors;
  std::set<std::size_t> hidden;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (!keep[i]) continue;
    Factor f = node_factor(net, i);
    for (const auto& [e, v] : evidence)
      if (e != target) f = reduce(f, e, v);
    factors.push_back(std::move(f));
    if (i != target && !evidence.count(i)) hidden.insert(i);
  }
  std::vector<std::size_t> elim;
  if (order) {
    for (auto v : *order)
      if (hidden.count(v)) elim.push_back(v);
    if (elim.size() != hidden.size())
      throw Error(ErrorKind::Validation, "elimination order does not cover the hidden variables");
  } else {
    elim = min_fill_order(factors, hidden);
  }
  for (auto v : elim) {
    Factor prod = Factor::unit();
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.position(v)) prod = multiply(prod, f);
      else rest.push_back(std::move(f));
    }
    rest.push_back(sum_out(prod, v));
    factors = std::move(rest);
  }
  Factor result = Factor::unit();
  for (const auto& f : factors) result = multiply(result, f);
  if (auto it = evidence.find(target); it != evidence.end()) {
    // Target observed: mass only at the observed value.
    for (std::size_t v = 0; v < result.size(); ++v)
      if (v != it->second) result.table[v] = 0.0;
  }
  return result;
}

struct PosteriorVector {
  Object query_object;
  std::vector<std::string> values;
  std::vector<double> probabilities;
};

/// Normalized P(target | evidence).
inline PosteriorVector posterior(const BayesNet& net, const NetEvidence& evidence, std::size_t target,
                                 const std::optional<std::vector<std::size_t>>& order = std::nullopt) {
  Factor f = eliminate(net, evidence, target, order);
  double z = std::accumulate(f.table.begin(), f.table.end(), 0.0);
  if (!(z >= kZeroEvidence)) throw Error(ErrorKind::ImpossibleEvidence, "evidence has probability zero");
  PosteriorVector out{net.nodes[target].object, net.nodes[target].values, {}};
  for (double x : f.table) out.probabilities.push_back(x / z);
  return out;
}

struct InstanceAnswer {
  Substitution bindings;
  PosteriorVector posterior;
};

struct QueryAnswer {
  Atom query;
  Bounds bounds;
  std::vector<InstanceAnswer> instances;
  BayesNet net;
};

/// Full pipeline: static checks, validation, network construction and
/// elimination for each answerable query instance.
inline QueryAnswer answer_query(const KnowledgeBase& kb, const SessionInput& input,
                                const RuleRegistry& registry = RuleRegistry::builtin()) {
  require_static_checks(kb, input.bounds);
  Session session = validate_session(kb, input);
  auto built = build_net(kb, session, registry);
  QueryAnswer out{session.query, session.bounds, {}, std::move(built.net)};
  auto evidence = net_evidence(out.net, session.evidence);
  for (const auto& q : built.answered) {
    auto idx = out.net.index_of(q.object);
    out.instances.push_back({q.bindings, posterior(out.net, evidence, *idx)});
  }
  return out;
}

}  // namespace ctkb
