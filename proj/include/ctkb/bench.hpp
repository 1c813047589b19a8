#pragma once

// Network size and timing for a context-indexed KB against an equivalent
// KB that models actions as nodes.

#include <chrono>

#include "ctkb/infer.hpp"

namespace ctkb {

inline constexpr double kEncodingTolerance = 1e-9;

struct EncodingMetrics {
  std::string encoding;
  std::size_t nodes = 0;
  std::size_t cpt_entries = 0;
  double build_ms = 0;
  double infer_ms = 0;
  // CPT entries of the query's predicate, by time point.
  std::map<std::int64_t, std::size_t> step_entries;
  std::vector<InstanceAnswer> answers;
};

inline EncodingMetrics measure_encoding(const std::string& name, const KnowledgeBase& kb,
                                        const SessionInput& input,
                                        const RuleRegistry& registry = RuleRegistry::builtin()) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };
  EncodingMetrics m;
  m.encoding = name;
  auto t0 = clock::now();
  require_static_checks(kb, input.bounds);
  Session session = validate_session(kb, input);
  auto built = build_net(kb, session, registry);
  auto t1 = clock::now();
  auto evidence = net_evidence(built.net, session.evidence);
  for (const auto& q : built.answered)
    m.answers.push_back({q.bindings, posterior(built.net, evidence, *built.net.index_of(q.object))});
  auto t2 = clock::now();
  m.build_ms = ms(t1 - t0);
  m.infer_ms = ms(t2 - t1);
  m.nodes = built.net.nodes.size();
  m.cpt_entries = built.net.cpt_entries();
  for (const auto& n : built.net.nodes) {
    if (n.object.pred != session.query.pred) continue;
    if (auto t = time_of(kb, n.object)) m.step_entries[*t] += n.cpt.size();
  }
  return m;
}

struct EncodingComparison {
  EncodingMetrics context;
  EncodingMetrics action;
  double max_deviation = 0;
};

/// Runs the same query, evidence, bounds and plan against both encodings.
/// The plan is the context of the context-indexed KB and pins the action
/// priors of the other. Throws EncodingMismatch if the answers differ.
inline EncodingComparison compare_encodings(const KnowledgeBase& context_kb, const SessionInput& context_input,
                                            const KnowledgeBase& action_kb, const SessionInput& action_input,
                                            double tolerance = kEncodingTolerance) {
  EncodingComparison out{measure_encoding("context", context_kb, context_input),
                         measure_encoding("action", action_kb, action_input), 0};
  const auto& a = out.context.answers;
  const auto& b = out.action.answers;
  if (a.size() != b.size())
    throw Error(ErrorKind::EncodingMismatch, "encodings answer " + std::to_string(a.size()) + " and " +
                                                 std::to_string(b.size()) + " query instances");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].posterior.query_object != b[i].posterior.query_object)
      throw Error(ErrorKind::EncodingMismatch, "encodings answer different query instances");
    out.max_deviation = std::max(out.max_deviation, [&] {
      double d = 0;
      const auto& p = a[i].posterior.probabilities;
      const auto& q = b[i].posterior.probabilities;
      if (p.size() != q.size()) return std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < p.size(); ++k) d = std::max(d, std::abs(p[k] - q[k]));
      return d;
    }());
  }
  if (out.max_deviation > tolerance)
    throw Error(ErrorKind::EncodingMismatch,
                "encodings disagree by " + format_number(out.max_deviation) + " on the query posterior");
  return out;
}

/// `encoding,nodes,cpt_entries,build_ms,infer_ms` rows with a header.
inline std::string metrics_csv(const std::vector<EncodingMetrics>& rows) {
  std::string out = "encoding,nodes,cpt_entries,build_ms,infer_ms\n";
  char buf[64];
  for (const auto& m : rows) {
    out += m.encoding + ',' + std::to_string(m.nodes) + ',' + std::to_string(m.cpt_entries) + ',';
    std::snprintf(buf, sizeof buf, "%.3f,%.3f\n", m.build_ms, m.infer_ms);
    out += buf;
  }
  return out;
}

}  // namespace ctkb
