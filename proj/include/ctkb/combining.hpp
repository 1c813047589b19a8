#pragma once

// Combining rules: merge several cause mechanisms for one consequent object
// into a single conditional distribution.

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctkb/diagnostics.hpp"
#include "ctkb/syntax.hpp"

namespace ctkb {

inline constexpr double kSumTolerance = 1e-9;

/// One rule group: the distribution over VAL(cons) that a coherent set of
/// antecedent atoms induces on its own.
struct CauseMechanism {
  std::vector<GroundAtom> antecedents;
  std::vector<double> distribution;  // aligned with VAL order
};

using RuleParams = std::vector<std::pair<std::string, std::string>>;

struct CombiningRule {
  using Apply = std::function<std::vector<double>(
      const Object& obj, const std::vector<std::string>& values,
      const std::vector<CauseMechanism>& mechanisms, const RuleParams& params)>;

  std::string name;
  RuleParams parameters;  // accepted parameter names with their defaults
  Apply apply;
};

inline bool normalized(const std::vector<double>& dist) {
  double sum = std::accumulate(dist.begin(), dist.end(), 0.0);
  return std::abs(sum - 1.0) <= kSumTolerance &&
         std::all_of(dist.begin(), dist.end(), [](double p) { return p >= 0.0; });
}

/// Generalized noisy-max over `order` (indices into VAL, least active first).
/// Each mechanism independently proposes a value; the child takes the largest
/// proposal, so P(child <= v) = prod_i P_i(<= v).
inline std::vector<double> noisy_max(const std::vector<std::vector<double>>& mechanisms,
                                     const std::vector<std::size_t>& order) {
  if (mechanisms.empty()) throw Error(ErrorKind::Combine, "noisy_max needs at least one mechanism");
  const std::size_t n = order.size();
  for (const auto& m : mechanisms) {
    if (m.size() != n) throw Error(ErrorKind::Combine, "mechanism arity does not match VAL");
    if (!normalized(m)) throw Error(ErrorKind::Combine, "mechanism distribution not normalized");
  }
  std::vector<double> out(n, 0.0);
  std::vector<double> cumulative(mechanisms.size(), 0.0);
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double prod = 1.0;
    for (std::size_t i = 0; i < mechanisms.size(); ++i) {
      cumulative[i] += mechanisms[i][order[k]];
      prod *= k + 1 == n ? 1.0 : std::min(cumulative[i], 1.0);
    }
    out[order[k]] = std::max(prod - prev, 0.0);
    prev = prod;
  }
  return out;
}

/// Declared VAL order with an optional distinguished value moved to the front.
inline std::vector<std::size_t> value_order(const std::vector<std::string>& values,
                                            const std::optional<std::string>& distinguished) {
  std::vector<std::size_t> order;
  std::size_t first = 0;
  if (distinguished) {
    auto it = std::find(values.begin(), values.end(), *distinguished);
    if (it == values.end())
      throw Error(ErrorKind::Combine, "distinguished value '" + *distinguished + "' not in VAL");
    first = static_cast<std::size_t>(it - values.begin());
  }
  order.push_back(first);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (i != first) order.push_back(i);
  return order;
}

inline std::optional<std::string> find_param(const RuleParams& params, const std::string& key) {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  return std::nullopt;
}

inline CombiningRule noisy_max_rule() {
  return {"noisy_max", {{"distinguished", ""}},
          [](const Object&, const std::vector<std::string>& values,
             const std::vector<CauseMechanism>& mechanisms, const RuleParams& params) {
            std::vector<std::vector<double>> dists;
            for (const auto& m : mechanisms) dists.push_back(m.distribution);
            return noisy_max(dists, value_order(values, find_param(params, "distinguished")));
          }};
}

inline CombiningRule single_only_rule() {
  return {"single_only", {},
          [](const Object& obj, const std::vector<std::string>&,
             const std::vector<CauseMechanism>& mechanisms, const RuleParams&) {
            if (mechanisms.size() != 1)
              throw Error(ErrorKind::Combine, "single_only: " + std::to_string(mechanisms.size()) +
                                                  " rule groups for " + to_string(obj));
            return mechanisms.front().distribution;
          }};
}

struct RuleHandle {
  std::size_t index = 0;
  bool operator==(const RuleHandle&) const = default;
};

class RuleRegistry {
 public:
  RuleHandle register_rule(CombiningRule rule) {
    if (find(rule.name)) throw Error(ErrorKind::Combine, "duplicate combining rule '" + rule.name + "'");
    rules_.push_back(std::move(rule));
    return {rules_.size() - 1};
  }

  const CombiningRule* find(const std::string& name) const {
    for (const auto& r : rules_)
      if (r.name == name) return &r;
    return nullptr;
  }

  const CombiningRule& resolve(const std::string& name) const {
    if (const auto* r = find(name)) return *r;
    throw Error(ErrorKind::Combine, "unknown combining rule '" + name + "'");
  }

  const CombiningRule& at(RuleHandle h) const { return rules_.at(h.index); }

  static RuleRegistry with_builtins() {
    RuleRegistry r;
    r.register_rule(noisy_max_rule());
    r.register_rule(single_only_rule());
    return r;
  }

  static const RuleRegistry& builtin() {
    static const RuleRegistry r = with_builtins();
    return r;
  }

 private:
  std::vector<CombiningRule> rules_;
};

/// Applies a rule and checks its output contract. The combined antecedent set
/// is the duplicate-free union of the inputs' antecedents.
inline CauseMechanism apply_rule(const CombiningRule& rule, const Object& obj,
                                 const std::vector<std::string>& values,
                                 const std::vector<CauseMechanism>& mechanisms,
                                 const RuleParams& params) {
  CauseMechanism out;
  std::set<GroundAtom> ante;
  for (const auto& m : mechanisms) ante.insert(m.antecedents.begin(), m.antecedents.end());
  out.antecedents.assign(ante.begin(), ante.end());
  if (!coherent(out.antecedents))
    throw Error(ErrorKind::Combine, "incoherent antecedents combined for " + to_string(obj));
  out.distribution = rule.apply(obj, values, mechanisms, params);
  if (out.distribution.size() != values.size() || !normalized(out.distribution))
    throw Error(ErrorKind::Combine,
                "combining rule '" + rule.name + "' produced an unnormalized row for " + to_string(obj));
  return out;
}

}  // namespace ctkb
