#ifndef FORTINET_PORTFOLIO_HPP
#define FORTINET_PORTFOLIO_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "network.hpp"
#include "reliability.hpp"
#include "weights.hpp"

namespace fortinet {

/// Absolute tolerance for every utility and cost comparison.
inline constexpr double tolerance = 1e-9;

struct FortificationAction {
  std::string id;
  std::size_t node = 0;
  double cost = 0.0;
  double p_after = 0.0;
};

enum class LogicalKind { mutex, implies, at_most_k };

inline std::string_view to_string(LogicalKind kind) {
  switch (kind) {
    case LogicalKind::mutex: return "mutex";
    case LogicalKind::implies: return "implies";
    case LogicalKind::at_most_k: return "at_most_k";
  }
  return "?";
}

inline LogicalKind parse_logical_kind(std::string_view s) {
  if (s == "mutex") return LogicalKind::mutex;
  if (s == "implies") return LogicalKind::implies;
  if (s == "at_most_k") return LogicalKind::at_most_k;
  fail("unknown logical constraint kind '" + std::string(s) + "'");
}

/// mutex: at most one of `actions`; implies: actions[0] requires actions[1];
/// at_most_k: at most k of `actions`.
struct LogicalConstraint {
  LogicalKind kind = LogicalKind::mutex;
  std::vector<std::size_t> actions;
  std::size_t k = 0;
};

struct ProblemSpec {
  Network network;
  std::vector<Objective> objectives;
  std::vector<FortificationAction> actions;
  double budget = 0.0;
  std::vector<LogicalConstraint> logical;
  WeightSet weight_set;

  [[nodiscard]] std::size_t action_count() const noexcept { return actions.size(); }

  /// Minimum reliability requirement per objective (0 = none).
  [[nodiscard]] std::vector<double> alpha() const {
    std::vector<double> out;
    for (const auto& obj : objectives) out.push_back(obj.min_reliability);
    return out;
  }

  void validate() const {
    require(budget >= 0.0 && std::isfinite(budget), "budget must be a nonnegative number");
    require(!objectives.empty(), "at least one objective is required");
    require(weight_set.m == objectives.size(), "weight set dimension differs from the objective count");
    for (const auto& obj : objectives) {
      detail::check_objective(network, obj);
      require(obj.a != obj.b, "objective '" + obj.name + "': endpoints must differ");
      require(obj.min_reliability >= 0.0 && obj.min_reliability <= 1.0,
              "objective '" + obj.name + "': min_reliability outside [0,1]");
    }
    for (std::size_t l = 0; l < actions.size(); ++l) {
      const auto& act = actions[l];
      require(act.node < network.size(), "action '" + act.id + "': node out of range");
      require(act.cost >= 0.0 && std::isfinite(act.cost), "action '" + act.id + "': cost must be nonnegative");
      require(act.p_after >= 0.0 && act.p_after <= network.node(act.node).p_fail,
              "action '" + act.id + "': p_after must lie in [0, baseline p_fail of its node]");
      for (std::size_t other = 0; other < l; ++other) {
        require(actions[other].id != act.id, "duplicate action id '" + act.id + "'");
      }
    }
    for (const auto& c : logical) {
      for (auto l : c.actions) require(l < actions.size(), "logical constraint references an unknown action");
      switch (c.kind) {
        case LogicalKind::mutex: require(c.actions.size() >= 2, "mutex needs at least two actions"); break;
        case LogicalKind::implies: require(c.actions.size() == 2, "implies needs exactly two actions"); break;
        case LogicalKind::at_most_k: require(!c.actions.empty(), "at_most_k needs at least one action"); break;
      }
    }
  }
};

/// Binary selection over the actions of a problem, in action order.
class Portfolio {
 public:
  Portfolio() = default;
  explicit Portfolio(std::size_t h) : bits_(h, 0) {}
  explicit Portfolio(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  static Portfolio from_string(std::string_view s) {
    std::vector<std::uint8_t> bits;
    for (char c : s) {
      require(c == '0' || c == '1', "portfolio strings contain only 0 and 1");
      bits.push_back(c == '1');
    }
    return Portfolio(std::move(bits));
  }

  [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
  [[nodiscard]] bool operator[](std::size_t l) const { return bits_[l] != 0; }
  void set(std::size_t l, bool on = true) { bits_.at(l) = on ? 1 : 0; }
  [[nodiscard]] const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  [[nodiscard]] std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

  [[nodiscard]] std::string to_string() const {
    std::string s;
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

  friend bool operator==(const Portfolio&, const Portfolio&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct PortfolioHash {
  std::size_t operator()(const Portfolio& q) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto b : q.bits()) h = (h ^ b) * 1099511628211ULL;
    return static_cast<std::size_t>(h ^ q.size());
  }
};

/// Tie order among equal-cost portfolios: earlier actions first, i.e. the
/// bit string compared in descending order.
inline bool bits_before(const Portfolio& x, const Portfolio& y) { return x.bits() > y.bits(); }

inline double portfolio_cost(const Portfolio& q, const ProblemSpec& spec) {
  require(q.size() == spec.actions.size(), "portfolio length differs from the action count");
  double cost = 0.0;
  for (std::size_t l = 0; l < q.size(); ++l) {
    if (q[l]) cost += spec.actions[l].cost;
  }
  return cost;
}

namespace detail {

inline bool logical_ok(const Portfolio& q, const ProblemSpec& spec) {
  for (const auto& c : spec.logical) {
    std::size_t on = 0;
    for (auto l : c.actions) on += q[l] ? 1 : 0;
    switch (c.kind) {
      case LogicalKind::mutex:
        if (on > 1) return false;
        break;
      case LogicalKind::implies:
        if (q[c.actions[0]] && !q[c.actions[1]]) return false;
        break;
      case LogicalKind::at_most_k:
        if (on > c.k) return false;
        break;
    }
  }
  return true;
}

// At most one selected action per node.
inline bool one_action_per_node(const Portfolio& q, const ProblemSpec& spec) {
  std::vector<std::uint8_t> used(spec.network.size(), 0);
  for (std::size_t l = 0; l < q.size(); ++l) {
    if (!q[l]) continue;
    auto& u = used[spec.actions[l].node];
    if (u) return false;
    u = 1;
  }
  return true;
}

}  // namespace detail

/// Within budget, logical constraints hold, and no node carries two
/// selected actions.
inline bool is_feasible(const Portfolio& q, const ProblemSpec& spec) {
  if (portfolio_cost(q, spec) > spec.budget + tolerance) return false;
  return detail::logical_ok(q, spec) && detail::one_action_per_node(q, spec);
}

/// True iff some feasible portfolio agrees with `q` on actions [0, decided)
/// and on every selected action. All constraints except `implies` only get
/// harder as actions are added, so the cheapest candidate is `q` plus the
/// undecided actions its implications force.
inline bool is_extendable(const Portfolio& q, const ProblemSpec& spec, std::size_t decided) {
  Portfolio closure = q;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : spec.logical) {
      if (c.kind != LogicalKind::implies) continue;
      auto from = c.actions[0];
      auto to = c.actions[1];
      if (!closure[from] || closure[to]) continue;
      if (to < decided) return false;
      closure.set(to);
      changed = true;
    }
  }
  return is_feasible(closure, spec);
}

/// Node disruption probabilities once the portfolio is implemented.
inline ProbabilityVector effective_probabilities(const Portfolio& q, const ProblemSpec& spec) {
  require(q.size() == spec.actions.size(), "portfolio length differs from the action count");
  auto p = spec.network.baseline();
  for (std::size_t l = 0; l < q.size(); ++l) {
    if (!q[l]) continue;
    const auto& act = spec.actions[l];
    p[act.node] = std::min(p[act.node], act.p_after);
  }
  return p;
}

/// Visits every feasible portfolio; partial selections are abandoned as soon
/// as budget, node, mutex or at_most_k limits are exceeded.
template <typename Visit>
void for_each_feasible(const ProblemSpec& spec, Visit&& visit) {
  const auto h = spec.actions.size();
  Portfolio q(h);
  std::vector<std::uint8_t> node_used(spec.network.size(), 0);
  std::vector<std::size_t> counts(spec.logical.size(), 0);
  std::vector<std::vector<std::size_t>> member_of(h);
  for (std::size_t c = 0; c < spec.logical.size(); ++c) {
    if (spec.logical[c].kind == LogicalKind::implies) continue;
    for (auto l : spec.logical[c].actions) member_of[l].push_back(c);
  }
  bool has_implies = std::any_of(spec.logical.begin(), spec.logical.end(),
                                 [](const LogicalConstraint& c) { return c.kind == LogicalKind::implies; });

  auto limit = [&](std::size_t c) {
    return spec.logical[c].kind == LogicalKind::mutex ? std::size_t{1} : spec.logical[c].k;
  };

  std::function<void(std::size_t, double)> recurse = [&](std::size_t l, double cost) {
    if (l == h) {
      if (!has_implies || detail::logical_ok(q, spec)) visit(static_cast<const Portfolio&>(q));
      return;
    }
    const auto& act = spec.actions[l];
    bool can_add = cost + act.cost <= spec.budget + tolerance && !node_used[act.node];
    for (auto c : member_of[l]) can_add = can_add && counts[c] < limit(c);
    if (can_add) {
      q.set(l, true);
      node_used[act.node] = 1;
      for (auto c : member_of[l]) ++counts[c];
      recurse(l + 1, cost + act.cost);
      for (auto c : member_of[l]) --counts[c];
      node_used[act.node] = 0;
      q.set(l, false);
    }
    recurse(l + 1, cost);
  };
  recurse(0, 0.0);
}

inline std::uint64_t count_feasible_portfolios(const ProblemSpec& spec) {
  std::uint64_t n = 0;
  for_each_feasible(spec, [&](const Portfolio&) { ++n; });
  return n;
}

struct EvaluatedPortfolio {
  Portfolio portfolio;
  double cost = 0.0;
  std::vector<double> reliabilities;
  std::vector<double> utilities;  // one per point of the evaluation basis
};

inline std::vector<double> utilities_at(const ExtremePointSet& basis, const std::vector<double>& reliabilities) {
  std::vector<double> out;
  out.reserve(basis.size());
  for (const auto& w : basis.points) {
    require(w.size() == reliabilities.size(), "weight vector length differs from the objective count");
    double u = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) u += w[j] * reliabilities[j];
    out.push_back(u);
  }
  return out;
}

/// Evaluates portfolios of one problem against a fixed extreme-point basis.
/// Expected utility at w is sum_j w_j R_j, with R_j from the reliability
/// engine, whose cut-set cache is shared by all evaluations.
class PortfolioEvaluator {
 public:
  PortfolioEvaluator(const ProblemSpec& spec, ExtremePointSet basis, ReliabilityOptions options = {})
      : spec_(&spec), basis_(std::move(basis)), engine_(spec.network, spec.objectives, options) {
    spec.validate();
    require(basis_.size() > 0, "evaluation basis is empty");
    require(basis_.criteria() == spec.objectives.size(), "basis dimension differs from the objective count");
  }

  [[nodiscard]] const ProblemSpec& spec() const noexcept { return *spec_; }
  [[nodiscard]] const ExtremePointSet& basis() const noexcept { return basis_; }
  [[nodiscard]] const ReliabilityEngine& engine() const noexcept { return engine_; }

  /// Requires a feasible portfolio unless `force` is set.
  [[nodiscard]] EvaluatedPortfolio evaluate(const Portfolio& q, bool force = false) const {
    require(q.size() == spec_->actions.size(), "portfolio length differs from the action count");
    require(force || is_feasible(q, *spec_), "portfolio " + q.to_string() + " is not feasible");
    EvaluatedPortfolio out;
    out.portfolio = q;
    out.cost = portfolio_cost(q, *spec_);
    out.reliabilities = engine_.reliabilities(effective_probabilities(q, *spec_));
    out.utilities = utilities_at(basis_, out.reliabilities);
    return out;
  }

 private:
  const ProblemSpec* spec_;
  ExtremePointSet basis_;
  ReliabilityEngine engine_;
};

inline EvaluatedPortfolio evaluate(const Portfolio& q, const ProblemSpec& spec, const ExtremePointSet& basis,
                                   Method method = Method::automatic) {
  ReliabilityOptions options;
  options.method = method;
  return PortfolioEvaluator(spec, basis, options).evaluate(q);
}

namespace detail {

inline void check_basis(const EvaluatedPortfolio& x, const EvaluatedPortfolio& y) {
  require(x.utilities.size() == y.utilities.size(), "portfolios were evaluated on different bases");
}

}  // namespace detail

/// q2 is at least as good as q1 at every extreme point and better at one.
inline bool dominates(const EvaluatedPortfolio& q2, const EvaluatedPortfolio& q1, double tau = tolerance) {
  detail::check_basis(q2, q1);
  bool strict = false;
  for (std::size_t e = 0; e < q2.utilities.size(); ++e) {
    if (q2.utilities[e] < q1.utilities[e] - tau) return false;
    if (q2.utilities[e] > q1.utilities[e] + tau) strict = true;
  }
  return strict;
}

inline bool utility_equivalent(const EvaluatedPortfolio& q1, const EvaluatedPortfolio& q2, double tau = tolerance) {
  detail::check_basis(q1, q2);
  for (std::size_t e = 0; e < q1.utilities.size(); ++e) {
    if (std::abs(q1.utilities[e] - q2.utilities[e]) > tau) return false;
  }
  return true;
}

/// q1 beats q2: it dominates at no higher cost, or matches its utility at a
/// strictly lower cost.
inline bool cost_efficient_wrt(const EvaluatedPortfolio& q1, const EvaluatedPortfolio& q2, double tau = tolerance) {
  if (dominates(q1, q2, tau) && q1.cost <= q2.cost + tau) return true;
  return utility_equivalent(q1, q2, tau) && q1.cost < q2.cost - tau;
}

/// Frontier order: cost ascending, then earlier actions first.
inline bool frontier_order(const EvaluatedPortfolio& x, const EvaluatedPortfolio& y) {
  if (std::abs(x.cost - y.cost) > tolerance) return x.cost < y.cost;
  return bits_before(x.portfolio, y.portfolio);
}

}  // namespace fortinet

#endif
