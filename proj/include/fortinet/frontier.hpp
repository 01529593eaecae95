#ifndef FORTINET_FRONTIER_HPP
#define FORTINET_FRONTIER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "portfolio.hpp"
#include "weights.hpp"

namespace fortinet {

/// How a discarded portfolio's best possible extension is bounded.
enum class BoundMode {
  extended,    // utility of q with every remaining action added (cheap, may be loose)
  completion,  // best feasible completion per extreme point (tight, costlier)
};

inline BoundMode parse_bound_mode(std::string_view s) {
  if (s == "qa") return BoundMode::extended;
  if (s == "b1") return BoundMode::completion;
  fail("unknown bound mode '" + std::string(s) + "' (expected qa or b1)");
}

struct FrontierOptions {
  BoundMode bound = BoundMode::extended;
  /// Process actions by descending single-action gain at the basis barycenter.
  bool reorder_actions = true;
  ReliabilityOptions reliability;
  std::size_t workers = 1;
  /// Largest action count the brute-force enumeration accepts.
  std::size_t brute_force_cap = 20;
};

/// Cost-efficient portfolios, sorted by cost then earlier actions first.
struct Frontier {
  std::vector<EvaluatedPortfolio> entries;
  ExtremePointSet basis;
  std::uint64_t spec_digest = 0;

  [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
};

struct ExtensionBound {
  Portfolio portfolio;
  std::vector<double> per_extreme_bounds;
  bool tight = false;
};

/// FNV-1a fingerprint of a problem's defining data.
inline std::uint64_t spec_digest(const ProblemSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    h = (h ^ 0xffU) * 1099511628211ULL;
  };
  auto num = [&](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    mix(buf);
  };
  for (const auto& node : spec.network.nodes()) {
    mix(node.id);
    num(node.p_fail);
    num(node.fallible.has_value() ? (*node.fallible ? 1 : 0) : -1);
  }
  for (const auto& [a, b] : spec.network.edges()) {
    num(static_cast<double>(a));
    num(static_cast<double>(b));
  }
  for (auto b : spec.network.border()) num(static_cast<double>(b));
  for (const auto& obj : spec.objectives) {
    mix(obj.name);
    num(static_cast<double>(obj.a));
    num(static_cast<double>(obj.b));
    num(obj.min_reliability);
  }
  for (const auto& act : spec.actions) {
    mix(act.id);
    num(static_cast<double>(act.node));
    num(act.cost);
    num(act.p_after);
  }
  num(spec.budget);
  for (const auto& c : spec.logical) {
    mix(to_string(c.kind));
    for (auto l : c.actions) num(static_cast<double>(l));
    num(static_cast<double>(c.k));
  }
  for (const auto& row : spec.weight_set.constraints) {
    for (double c : row.coefficients) num(c);
    num(row.bound);
  }
  return h;
}

/// q with actions [0, decided) unchanged and every later action selected.
inline Portfolio extended_portfolio(const Portfolio& q, std::size_t decided) {
  require(decided <= q.size(), "extended_portfolio: index out of range");
  Portfolio out = q;
  for (std::size_t y = decided; y < q.size(); ++y) out.set(y);
  return out;
}

namespace detail {

/// Depth-first search over the free actions of q (indices >= decided that q
/// leaves off), tracking the best feasible completion per basis point. A
/// branch is cut once adding all its remaining free actions cannot beat the
/// incumbent at any point.
class CompletionSearch {
 public:
  CompletionSearch(const PortfolioEvaluator& eval, const Portfolio& q, std::size_t decided)
      : eval_(eval), spec_(eval.spec()), current_(q) {
    for (std::size_t l = decided; l < q.size(); ++l) {
      if (!q[l]) free_.push_back(l);
    }
    const auto k = eval.basis().size();
    best_.assign(k, -std::numeric_limits<double>::infinity());
    argbest_.resize(k);
  }

  void run() { descend(0); }

  [[nodiscard]] const std::vector<double>& best() const noexcept { return best_; }
  [[nodiscard]] const std::vector<Portfolio>& argbest() const noexcept { return argbest_; }
  [[nodiscard]] bool found() const noexcept { return found_; }

  const EvaluatedPortfolio& evaluated(const Portfolio& q) {
    auto it = memo_.find(q);
    if (it == memo_.end()) it = memo_.emplace(q, eval_.evaluate(q, true)).first;
    return it->second;
  }

 private:
  void descend(std::size_t t) {
    const std::size_t next = t < free_.size() ? free_[t] : spec_.actions.size();
    if (!is_extendable(current_, spec_, next)) return;

    if (is_feasible(current_, spec_)) {
      const auto& here = evaluated(current_);
      for (std::size_t e = 0; e < best_.size(); ++e) {
        if (here.utilities[e] > best_[e]) {
          best_[e] = here.utilities[e];
          argbest_[e] = current_;
        }
      }
      found_ = true;
    }
    if (t == free_.size()) return;

    Portfolio optimistic = current_;
    for (std::size_t s = t; s < free_.size(); ++s) optimistic.set(free_[s]);
    const auto& ub = evaluated(optimistic).utilities;
    bool promising = false;
    for (std::size_t e = 0; e < best_.size(); ++e) promising = promising || ub[e] > best_[e];
    if (!promising) return;

    const auto l = free_[t];
    current_.set(l, true);
    descend(t + 1);
    current_.set(l, false);
    descend(t + 1);
  }

  const PortfolioEvaluator& eval_;
  const ProblemSpec& spec_;
  Portfolio current_;
  std::vector<std::size_t> free_;
  std::vector<double> best_;
  std::vector<Portfolio> argbest_;
  bool found_ = false;
  std::unordered_map<Portfolio, EvaluatedPortfolio, PortfolioHash> memo_;
};

}  // namespace detail

/// Per basis point, the best utility over feasible portfolios that keep q's
/// selected actions, keep actions [0, decided) that q leaves off excluded, and
/// may add any later action.
inline ExtensionBound extension_upper_bound(const Portfolio& q, const PortfolioEvaluator& eval, std::size_t decided) {
  require(q.size() == eval.spec().actions.size(), "portfolio length differs from the action count");
  require(decided <= q.size(), "extension_upper_bound: decided index out of range");
  detail::CompletionSearch search(eval, q, decided);
  search.run();
  ExtensionBound out{q, {}, false};
  if (!search.found()) {
    out.per_extreme_bounds = search.evaluated(q).utilities;
    return out;
  }
  out.per_extreme_bounds = search.best();
  // Tight iff one of the maximizers attains every bound at once.
  for (const auto& candidate : search.argbest()) {
    const auto& u = search.evaluated(candidate).utilities;
    bool all = true;
    for (std::size_t e = 0; e < u.size(); ++e) all = all && u[e] >= out.per_extreme_bounds[e] - tolerance;
    if (all) {
      out.tight = true;
      break;
    }
  }
  return out;
}

inline ExtensionBound extension_upper_bound(const Portfolio& q, const ProblemSpec& spec,
                                            const ExtremePointSet& basis, std::size_t decided = 0,
                                            ReliabilityOptions options = {}) {
  PortfolioEvaluator eval(spec, basis, options);
  return extension_upper_bound(q, eval, decided);
}

namespace detail {

inline ProblemSpec permute_actions(const ProblemSpec& spec, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> position(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
  ProblemSpec out = spec;
  for (std::size_t i = 0; i < order.size(); ++i) out.actions[i] = spec.actions[order[i]];
  for (auto& c : out.logical) {
    for (auto& l : c.actions) l = position[l];
  }
  return out;
}

inline Portfolio unpermute(const Portfolio& q, const std::vector<std::size_t>& order) {
  Portfolio out(q.size());
  for (std::size_t i = 0; i < order.size(); ++i) out.set(order[i], q[i]);
  return out;
}

/// Descending gain of each single action at the barycenter of the basis;
/// ties keep the input order.
inline std::vector<std::size_t> action_order(const PortfolioEvaluator& eval, std::size_t workers) {
  const auto h = eval.spec().actions.size();
  std::vector<std::size_t> order(h);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (h == 0) return order;
  auto mean = [](const std::vector<double>& u) { return std::accumulate(u.begin(), u.end(), 0.0) / u.size(); };
  const double base = mean(eval.evaluate(Portfolio(h), true).utilities);
  std::vector<double> gain(h);
  parallel_for(h, workers, [&](std::size_t l) {
    Portfolio single(h);
    single.set(l);
    gain[l] = mean(eval.evaluate(single, true).utilities) - base;
  });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return gain[x] > gain[y]; });
  return order;
}

/// Every completion of q (cost >= cost(q), utility <= bound) is beaten by q1.
inline bool prunes(const EvaluatedPortfolio& q1, double cost, const std::vector<double>& bound) {
  if (q1.cost > cost + tolerance) return false;
  bool strict = q1.cost < cost - tolerance;
  for (std::size_t e = 0; e < bound.size(); ++e) {
    if (q1.utilities[e] < bound[e] - tolerance) return false;
    if (q1.utilities[e] > bound[e] + tolerance) strict = true;
  }
  return strict;
}

class FrontierSearch {
 public:
  FrontierSearch(const ProblemSpec& spec, const ExtremePointSet& basis, const FrontierOptions& options)
      : spec_(spec), eval_(spec_, basis, options.reliability), options_(options) {}

  /// Returns frontier entries in the (possibly permuted) action order of spec_.
  std::vector<EvaluatedPortfolio> run() {
    const auto h = spec_.actions.size();
    std::vector<EvaluatedPortfolio> previous{evaluate_batch({Portfolio(h)}).front()};
    std::vector<Basic> basic;

    for (std::size_t l = 0; l < h; ++l) {
      const std::size_t decided = l + 1;

      // Step 5: add action l to every frontier and basic portfolio.
      std::vector<Portfolio> to_evaluate;
      std::vector<Basic> incomplete;
      std::unordered_set<Portfolio, PortfolioHash> generated;
      auto offer = [&](Portfolio q) {
        q.set(l);
        if (!is_extendable(q, spec_, decided) || !generated.insert(q).second) return;
        if (is_feasible(q, spec_)) {
          to_evaluate.push_back(std::move(q));
        } else {
          double cost = portfolio_cost(q, spec_);
          incomplete.push_back({std::move(q), cost});
        }
      };
      for (const auto& e : previous) offer(e.portfolio);
      for (const auto& b : basic) offer(b.portfolio);
      auto fresh = evaluate_batch(to_evaluate);

      // Step 6-7: drop new portfolios beaten by new or previous ones.
      std::vector<EvaluatedPortfolio> kept;
      std::vector<Basic> discarded;
      std::vector<std::uint8_t> beaten_new(fresh.size(), 0);
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        bool beaten = false;
        for (std::size_t k = 0; k < fresh.size() && !beaten; ++k) {
          beaten = k != i && cost_efficient_wrt(fresh[k], fresh[i]);
        }
        for (std::size_t k = 0; k < previous.size() && !beaten; ++k) {
          beaten = cost_efficient_wrt(previous[k], fresh[i]);
        }
        beaten_new[i] = beaten ? 1 : 0;
      }
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        if (beaten_new[i]) {
          discarded.push_back({fresh[i].portfolio, fresh[i].cost});
        } else {
          kept.push_back(std::move(fresh[i]));
        }
      }

      // Steps 8-10: drop previous portfolios beaten by surviving new ones, merge.
      const auto n_new = kept.size();
      for (auto& old : previous) {
        bool beaten = false;
        for (std::size_t k = 0; k < n_new && !beaten; ++k) beaten = cost_efficient_wrt(kept[k], old);
        if (beaten) {
          discarded.push_back({old.portfolio, old.cost});
        } else {
          kept.push_back(std::move(old));
        }
      }

      // Step 11: keep discarded portfolios whose extensions might still be
      // cost-efficient.
      std::vector<Basic> candidates = std::move(basic);
      candidates.insert(candidates.end(), discarded.begin(), discarded.end());
      candidates.insert(candidates.end(), incomplete.begin(), incomplete.end());
      basic = retain_basic(std::move(candidates), kept, decided);
      previous = std::move(kept);
      peak_basic_ = std::max(peak_basic_, basic.size());
    }
    return previous;
  }

  [[nodiscard]] const PortfolioEvaluator& evaluator() const noexcept { return eval_; }
  [[nodiscard]] std::size_t evaluations() const noexcept { return memo_.size(); }
  [[nodiscard]] std::size_t peak_basic() const noexcept { return peak_basic_; }

 private:
  // Discarded portfolio kept because an extension of it may still be
  // cost-efficient.
  struct Basic {
    Portfolio portfolio;
    double cost = 0.0;
  };

  std::vector<EvaluatedPortfolio> evaluate_batch(const std::vector<Portfolio>& qs) {
    std::vector<const Portfolio*> missing;
    for (const auto& q : qs) {
      if (!memo_.contains(q)) missing.push_back(&q);
    }
    std::vector<EvaluatedPortfolio> computed(missing.size());
    parallel_for(missing.size(), options_.workers,
                 [&](std::size_t i) { computed[i] = eval_.evaluate(*missing[i], true); });
    for (std::size_t i = 0; i < missing.size(); ++i) memo_.emplace(*missing[i], std::move(computed[i]));
    std::vector<EvaluatedPortfolio> out;
    out.reserve(qs.size());
    for (const auto& q : qs) out.push_back(memo_.at(q));
    return out;
  }

  std::vector<Basic> retain_basic(std::vector<Basic> candidates, const std::vector<EvaluatedPortfolio>& frontier,
                                  std::size_t decided) {
    if (decided == spec_.actions.size()) return {};
    std::vector<std::vector<double>> bounds(candidates.size());
    if (options_.bound == BoundMode::extended) {
      std::vector<Portfolio> extended;
      extended.reserve(candidates.size());
      for (const auto& c : candidates) extended.push_back(extended_portfolio(c.portfolio, decided));
      auto evaluated = evaluate_batch(extended);
      for (std::size_t i = 0; i < candidates.size(); ++i) bounds[i] = std::move(evaluated[i].utilities);
    } else {
      parallel_for(candidates.size(), options_.workers, [&](std::size_t i) {
        bounds[i] = extension_upper_bound(candidates[i].portfolio, eval_, decided).per_extreme_bounds;
      });
    }
    std::vector<Basic> out;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      bool pruned = std::any_of(frontier.begin(), frontier.end(), [&](const EvaluatedPortfolio& q1) {
        return prunes(q1, candidates[i].cost, bounds[i]);
      });
      if (!pruned) out.push_back(std::move(candidates[i]));
    }
    return out;
  }

  const ProblemSpec& spec_;
  PortfolioEvaluator eval_;
  FrontierOptions options_;
  std::unordered_map<Portfolio, EvaluatedPortfolio, PortfolioHash> memo_;
  std::size_t peak_basic_ = 0;
};

inline void sort_entries(std::vector<EvaluatedPortfolio>& entries) {
  std::sort(entries.begin(), entries.end(), frontier_order);
}

}  // namespace detail

/// Cost-efficient portfolios over the basis, built one action at a time from
/// the empty portfolio while carrying forward discarded portfolios whose
/// extensions could still be cost-efficient.
inline Frontier algorithm1(const ProblemSpec& spec, const ExtremePointSet& basis, const FrontierOptions& options = {}) {
  spec.validate();
  const auto h = spec.actions.size();
  std::vector<std::size_t> order(h);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.reorder_actions && h > 1) {
    PortfolioEvaluator probe(spec, basis, options.reliability);
    order = detail::action_order(probe, options.workers);
  }
  const ProblemSpec permuted = detail::permute_actions(spec, order);
  detail::FrontierSearch search(permuted, basis, options);
  auto entries = search.run();
  for (auto& e : entries) e.portfolio = detail::unpermute(e.portfolio, order);
  detail::sort_entries(entries);
  return Frontier{std::move(entries), basis, spec_digest(spec)};
}

/// Frontier by full enumeration of the feasible portfolios.
inline Frontier brute_force_frontier(const ProblemSpec& spec, const ExtremePointSet& basis,
                                     const FrontierOptions& options = {}) {
  spec.validate();
  if (spec.actions.size() > options.brute_force_cap) {
    throw Error(ErrorKind::cap_exceeded, "brute-force frontier over " + std::to_string(spec.actions.size()) +
                                             " actions exceeds the cap of " +
                                             std::to_string(options.brute_force_cap));
  }
  std::vector<Portfolio> feasible;
  for_each_feasible(spec, [&](const Portfolio& q) { feasible.push_back(q); });
  PortfolioEvaluator eval(spec, basis, options.reliability);
  std::vector<EvaluatedPortfolio> all(feasible.size());
  parallel_for(feasible.size(), options.workers, [&](std::size_t i) { all[i] = eval.evaluate(feasible[i]); });

  std::vector<EvaluatedPortfolio> entries;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool beaten = false;
    for (std::size_t k = 0; k < all.size() && !beaten; ++k) beaten = k != i && cost_efficient_wrt(all[k], all[i]);
    if (!beaten) entries.push_back(all[i]);
  }
  detail::sort_entries(entries);
  return Frontier{std::move(entries), basis, spec_digest(spec)};
}

/// Cost-efficient portfolios meeting every minimum reliability requirement:
/// the search runs on the basis augmented with e_j for each requirement, the
/// result is filtered by R_j >= alpha_j, and portfolios beaten within the
/// filtered set on the original basis are removed.
inline Frontier algorithm2(const ProblemSpec& spec, const ExtremePointSet& basis, const FrontierOptions& options = {}) {
  const auto alpha = spec.alpha();
  const auto augmented = augment_with_requirements(basis, alpha);
  auto wide = algorithm1(spec, augmented, options);

  std::vector<EvaluatedPortfolio> meeting;
  for (auto& e : wide.entries) {
    bool ok = true;
    for (std::size_t j = 0; j < alpha.size(); ++j) ok = ok && e.reliabilities[j] >= alpha[j] - tolerance;
    if (!ok) continue;
    e.utilities = utilities_at(basis, e.reliabilities);
    meeting.push_back(std::move(e));
  }
  std::vector<EvaluatedPortfolio> entries;
  for (std::size_t i = 0; i < meeting.size(); ++i) {
    bool beaten = false;
    for (std::size_t k = 0; k < meeting.size() && !beaten; ++k) {
      beaten = k != i && cost_efficient_wrt(meeting[k], meeting[i]);
    }
    if (!beaten) entries.push_back(meeting[i]);
  }
  detail::sort_entries(entries);
  return Frontier{std::move(entries), basis, wide.spec_digest};
}

/// algorithm2 when any requirement is set, algorithm1 otherwise.
inline Frontier compute_frontier(const ProblemSpec& spec, const ExtremePointSet& basis,
                                 const FrontierOptions& options = {}, bool use_requirements = true) {
  const auto alpha = spec.alpha();
  bool any = std::any_of(alpha.begin(), alpha.end(), [](double a) { return a != 0.0; });
  return use_requirements && any ? algorithm2(spec, basis, options) : algorithm1(spec, basis, options);
}

/// Feasible portfolio maximizing sum_j w_j R_j. Branch and bound over the
/// actions; a branch is cut when adding all its remaining actions cannot
/// reach the incumbent. Ties go to the lower cost, then earlier actions.
inline EvaluatedPortfolio solve_exact_weights(const ProblemSpec& spec, const WeightVector& w,
                                              ReliabilityOptions options = {}) {
  require(w.size() == spec.objectives.size(), "weight vector length differs from the objective count");
  double sum = 0.0;
  for (double wi : w) {
    require(wi >= -weight_tolerance, "weights must be nonnegative");
    sum += wi;
  }
  require(std::abs(sum - 1.0) <= weight_tolerance, "weights must sum to 1");

  PortfolioEvaluator eval(spec, ExtremePointSet{{w}}, options);
  const auto h = spec.actions.size();
  std::unordered_map<Portfolio, EvaluatedPortfolio, PortfolioHash> memo;
  auto evaluated = [&](const Portfolio& q) -> const EvaluatedPortfolio& {
    auto it = memo.find(q);
    if (it == memo.end()) it = memo.emplace(q, eval.evaluate(q, true)).first;
    return it->second;
  };

  EvaluatedPortfolio best = evaluated(Portfolio(h));
  auto better = [&](const EvaluatedPortfolio& c) {
    const double u = c.utilities[0];
    const double b = best.utilities[0];
    if (u > b + tolerance) return true;
    if (u < b - tolerance) return false;
    if (c.cost < best.cost - tolerance) return true;
    if (c.cost > best.cost + tolerance) return false;
    return bits_before(c.portfolio, best.portfolio);
  };

  Portfolio current(h);
  auto descend = [&](auto&& self, std::size_t l) -> void {
    if (!is_extendable(current, spec, l)) return;
    if (is_feasible(current, spec)) {
      const auto& here = evaluated(current);
      if (better(here)) best = here;
    }
    if (l == h) return;
    const auto& ub = evaluated(extended_portfolio(current, l));
    if (ub.utilities[0] < best.utilities[0] - tolerance) return;
    current.set(l, true);
    self(self, l + 1);
    current.set(l, false);
    self(self, l + 1);
  };
  descend(descend, 0);
  return best;
}

}  // namespace fortinet

#endif
