#ifndef FORTINET_ANALYTICS_HPP
#define FORTINET_ANALYTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "frontier.hpp"
#include "network.hpp"
#include "parallel.hpp"

namespace fortinet {

/// Which frontier entries count as "non-dominated at cost c".
enum class CostLevel {
  exact,     // cost == c
  up_to,     // cost <= c
};

inline std::vector<double> cost_levels(const Frontier& frontier) {
  std::vector<double> levels;
  for (const auto& e : frontier.entries) {
    if (levels.empty() || std::abs(levels.back() - e.cost) > tolerance) levels.push_back(e.cost);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double x, double y) { return std::abs(x - y) <= tolerance; }),
               levels.end());
  return levels;
}

inline bool at_level(double cost, double c, CostLevel mode) {
  return mode == CostLevel::exact ? std::abs(cost - c) <= tolerance : cost <= c + tolerance;
}

/// Share of the frontier portfolios at cost level c that contain action l.
inline double core_index(const Frontier& frontier, std::size_t l, double c, CostLevel mode = CostLevel::exact) {
  std::size_t level = 0;
  std::size_t with = 0;
  for (const auto& e : frontier.entries) {
    if (!at_level(e.cost, c, mode)) continue;
    require(l < e.portfolio.size(), "core_index: action index out of range");
    ++level;
    if (e.portfolio[l]) ++with;
  }
  if (level == 0) fail("core_index: no frontier portfolio at cost level " + std::to_string(c));
  return static_cast<double>(with) / static_cast<double>(level);
}

struct CoreIndexRow {
  std::size_t action = 0;
  double cost = 0.0;
  double value = 0.0;
};

struct CoreIndexTable {
  std::vector<double> cost_levels;
  std::vector<CoreIndexRow> rows;  // cost level major, then action order
};

inline CoreIndexTable core_index_table(const Frontier& frontier, CostLevel mode = CostLevel::exact) {
  CoreIndexTable table{cost_levels(frontier), {}};
  const auto h = frontier.entries.empty() ? 0 : frontier.entries.front().portfolio.size();
  for (double c : table.cost_levels) {
    for (std::size_t l = 0; l < h; ++l) table.rows.push_back({l, c, core_index(frontier, l, c, mode)});
  }
  return table;
}

struct CentralityReport {
  std::vector<double> degree;
  std::vector<double> closeness;
  std::vector<double> betweenness;
  bool connected = true;
  std::vector<std::string> warnings;
  std::optional<double> spearman_degree;
  std::optional<double> spearman_closeness;
  std::optional<double> spearman_betweenness;
};

/// Average ranks (1-based), ties sharing the mean of their positions.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation (Pearson correlation of average ranks). NaN if
/// either input is constant.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "spearman: length mismatch");
  require(x.size() >= 2, "spearman: need at least two values");
  auto rx = ranks(x);
  auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

/// Unweighted degree, closeness ((r-1)/sum of distances within the node's
/// component of size r) and betweenness (Brandes, endpoints excluded, each
/// unordered pair counted once) for every node.
inline CentralityReport centrality(const Network& net, const std::vector<double>* importance = nullptr) {
  const auto n = net.size();
  CentralityReport report;
  report.degree.resize(n);
  report.closeness.assign(n, 0.0);
  report.betweenness.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) report.degree[v] = static_cast<double>(net.neighbors(v).size());

  std::vector<long> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::vector<std::size_t>> preds(n);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      auto u = order[head];
      for (auto v : net.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          order.push_back(v);
        }
        if (dist[v] == dist[u] + 1) {
          sigma[v] += sigma[u];
          preds[v].push_back(u);
        }
      }
    }
    long total = 0;
    for (auto v : order) total += dist[v];
    if (order.size() < n) report.connected = false;
    if (total > 0) report.closeness[s] = static_cast<double>(order.size() - 1) / static_cast<double>(total);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) report.betweenness[w] += delta[w];
    }
  }
  for (auto& b : report.betweenness) b /= 2.0;
  if (!report.connected) report.warnings.push_back("graph is disconnected; closeness computed per component");

  if (importance != nullptr) {
    require(importance->size() == n, "importance vector length does not match node count");
    report.spearman_degree = spearman(report.degree, *importance);
    report.spearman_closeness = spearman(report.closeness, *importance);
    report.spearman_betweenness = spearman(report.betweenness, *importance);
  }
  return report;
}

/// FNV-1a hash of the sorted portfolio bit strings, as 16 hex digits.
inline std::string frontier_fingerprint(const Frontier& frontier) {
  std::vector<std::string> bits;
  for (const auto& e : frontier.entries) bits.push_back(e.portfolio.to_string());
  std::sort(bits.begin(), bits.end());
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& s : bits) {
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    h = (h ^ ',') * 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SensitivityCell {
  double p = 0.0;
  double divisor = 0.0;  // infinity = perfect fortification
  double p_after = 0.0;
  std::size_t frontier_size = 0;
  std::string fingerprint;
};

struct SensitivityReport {
  std::vector<SensitivityCell> cells;  // p major, divisor minor
  bool composition_invariant = true;
};

/// The problem with every fallible node at baseline p and every action
/// lowering its node to p / divisor (0 for an infinite divisor).
inline ProblemSpec with_uniform_probabilities(const ProblemSpec& spec, double p, double divisor) {
  require(p >= 0.0 && p <= 1.0, "sensitivity: baseline probability outside [0,1]");
  require(divisor >= 1.0, "sensitivity: divisor must be at least 1");
  ProbabilityVector base(spec.network.size(), 0.0);
  for (auto k : spec.network.fallible()) base[k] = p;
  ProblemSpec out{with_probabilities(spec.network, base), spec.objectives, spec.actions, spec.budget, spec.logical,
                  spec.weight_set};
  const double after = std::isinf(divisor) ? 0.0 : p / divisor;
  for (auto& act : out.actions) act.p_after = std::min(after, base[act.node]);
  return out;
}

/// Recomputes the frontier for every (p, divisor) cell and reports whether
/// all cells select the same set of portfolios.
inline SensitivityReport sensitivity_sweep(const ProblemSpec& spec, const ExtremePointSet& basis,
                                           const std::vector<double>& p_grid,
                                           const std::vector<double>& divisor_grid,
                                           const FrontierOptions& options = {}, bool use_requirements = true) {
  SensitivityReport report;
  for (double p : p_grid) {
    for (double d : divisor_grid) report.cells.push_back({p, d, std::isinf(d) ? 0.0 : p / d, 0, {}});
  }
  FrontierOptions inner = options;
  inner.workers = 1;
  parallel_for(report.cells.size(), options.workers, [&](std::size_t i) {
    auto& cell = report.cells[i];
    auto cell_spec = with_uniform_probabilities(spec, cell.p, cell.divisor);
    auto frontier = compute_frontier(cell_spec, basis, inner, use_requirements);
    cell.frontier_size = frontier.size();
    cell.fingerprint = frontier_fingerprint(frontier);
  });
  for (const auto& cell : report.cells) {
    if (cell.fingerprint != report.cells.front().fingerprint) report.composition_invariant = false;
  }
  return report;
}

struct CurvePoint {
  double budget = 0.0;
  std::size_t objective = 0;
  double reliability = 0.0;
};

/// Best reliability per objective among frontier portfolios affordable at
/// each budget. The frontier at a budget b is the frontier at the largest
/// budget restricted to cost <= b, since any portfolio beating a cost-c
/// portfolio costs at most c; one search therefore serves every row.
inline std::vector<CurvePoint> reliability_curves(const ProblemSpec& spec, const ExtremePointSet& basis,
                                                  const std::vector<double>& budgets,
                                                  const FrontierOptions& options = {}, bool use_requirements = true) {
  require(!budgets.empty(), "reliability_curves: no budgets given");
  require(std::is_sorted(budgets.begin(), budgets.end()), "reliability_curves: budgets must be ascending");
  require(budgets.front() >= 0.0, "reliability_curves: budgets must be nonnegative");
  ProblemSpec widest = spec;
  widest.budget = budgets.back();
  auto frontier = compute_frontier(widest, basis, options, use_requirements);

  std::vector<CurvePoint> out;
  for (double b : budgets) {
    for (std::size_t j = 0; j < spec.objectives.size(); ++j) {
      double best = std::numeric_limits<double>::quiet_NaN();
      for (const auto& e : frontier.entries) {
        if (e.cost > b + tolerance) continue;
        if (std::isnan(best) || e.reliabilities[j] > best) best = e.reliabilities[j];
      }
      out.push_back({b, j, best});
    }
  }
  return out;
}

}  // namespace fortinet

#endif
