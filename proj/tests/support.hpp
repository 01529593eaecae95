// Test helpers: fixtures, random instances and slow reference implementations
// that share no code with the library beyond its data types.
#ifndef FORTINET_TESTS_SUPPORT_HPP
#define FORTINET_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fortinet/problem_io.hpp"
#include "fortinet/frontier.hpp"

namespace fortinet::testing {

inline std::string fixture(const std::string& name) { return std::string(FORTINET_FIXTURE_DIR) + "/" + name; }

inline ProblemSpec load_spec(const std::string& name) { return to_spec(load_problem(fixture(name))); }

inline ReliabilityOptions exact_reliability() {
  ReliabilityOptions o;
  o.method = Method::exact;
  return o;
}

// ---------------------------------------------------------------- oracles

/// Connectivity by repeated edge relaxation over the raw edge list.
inline bool oracle_connected(const Network& net, const std::vector<int>& up, std::size_t a, std::size_t b) {
  if (!up[a] || !up[b]) return false;
  std::vector<int> reach(net.size(), 0);
  reach[a] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [u, v] : net.edges()) {
      if (!up[u] || !up[v]) continue;
      if (reach[u] != reach[v]) {
        reach[u] = reach[v] = 1;
        grew = true;
      }
    }
  }
  return reach[b] != 0;
}

/// Sum of p(x) over all 2^n states of every node where the pair is connected.
inline double oracle_reliability(const Network& net, std::size_t a, std::size_t b, const std::vector<double>& p) {
  const auto n = net.size();
  double total = 0.0;
  std::vector<int> up(n);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    double prob = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      up[k] = static_cast<int>((code >> k) & 1U);
      prob *= up[k] ? 1.0 - p[k] : p[k];
    }
    if (prob == 0.0) continue;
    if (oracle_connected(net, up, a, b)) total += prob;
  }
  return total;
}

/// Minimal vertex cuts by increasing-cardinality subset search over fallible
/// nodes, skipping supersets of cuts already found.
inline std::vector<std::vector<std::size_t>> oracle_minimal_cuts(const Network& net, std::size_t a, std::size_t b) {
  std::vector<std::size_t> fallible;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (net.is_fallible(k)) fallible.push_back(k);
  }
  const auto f = fallible.size();
  std::vector<std::uint64_t> found_masks;
  std::vector<std::vector<std::size_t>> cuts;
  for (std::size_t size = 1; size <= f; ++size) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << f); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcountll(mask)) != size) continue;
      bool superset = std::any_of(found_masks.begin(), found_masks.end(),
                                  [&](std::uint64_t c) { return (mask & c) == c; });
      if (superset) continue;
      std::vector<int> up(net.size(), 1);
      for (std::size_t i = 0; i < f; ++i) {
        if (mask >> i & 1U) up[fallible[i]] = 0;
      }
      if (oracle_connected(net, up, a, b)) continue;
      found_masks.push_back(mask);
      std::vector<std::size_t> cut;
      for (std::size_t i = 0; i < f; ++i) {
        if (mask >> i & 1U) cut.push_back(fallible[i]);
      }
      cuts.push_back(cut);
    }
  }
  std::sort(cuts.begin(), cuts.end(), [](const auto& x, const auto& y) {
    return x.size() != y.size() ? x.size() < y.size() : x < y;
  });
  return cuts;
}

/// Gaussian elimination with full pivoting on a small square system.
inline bool oracle_solve(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const auto n = b.size();
  std::vector<std::size_t> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < n; ++i) {
      for (std::size_t j = k; j < n; ++j) {
        if (std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          pr = i;
          pc = j;
        }
      }
    }
    if (best < 1e-12) return false;
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    std::swap(col[k], col[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * y[j];
    y[i] = s / a[i][i];
  }
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[col[i]] = y[i];
  return true;
}

/// Vertices of {A w <= b, w >= 0, sum w = 1}: every bitmask of rows with
/// exactly m-1 members gives one candidate. Sorted lexicographically.
inline std::vector<std::vector<double>> oracle_vertices(const WeightSet& set) {
  const auto m = set.m;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const auto& c : set.constraints) {
    rows.push_back(c.coefficients);
    rhs.push_back(c.bound);
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> r(m, 0.0);
    r[j] = -1.0;
    rows.push_back(r);
    rhs.push_back(0.0);
  }
  std::vector<std::vector<double>> out;
  const auto total = rows.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != m - 1) continue;
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (std::size_t r = 0; r < total; ++r) {
      if (mask >> r & 1U) {
        a.push_back(rows[r]);
        b.push_back(rhs[r]);
      }
    }
    a.emplace_back(m, 1.0);
    b.push_back(1.0);
    std::vector<double> w;
    if (!oracle_solve(a, b, w)) continue;
    bool ok = true;
    for (std::size_t r = 0; r < total && ok; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += rows[r][j] * w[j];
      ok = s <= rhs[r] + 1e-9;
    }
    if (!ok) continue;
    bool dup = std::any_of(out.begin(), out.end(), [&](const std::vector<double>& v) {
      for (std::size_t j = 0; j < m; ++j) {
        if (std::abs(v[j] - w[j]) > 1e-9) return false;
      }
      return true;
    });
    if (!dup) out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct OracleCentrality {
  std::vector<double> degree, closeness, betweenness;
};

/// Floyd-Warshall distances and path counts; betweenness of v sums, over
/// unordered pairs {s,t} not containing v, sigma_sv*sigma_vt/sigma_st when v
/// lies on a shortest s-t path.
inline OracleCentrality oracle_centrality(const Network& net) {
  const auto n = net.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& [u, v] : net.edges()) d[u][v] = d[v][u] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  // sigma by dynamic programming over distance layers.
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> by_dist;
    for (std::size_t t = 0; t < n; ++t) {
      if (d[s][t] < inf) by_dist.push_back(t);
    }
    std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t x, std::size_t y) { return d[s][x] < d[s][y]; });
    sigma[s][s] = 1;
    for (auto t : by_dist) {
      if (t == s) continue;
      for (auto u : net.neighbors(t)) {
        if (d[s][u] + 1 == d[s][t]) sigma[s][t] += sigma[s][u];
      }
    }
  }
  OracleCentrality out;
  out.degree.resize(n);
  out.closeness.assign(n, 0.0);
  out.betweenness.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    out.degree[v] = static_cast<double>(net.neighbors(v).size());
    double sum = 0;
    std::size_t reach = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t != v && d[v][t] < inf) {
        sum += d[v][t];
        ++reach;
      }
    }
    if (sum > 0) out.closeness[v] = static_cast<double>(reach) / sum;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = s + 1; t < n; ++t) {
        if (s == v || t == v || d[s][t] == inf) continue;
        if (d[s][v] + d[v][t] == d[s][t]) out.betweenness[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
      }
    }
  }
  return out;
}

struct OracleEntry {
  std::vector<int> bits;
  double cost = 0.0;
  std::vector<double> r;
  std::vector<double> u;
};

inline bool oracle_feasible(const ProblemSpec& spec, const std::vector<int>& q) {
  double cost = 0.0;
  std::set<std::size_t> nodes;
  for (std::size_t l = 0; l < q.size(); ++l) {
    if (!q[l]) continue;
    cost += spec.actions[l].cost;
    if (!nodes.insert(spec.actions[l].node).second) return false;
  }
  if (cost > spec.budget + 1e-9) return false;
  for (const auto& c : spec.logical) {
    int on = 0;
    for (auto l : c.actions) on += q[l];
    if (c.kind == LogicalKind::mutex && on > 1) return false;
    if (c.kind == LogicalKind::at_most_k && on > static_cast<int>(c.k)) return false;
    if (c.kind == LogicalKind::implies && q[c.actions[0]] && !q[c.actions[1]]) return false;
  }
  return true;
}

/// Every feasible portfolio evaluated with the state-sum oracle.
inline std::vector<OracleEntry> oracle_feasible_set(const ProblemSpec& spec, const std::vector<std::vector<double>>& basis) {
  const auto h = spec.actions.size();
  std::vector<OracleEntry> out;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << h); ++code) {
    std::vector<int> q(h);
    for (std::size_t l = 0; l < h; ++l) q[l] = static_cast<int>(code >> l & 1U);
    if (!oracle_feasible(spec, q)) continue;
    OracleEntry e;
    e.bits = q;
    auto p = spec.network.baseline();
    for (std::size_t l = 0; l < h; ++l) {
      if (!q[l]) continue;
      e.cost += spec.actions[l].cost;
      p[spec.actions[l].node] = spec.actions[l].p_after;
    }
    for (const auto& obj : spec.objectives) e.r.push_back(oracle_reliability(spec.network, obj.a, obj.b, p));
    for (const auto& w : basis) {
      double u = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) u += w[j] * e.r[j];
      e.u.push_back(u);
    }
    out.push_back(std::move(e));
  }
  return out;
}

/// Definition-level cost-efficiency filter.
inline std::vector<OracleEntry> oracle_cost_efficient(const std::vector<OracleEntry>& all) {
  const double tau = 1e-9;
  auto beats = [&](const OracleEntry& x, const OracleEntry& y) {
    bool geq = true, gt = false, eq = true;
    for (std::size_t e = 0; e < x.u.size(); ++e) {
      geq = geq && x.u[e] >= y.u[e] - tau;
      gt = gt || x.u[e] > y.u[e] + tau;
      eq = eq && std::abs(x.u[e] - y.u[e]) <= tau;
    }
    return (geq && gt && x.cost <= y.cost + tau) || (eq && x.cost < y.cost - tau);
  };
  std::vector<OracleEntry> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool beaten = false;
    for (std::size_t k = 0; k < all.size() && !beaten; ++k) beaten = k != i && beats(all[k], all[i]);
    if (!beaten) out.push_back(all[i]);
  }
  return out;
}

inline std::vector<OracleEntry> oracle_frontier(const ProblemSpec& spec, const ExtremePointSet& basis) {
  return oracle_cost_efficient(oracle_feasible_set(spec, basis.points));
}

/// Feasible portfolios meeting every requirement, then filtered on `basis`.
inline std::vector<OracleEntry> oracle_requirement_frontier(const ProblemSpec& spec, const ExtremePointSet& basis) {
  auto all = oracle_feasible_set(spec, basis.points);
  std::vector<OracleEntry> meeting;
  for (auto& e : all) {
    bool ok = true;
    for (std::size_t j = 0; j < spec.objectives.size(); ++j) ok = ok && e.r[j] >= spec.objectives[j].min_reliability - 1e-9;
    if (ok) meeting.push_back(std::move(e));
  }
  return oracle_cost_efficient(meeting);
}

inline std::set<std::string> bit_strings(const std::vector<OracleEntry>& entries) {
  std::set<std::string> out;
  for (const auto& e : entries) {
    std::string s;
    for (int b : e.bits) s.push_back(b ? '1' : '0');
    out.insert(s);
  }
  return out;
}

inline std::set<std::string> bit_strings(const Frontier& f) {
  std::set<std::string> out;
  for (const auto& e : f.entries) out.insert(e.portfolio.to_string());
  return out;
}

// ------------------------------------------------------- random instances

/// Connected random graph: `fallible` internal nodes with p in (0, pmax],
/// `borders` perfectly reliable border nodes, extra random edges.
inline Network random_network(std::mt19937_64& rng, std::size_t fallible, std::size_t borders, double pmax,
                              double extra_edge_prob = 0.3) {
  std::vector<NodeSpec> nodes;
  std::vector<std::string> border;
  std::uniform_real_distribution<double> pd(0.01, pmax);
  for (std::size_t i = 0; i < borders; ++i) {
    nodes.push_back({"B" + std::to_string(i), 0.0, std::nullopt});
    border.push_back("B" + std::to_string(i));
  }
  for (std::size_t i = 0; i < fallible; ++i) nodes.push_back({"n" + std::to_string(i), pd(rng), std::nullopt});
  const auto n = nodes.size();
  std::vector<EdgeSpec> edges;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  // random spanning tree
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    edges.emplace_back(nodes[perm[i]].id, nodes[perm[pick(rng)]].id);
  }
  std::bernoulli_distribution extra(extra_edge_prob);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (extra(rng)) edges.emplace_back(nodes[i].id, nodes[j].id);
    }
  }
  return Network(nodes, edges, border);
}

struct RandomOptions {
  std::size_t max_fallible = 8;
  std::size_t max_actions = 8;
  bool logical = true;
  bool weight_constraints = true;
  bool requirements = false;
};

/// Random problem with 2-3 objectives, costs in {1,2,3}, a random budget,
/// ratio weight constraints, and a mutex or implies constraint 30% of the
/// time.
inline ProblemSpec random_problem(std::mt19937_64& rng, const RandomOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> fall_d(2, opt.max_fallible);
  std::uniform_int_distribution<std::size_t> obj_d(2, 3);
  const auto m = obj_d(rng);
  const auto borders = m == 3 ? std::size_t{3} : std::uniform_int_distribution<std::size_t>(2, 3)(rng);
  auto net = random_network(rng, fall_d(rng), borders, 0.3);

  std::vector<Objective> objectives;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < borders; ++i) {
    for (std::size_t j = i + 1; j < borders; ++j) pairs.emplace_back(i, j);
  }
  for (std::size_t j = 0; j < m; ++j) {
    auto [a, b] = pairs[j % pairs.size()];
    objectives.push_back({"o" + std::to_string(j), net.border()[a], net.border()[b], 0.0});
  }

  std::vector<std::size_t> fall(net.fallible().begin(), net.fallible().end());
  std::uniform_int_distribution<std::size_t> h_d(1, opt.max_actions);
  const auto h = h_d(rng);
  std::uniform_int_distribution<int> cost_d(1, 3);
  std::uniform_int_distribution<std::size_t> node_d(0, fall.size() - 1);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::vector<FortificationAction> actions;
  double total = 0.0;
  for (std::size_t l = 0; l < h; ++l) {
    auto node = l < fall.size() ? fall[l] : fall[node_d(rng)];
    double p = net.node(node).p_fail;
    double after = frac(rng) < 0.15 ? 0.0 : p * std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    actions.push_back({"a" + std::to_string(l), node, static_cast<double>(cost_d(rng)), after});
    total += actions.back().cost;
  }
  std::shuffle(actions.begin(), actions.end(), rng);
  const double budget = std::floor(std::uniform_real_distribution<double>(0.0, total + 1.0)(rng));

  std::vector<LogicalConstraint> logical;
  if (opt.logical && h >= 2 && frac(rng) < 0.3) {
    std::uniform_int_distribution<std::size_t> a_d(0, h - 1);
    auto x = a_d(rng);
    auto y = a_d(rng);
    while (y == x) y = a_d(rng);
    logical.push_back({frac(rng) < 0.5 ? LogicalKind::mutex : LogicalKind::implies, {x, y}, 0});
  }

  WeightSet weights = noninformative_set(m);
  if (opt.weight_constraints && frac(rng) < 0.7) {
    // w_i >= r w_j, which keeps the set full-dimensional.
    std::uniform_int_distribution<std::size_t> c_d(0, m - 1);
    const auto rows = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int r = 0; r < rows; ++r) {
      auto i = c_d(rng);
      auto j = c_d(rng);
      while (j == i) j = c_d(rng);
      double ratio = std::round(std::uniform_real_distribution<double>(0.3, 3.0)(rng) * 10.0) / 10.0;
      WeightConstraint row{std::vector<double>(m, 0.0), 0.0};
      row.coefficients[j] = ratio;
      row.coefficients[i] = -1.0;
      if (is_feasible(WeightSet{m, {row}})) add_constraint(weights, row);
    }
    if (!is_feasible(weights)) weights = noninformative_set(m);
  }

  if (opt.requirements) {
    for (auto& obj : objectives) {
      if (frac(rng) < 0.5) continue;
      obj.min_reliability = std::uniform_real_distribution<double>(0.5, 0.99)(rng);
    }
  }
  ProblemSpec spec{net, std::move(objectives), std::move(actions), budget, std::move(logical), std::move(weights)};
  spec.validate();
  return spec;
}

/// Sets requirements between the baseline and the best attainable value.
inline void random_requirements(ProblemSpec& spec, std::mt19937_64& rng) {
  auto all = oracle_feasible_set(spec, {std::vector<double>(spec.objectives.size(), 1.0 / spec.objectives.size())});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t j = 0; j < spec.objectives.size(); ++j) {
    if (u(rng) < 0.4) continue;
    double lo = all.front().r[j];
    double hi = lo;
    for (const auto& e : all) hi = std::max(hi, e.r[j]);
    spec.objectives[j].min_reliability = std::min(1.0, lo + u(rng) * (hi - lo) * 1.05);
  }
}

}  // namespace fortinet::testing

#endif
