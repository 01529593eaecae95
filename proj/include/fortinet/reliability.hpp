#ifndef FORTINET_RELIABILITY_HPP
#define FORTINET_RELIABILITY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "network.hpp"
#include "parallel.hpp"

namespace fortinet {

/// Connection between two border nodes; its expected utility is the
/// probability that an operational path joins them.
struct Objective {
  std::string name;
  std::size_t a = 0;
  std::size_t b = 0;
  double min_reliability = 0.0;
};

inline Objective make_objective(const Network& net, std::string name, const std::string& from, const std::string& to,
                                double min_reliability = 0.0) {
  Objective obj{std::move(name), net.index_of(from), net.index_of(to), min_reliability};
  require(net.is_border(obj.a) && net.is_border(obj.b),
          "objective '" + obj.name + "': endpoints must be border nodes");
  require(obj.a != obj.b, "objective '" + obj.name + "': endpoints must differ");
  require(min_reliability >= 0.0 && min_reliability <= 1.0,
          "objective '" + obj.name + "': min_reliability outside [0,1]");
  return obj;
}

struct CutSet {
  std::vector<std::size_t> nodes;  // ascending node indices

  friend bool operator==(const CutSet&, const CutSet&) = default;
};

struct CutSetCollection {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<CutSet> cuts;  // by cardinality, then lexicographic
  bool truncated = false;
  std::size_t max_size_used = 0;
};

enum class Method { exact, mcub, monte_carlo, automatic };
enum class BoundDirection { exact, lower_bound, unspecified };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::mcub: return "mcub";
    case Method::monte_carlo: return "monte_carlo";
    case Method::automatic: return "auto";
  }
  return "?";
}

inline std::string_view to_string(BoundDirection d) {
  switch (d) {
    case BoundDirection::exact: return "exact";
    case BoundDirection::lower_bound: return "lower_bound";
    case BoundDirection::unspecified: return "unspecified";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "exact") return Method::exact;
  if (s == "mcub") return Method::mcub;
  if (s == "mc" || s == "monte_carlo") return Method::monte_carlo;
  if (s == "auto") return Method::automatic;
  fail("unknown reliability method '" + std::string(s) + "'");
}

struct ReliabilityEstimate {
  double value = 0.0;
  Method method = Method::exact;
  double std_error = 0.0;
  BoundDirection bound = BoundDirection::exact;
};

namespace detail {

inline void check_objective(const Network& net, const Objective& obj) {
  require(obj.a < net.size() && obj.b < net.size(), "objective '" + obj.name + "': node index out of range");
  require(net.is_border(obj.a) && net.is_border(obj.b), "objective '" + obj.name + "': endpoints must be border nodes");
}

/// Pivotal decomposition over fallible nodes. At each partial assignment the
/// pair is tested with unknown nodes treated as operational (prune to 0) and
/// as disrupted (all completions connected); otherwise it branches on an
/// unknown node lying on an optimistic path.
class ExactReliability {
 public:
  ExactReliability(const Network& net, const Objective& obj, const ProbabilityVector& p)
      : net_(net), obj_(obj), p_(p), status_(net.size(), up) {
    for (auto k : net.fallible()) status_[k] = unknown;
    open_.resize(net.size());
    parent_.resize(net.size());
  }

  double run() { return expand(1.0); }

 private:
  static constexpr std::uint8_t down = 0;
  static constexpr std::uint8_t up = 1;
  static constexpr std::uint8_t unknown = 2;

  double expand(double weight) {
    for (std::size_t v = 0; v < open_.size(); ++v) open_[v] = status_[v] == up ? 1 : 0;
    if (detail::reaches(net_, open_, obj_.a, obj_.b, queue_, seen_)) return weight;

    auto pivot = optimistic_pivot();
    if (!pivot) return 0.0;

    const auto k = *pivot;
    const double pk = p_[k];
    double total = 0.0;
    if (pk < 1.0) {
      status_[k] = up;
      total += expand(weight * (1.0 - pk));
    }
    if (pk > 0.0) {
      status_[k] = down;
      total += expand(weight * pk);
    }
    status_[k] = unknown;
    return total;
  }

  // First unknown node on a shortest optimistic a-b path, if one exists.
  std::optional<std::size_t> optimistic_pivot() {
    const auto a = obj_.a;
    const auto b = obj_.b;
    if (status_[a] == down || status_[b] == down) return std::nullopt;
    seen_.assign(net_.size(), 0);
    queue_.clear();
    queue_.push_back(a);
    seen_[a] = 1;
    bool found = false;
    for (std::size_t head = 0; head < queue_.size() && !found; ++head) {
      auto u = queue_[head];
      for (auto v : net_.neighbors(u)) {
        if (seen_[v] || status_[v] == down) continue;
        seen_[v] = 1;
        parent_[v] = u;
        if (v == b) {
          found = true;
          break;
        }
        queue_.push_back(v);
      }
    }
    if (!found) return std::nullopt;
    std::optional<std::size_t> pivot;
    for (auto v = b;; v = parent_[v]) {
      if (status_[v] == unknown) pivot = v;
      if (v == a) break;
    }
    return pivot;
  }

  const Network& net_;
  const Objective& obj_;
  const ProbabilityVector& p_;
  std::vector<std::uint8_t> status_;
  std::vector<std::uint8_t> open_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::size_t> queue_;
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Exact terminal-pair reliability. Errors with cap_exceeded when the number
/// of fallible nodes is above `cap`.
inline ReliabilityEstimate reliability_exact(const Network& net, const Objective& obj, const ProbabilityVector& p,
                                             std::size_t cap = default_enumeration_cap) {
  detail::check_objective(net, obj);
  net.validate(p);
  if (net.fallible().size() > cap) {
    throw Error(ErrorKind::cap_exceeded, "exact reliability over " + std::to_string(net.fallible().size()) +
                                             " fallible nodes exceeds the cap of " + std::to_string(cap) +
                                             "; use the cut-set method instead");
  }
  detail::ExactReliability solver(net, obj, p);
  double value = std::clamp(solver.run(), 0.0, 1.0);
  return {value, Method::exact, 0.0, BoundDirection::exact};
}

namespace detail {

/// Minimal a-b vertex separators of a graph given by adjacency lists, where
/// every vertex other than a and b may be removed. Successors of a separator S
/// (with a-side component C) are N(D) for D the b-component of
/// G - N[C + x], x in S, which reaches every minimal separator from the one
/// closest to a.
inline std::vector<std::vector<std::size_t>> minimal_separators(const std::vector<std::vector<std::size_t>>& adj,
                                                                std::size_t a, std::size_t b) {
  const auto n = adj.size();
  std::vector<std::size_t> queue;

  // Component of `start` avoiding nodes with blocked[v] != 0.
  auto component = [&](std::size_t start, const std::vector<std::uint8_t>& blocked) {
    std::vector<std::uint8_t> in(n, 0);
    queue.assign(1, start);
    in[start] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (auto v : adj[queue[head]]) {
        if (in[v] || blocked[v]) continue;
        in[v] = 1;
        queue.push_back(v);
      }
    }
    return in;
  };
  auto open_neighborhood = [&](const std::vector<std::uint8_t>& set) {
    std::vector<std::uint8_t> nb(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
      if (!set[u]) continue;
      for (auto v : adj[u]) {
        if (!set[v]) nb[v] = 1;
      }
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < n; ++v) {
      if (nb[v]) out.push_back(v);
    }
    return out;
  };
  // N(D) where D is the b-component of G - N[X].
  auto separator_towards_b = [&](const std::vector<std::uint8_t>& set) {
    auto closed = set;
    for (std::size_t u = 0; u < n; ++u) {
      if (!set[u]) continue;
      for (auto v : adj[u]) closed[v] = 1;
    }
    return open_neighborhood(component(b, closed));
  };

  std::set<std::vector<std::size_t>> found;
  std::vector<std::vector<std::size_t>> pending;
  {
    std::vector<std::uint8_t> start(n, 0);
    start[a] = 1;
    auto s0 = separator_towards_b(start);
    found.insert(s0);
    pending.push_back(std::move(s0));
  }
  while (!pending.empty()) {
    auto sep = std::move(pending.back());
    pending.pop_back();
    std::vector<std::uint8_t> blocked(n, 0);
    for (auto v : sep) blocked[v] = 1;
    auto side_a = component(a, blocked);
    for (auto x : sep) {
      if (std::find(adj[x].begin(), adj[x].end(), b) != adj[x].end()) continue;
      auto grown = side_a;
      grown[x] = 1;
      auto next = separator_towards_b(grown);
      if (found.insert(next).second) pending.push_back(std::move(next));
    }
  }
  return {found.begin(), found.end()};
}

inline bool cut_order(const CutSet& x, const CutSet& y) {
  if (x.nodes.size() != y.nodes.size()) return x.nodes.size() < y.nodes.size();
  return x.nodes < y.nodes;
}

}  // namespace detail

/// All minimal sets of fallible nodes whose failure disconnects the
/// objective's pair. Depends on topology only. With `max_size`, cuts larger
/// than the cap are dropped and the collection is flagged truncated.
inline CutSetCollection minimal_cuts(const Network& net, const Objective& obj,
                                     std::optional<std::size_t> max_size = std::nullopt) {
  detail::check_objective(net, obj);
  const auto n = net.size();
  const auto a = obj.a;
  const auto b = obj.b;
  {
    NetworkState all_up(n, 1);
    if (!is_connected(net, all_up, a, b)) {
      throw Error(ErrorKind::unattainable,
                  "objective '" + obj.name + "': pair is disconnected even with every node operational");
    }
  }

  std::vector<CutSet> cuts;
  if (net.is_fallible(a)) cuts.push_back({{a}});
  if (net.is_fallible(b)) cuts.push_back({{b}});

  // Reduced graph on the terminals and fallible nodes; an infallible node is
  // eliminated by joining its neighbors, which preserves pair connectivity
  // for every state of the remaining nodes.
  std::vector<std::size_t> kept;
  std::vector<std::size_t> local(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == a || v == b || net.is_fallible(v)) {
      local[v] = kept.size();
      kept.push_back(v);
    }
  }
  std::vector<std::vector<std::size_t>> adj(kept.size());
  {
    std::vector<std::size_t> queue;
    std::vector<std::uint8_t> seen(n);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::fill(seen.begin(), seen.end(), 0);
      queue.assign(1, kept[i]);
      seen[kept[i]] = 1;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (auto v : net.neighbors(queue[head])) {
          if (seen[v]) continue;
          seen[v] = 1;
          if (local[v] < n) {
            adj[i].push_back(local[v]);
          } else {
            queue.push_back(v);
          }
        }
      }
      std::sort(adj[i].begin(), adj[i].end());
    }
  }

  const auto la = local[a];
  const auto lb = local[b];
  if (std::find(adj[la].begin(), adj[la].end(), lb) == adj[la].end()) {
    for (auto& sep : detail::minimal_separators(adj, la, lb)) {
      CutSet cut;
      for (auto v : sep) cut.nodes.push_back(kept[v]);
      std::sort(cut.nodes.begin(), cut.nodes.end());
      cuts.push_back(std::move(cut));
    }
  }
  std::sort(cuts.begin(), cuts.end(), detail::cut_order);

  CutSetCollection out{a, b, {}, false, 0};
  for (auto& cut : cuts) {
    if (max_size && cut.nodes.size() > *max_size) {
      out.truncated = true;
      continue;
    }
    out.max_size_used = std::max(out.max_size_used, cut.nodes.size());
    out.cuts.push_back(std::move(cut));
  }
  if (max_size && out.truncated) out.max_size_used = *max_size;
  return out;
}

/// Minimal-cut product bound: prod over cuts of (1 - prod_{k in cut} p_k).
/// A lower bound on the reliability for complete collections.
inline ReliabilityEstimate reliability_mcub(const CutSetCollection& cuts, const ProbabilityVector& p) {
  double value = 1.0;
  for (const auto& cut : cuts.cuts) {
    double all_fail = 1.0;
    for (auto k : cut.nodes) {
      require(k < p.size(), "cut node index outside probability vector");
      all_fail *= p[k];
    }
    value *= 1.0 - all_fail;
  }
  return {std::clamp(value, 0.0, 1.0), Method::mcub, 0.0,
          cuts.truncated ? BoundDirection::unspecified : BoundDirection::lower_bound};
}

inline constexpr std::uint64_t monte_carlo_chunk = 1U << 16;

/// Crude Monte Carlo estimate of the pair's reliability. Samples are drawn in
/// fixed-size chunks, each with its own generator seeded from (seed, chunk),
/// so the estimate depends only on (seed, samples), not on `workers`.
inline ReliabilityEstimate reliability_monte_carlo(const Network& net, const Objective& obj,
                                                   const ProbabilityVector& p, std::uint64_t samples,
                                                   std::uint64_t seed, std::size_t workers = 1) {
  detail::check_objective(net, obj);
  net.validate(p);
  require(samples >= 1, "monte carlo needs at least one sample");

  const auto chunks = (samples + monte_carlo_chunk - 1) / monte_carlo_chunk;
  std::vector<std::uint64_t> hits(chunks, 0);
  parallel_for(chunks, workers, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(std::uint64_t{c} >> 32)};
    std::mt19937_64 rng(seq);
    const auto begin = c * monte_carlo_chunk;
    const auto end = std::min<std::uint64_t>(samples, begin + monte_carlo_chunk);
    NetworkState x(net.size(), 1);
    std::vector<std::size_t> queue;
    std::vector<std::uint8_t> seen;
    std::uint64_t count = 0;
    for (auto s = begin; s < end; ++s) {
      for (auto k : net.fallible()) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x[k] = u >= p[k] ? 1 : 0;
      }
      if (detail::reaches(net, x, obj.a, obj.b, queue, seen)) ++count;
    }
    hits[c] = count;
  });

  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(samples);
  const double v = static_cast<double>(total) / n;
  return {v, Method::monte_carlo, std::sqrt(v * (1.0 - v) / n), BoundDirection::unspecified};
}

struct ReliabilityOptions {
  Method method = Method::automatic;
  std::size_t enumeration_cap = default_enumeration_cap;
  std::optional<std::size_t> max_cut_size;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

/// Per-objective reliabilities for one network. Cut collections are computed
/// on first use and shared by every later call, so sweeping over many
/// probability vectors (portfolios) pays the topology work once.
class ReliabilityEngine {
 public:
  ReliabilityEngine(const Network& net, std::vector<Objective> objectives, ReliabilityOptions options = {})
      : net_(&net), objectives_(std::move(objectives)), options_(options),
        cache_(std::make_unique<Cache>(objectives_.size())) {
    for (const auto& obj : objectives_) detail::check_objective(net, obj);
  }

  [[nodiscard]] const Network& network() const noexcept { return *net_; }
  [[nodiscard]] const std::vector<Objective>& objectives() const noexcept { return objectives_; }
  [[nodiscard]] const ReliabilityOptions& options() const noexcept { return options_; }

  /// The method `automatic` resolves to for this network.
  [[nodiscard]] Method resolved_method() const {
    if (options_.method != Method::automatic) return options_.method;
    return net_->fallible().size() <= options_.enumeration_cap ? Method::exact : Method::mcub;
  }

  [[nodiscard]] const CutSetCollection& cuts(std::size_t j) const {
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->cuts.at(j);
    if (!slot) slot = minimal_cuts(*net_, objectives_[j], options_.max_cut_size);
    return *slot;
  }

  [[nodiscard]] ReliabilityEstimate estimate(std::size_t j, const ProbabilityVector& p, Method method) const {
    if (method == Method::automatic) {
      method = net_->fallible().size() <= options_.enumeration_cap ? Method::exact : Method::mcub;
    }
    switch (method) {
      case Method::exact: return reliability_exact(*net_, objectives_.at(j), p, options_.enumeration_cap);
      case Method::mcub: return reliability_mcub(cuts(j), p);
      case Method::monte_carlo:
        return reliability_monte_carlo(*net_, objectives_.at(j), p, options_.samples, options_.seed,
                                       options_.workers);
      case Method::automatic: break;
    }
    fail("unreachable reliability method");
  }

  [[nodiscard]] std::vector<ReliabilityEstimate> estimates(const ProbabilityVector& p) const {
    net_->validate(p);
    std::vector<ReliabilityEstimate> out;
    out.reserve(objectives_.size());
    for (std::size_t j = 0; j < objectives_.size(); ++j) out.push_back(estimate(j, p, options_.method));
    return out;
  }

  /// R_j for every objective under `p`.
  [[nodiscard]] std::vector<double> reliabilities(const ProbabilityVector& p) const {
    std::vector<double> out;
    for (const auto& e : estimates(p)) out.push_back(e.value);
    return out;
  }

 private:
  struct Cache {
    explicit Cache(std::size_t n) : cuts(n) {}
    std::mutex mutex;
    std::vector<std::optional<CutSetCollection>> cuts;
  };

  const Network* net_;
  std::vector<Objective> objectives_;
  ReliabilityOptions options_;
  std::unique_ptr<Cache> cache_;
};

inline std::vector<double> connection_reliabilities(const Network& net, const std::vector<Objective>& objectives,
                                                    const ProbabilityVector& p, Method method = Method::automatic) {
  ReliabilityOptions options;
  options.method = method;
  return ReliabilityEngine(net, objectives, options).reliabilities(p);
}

}  // namespace fortinet

#endif
