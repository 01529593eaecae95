#ifndef FORTINET_NETWORK_HPP
#define FORTINET_NETWORK_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"

namespace fortinet {

/// Disruption probability per node, indexed in network node order.
using ProbabilityVector = std::vector<double>;

/// One entry per node in network order: 1 = operational, 0 = disrupted.
using NetworkState = std::vector<std::uint8_t>;

inline constexpr std::size_t default_enumeration_cap = 20;

struct NodeSpec {
  std::string id;
  double p_fail = 0.0;
  /// Unset means "fallible iff p_fail > 0".
  std::optional<bool> fallible;
};

using EdgeSpec = std::pair<std::string, std::string>;

struct Subgraph {
  std::vector<std::size_t> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Undirected node-failure network with designated border (terminal) nodes.
/// Node order is the construction order and is the canonical bit order for
/// states, probability vectors and every emitted table.
class Network {
 public:
  Network(std::vector<NodeSpec> nodes, const std::vector<EdgeSpec>& edges, const std::vector<std::string>& border)
      : nodes_(std::move(nodes)) {
    require(!nodes_.empty(), "network has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& node = nodes_[i];
      require(!node.id.empty(), "node id must not be empty");
      require(node.p_fail >= 0.0 && node.p_fail <= 1.0, "node '" + node.id + "': p_fail outside [0,1]");
      require(!(node.fallible == false && node.p_fail > 0.0),
              "node '" + node.id + "': marked infallible but p_fail > 0");
      if (!index_.emplace(node.id, i).second) fail("duplicate node id '" + node.id + "'");
    }

    adjacency_.resize(nodes_.size());
    for (const auto& [from, to] : edges) {
      auto a = find(from);
      auto b = find(to);
      if (!a) fail("edge (" + from + "," + to + "): unknown endpoint '" + from + "'");
      if (!b) fail("edge (" + from + "," + to + "): unknown endpoint '" + to + "'");
      if (*a == *b) fail("edge (" + from + "," + to + "): self-loop");
      auto lo = std::min(*a, *b);
      auto hi = std::max(*a, *b);
      if (std::find(edges_.begin(), edges_.end(), std::pair{lo, hi}) != edges_.end()) continue;
      edges_.emplace_back(lo, hi);
      adjacency_[lo].push_back(hi);
      adjacency_[hi].push_back(lo);
    }
    for (auto& list : adjacency_) std::sort(list.begin(), list.end());

    is_border_.assign(nodes_.size(), false);
    for (const auto& id : border) {
      auto idx = find(id);
      if (!idx) fail("border node '" + id + "' is not a node");
      if (is_border_[*idx]) fail("border node '" + id + "' listed twice");
      is_border_[*idx] = true;
      border_.push_back(*idx);
    }
    require(border_.size() >= 2, "at least two border nodes are required");

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (is_fallible(i)) fallible_.push_back(i);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const NodeSpec& node(std::size_t i) const { return nodes_.at(i); }
  [[nodiscard]] std::span<const NodeSpec> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::span<const std::pair<std::size_t, std::size_t>> edges() const noexcept { return edges_; }
  [[nodiscard]] std::span<const std::size_t> neighbors(std::size_t i) const { return adjacency_.at(i); }
  [[nodiscard]] std::span<const std::size_t> border() const noexcept { return border_; }
  [[nodiscard]] bool is_border(std::size_t i) const { return is_border_.at(i); }

  [[nodiscard]] bool is_fallible(std::size_t i) const {
    const auto& node = nodes_.at(i);
    return node.fallible.value_or(node.p_fail > 0.0);
  }
  /// Indices of fallible nodes in node order.
  [[nodiscard]] std::span<const std::size_t> fallible() const noexcept { return fallible_; }

  [[nodiscard]] std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] std::size_t index_of(const std::string& id) const {
    auto idx = find(id);
    if (!idx) fail("unknown node '" + id + "'");
    return *idx;
  }

  [[nodiscard]] ProbabilityVector baseline() const {
    ProbabilityVector p(nodes_.size());
    std::transform(nodes_.begin(), nodes_.end(), p.begin(), [](const NodeSpec& n) { return n.p_fail; });
    return p;
  }

  /// Checks length, range, and that infallible nodes carry zero probability.
  void validate(const ProbabilityVector& p) const {
    require(p.size() == nodes_.size(), "probability vector length does not match node count");
    for (std::size_t i = 0; i < p.size(); ++i) {
      require(p[i] >= 0.0 && p[i] <= 1.0, "probability of node '" + nodes_[i].id + "' outside [0,1]");
      require(is_fallible(i) || p[i] == 0.0, "node '" + nodes_[i].id + "' is infallible but has p > 0");
    }
  }

  void validate(const NetworkState& x) const {
    require(x.size() == nodes_.size(), "network state length does not match node count");
  }

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<bool> is_border_;
  std::vector<std::size_t> border_;
  std::vector<std::size_t> fallible_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline Network build_network(std::vector<NodeSpec> nodes, const std::vector<EdgeSpec>& edges,
                             const std::vector<std::string>& border) {
  return Network(std::move(nodes), edges, border);
}

/// Same topology and fallible set with new baseline probabilities.
inline Network with_probabilities(const Network& net, const ProbabilityVector& p) {
  require(p.size() == net.size(), "probability vector length does not match node count");
  std::vector<NodeSpec> nodes(net.nodes().begin(), net.nodes().end());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].fallible = net.is_fallible(i);
    nodes[i].p_fail = p[i];
  }
  std::vector<EdgeSpec> edges;
  for (const auto& [a, b] : net.edges()) edges.emplace_back(nodes[a].id, nodes[b].id);
  std::vector<std::string> border;
  for (auto b : net.border()) border.push_back(nodes[b].id);
  return Network(std::move(nodes), edges, border);
}

inline Subgraph operational_subgraph(const Network& net, const NetworkState& x) {
  net.validate(x);
  Subgraph sub;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (x[i]) sub.nodes.push_back(i);
  }
  for (const auto& [a, b] : net.edges()) {
    if (x[a] && x[b]) sub.edges.emplace_back(a, b);
  }
  return sub;
}

namespace detail {

/// Breadth-first search from `from` through nodes with `open[v] != 0`.
/// `queue` is scratch space reused across calls.
inline bool reaches(const Network& net, std::span<const std::uint8_t> open, std::size_t from, std::size_t to,
                    std::vector<std::size_t>& queue, std::vector<std::uint8_t>& seen) {
  if (!open[from] || !open[to]) return false;
  if (from == to) return true;
  seen.assign(net.size(), 0);
  queue.clear();
  queue.push_back(from);
  seen[from] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (auto v : net.neighbors(queue[head])) {
      if (seen[v] || !open[v]) continue;
      if (v == to) return true;
      seen[v] = 1;
      queue.push_back(v);
    }
  }
  return false;
}

}  // namespace detail

/// True iff an operational path joins the two border nodes in state `x`.
inline bool is_connected(const Network& net, const NetworkState& x, std::size_t a, std::size_t b) {
  net.validate(x);
  require(a < net.size() && b < net.size(), "node index out of range");
  require(net.is_border(a) && net.is_border(b), "connection endpoints must be border nodes");
  std::vector<std::size_t> queue;
  std::vector<std::uint8_t> seen;
  return detail::reaches(net, x, a, b, queue, seen);
}

inline bool is_connected(const Network& net, const NetworkState& x, const std::string& a, const std::string& b) {
  return is_connected(net, x, net.index_of(a), net.index_of(b));
}

/// Probability of state `x` under independent node disruptions.
inline double state_probability(const ProbabilityVector& p, const NetworkState& x) {
  require(p.size() == x.size(), "probability vector and state lengths differ");
  double prob = 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) prob *= x[k] ? 1.0 - p[k] : p[k];
  return prob;
}

/// Number of states produced by enumerate_states for `varying` nodes.
inline std::uint64_t state_count(std::size_t varying) { return std::uint64_t{1} << varying; }

/// Visits all 2^k states obtained by varying the nodes listed in `varying`
/// (k = varying.size()), every other node pinned operational. Order is binary
/// counting with the first listed node as the most significant bit.
template <typename Visit>
void enumerate_states(std::size_t n, std::span<const std::size_t> varying, Visit&& visit,
                      std::size_t cap = default_enumeration_cap) {
  if (varying.size() > cap) {
    throw Error(ErrorKind::cap_exceeded, "exact enumeration over " + std::to_string(varying.size()) +
                                             " fallible nodes exceeds the cap of " + std::to_string(cap) +
                                             "; use the cut-set method instead");
  }
  for (auto v : varying) require(v < n, "varying node index out of range");
  NetworkState x(n, 1);
  const auto k = varying.size();
  const auto total = state_count(k);
  for (std::uint64_t code = 0; code < total; ++code) {
    for (std::size_t j = 0; j < k; ++j) x[varying[j]] = static_cast<std::uint8_t>((code >> (k - 1 - j)) & 1U);
    visit(static_cast<const NetworkState&>(x));
  }
}

template <typename Visit>
void enumerate_states(const Network& net, Visit&& visit, std::size_t cap = default_enumeration_cap) {
  enumerate_states(net.size(), net.fallible(), std::forward<Visit>(visit), cap);
}

}  // namespace fortinet

#endif
