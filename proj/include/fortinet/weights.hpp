#ifndef FORTINET_WEIGHTS_HPP
#define FORTINET_WEIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace fortinet {

using WeightVector = std::vector<double>;

inline constexpr double weight_tolerance = 1e-9;

/// Row of the linear system a . w <= bound.
struct WeightConstraint {
  std::vector<double> coefficients;
  double bound = 0.0;

  friend bool operator==(const WeightConstraint&, const WeightConstraint&) = default;
};

/// Polyhedral set of criterion weights: the constraints plus the implicit
/// simplex conditions sum(w) = 1, w >= 0.
struct WeightSet {
  std::size_t m = 0;
  std::vector<WeightConstraint> constraints;
};

/// Vertices of a weight set, deduplicated, in descending lexicographic order.
struct ExtremePointSet {
  std::vector<WeightVector> points;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] std::size_t criteria() const noexcept { return points.empty() ? 0 : points.front().size(); }
};

inline WeightSet noninformative_set(std::size_t m) {
  require(m >= 1, "weight set needs at least one criterion");
  return WeightSet{m, {}};
}

inline void add_constraint(WeightSet& set, WeightConstraint row) {
  require(row.coefficients.size() == set.m, "weight constraint has wrong number of coefficients");
  require(std::any_of(row.coefficients.begin(), row.coefficients.end(), [](double c) { return c != 0.0; }),
          "weight constraint has only zero coefficients");
  set.constraints.push_back(std::move(row));
}

namespace detail {

/// Solves the square system by Gaussian elimination with partial pivoting.
/// Returns nullopt for (numerically) singular matrices.
inline std::optional<std::vector<double>> solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs) {
  const auto n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

inline double max_abs_diff(const WeightVector& x, const WeightVector& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

inline bool satisfies(const WeightSet& set, const WeightVector& w, double tol) {
  double sum = 0.0;
  for (double wi : w) {
    if (wi < -tol) return false;
    sum += wi;
  }
  if (std::abs(sum - 1.0) > tol) return false;
  for (const auto& row : set.constraints) {
    double lhs = std::inner_product(row.coefficients.begin(), row.coefficients.end(), w.begin(), 0.0);
    if (lhs > row.bound + tol) return false;
  }
  return true;
}

// Calls visit(subset) for each k-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_subset(std::size_t n, std::size_t k, Visit&& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    visit(static_cast<const std::vector<std::size_t>&>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Vertices of {A w <= b, w >= 0, sum w = 1}: every choice of m-1 inequality
/// rows made active together with the simplex hyperplane gives a candidate
/// basic solution; feasible ones are kept and deduplicated within 1e-9.
inline ExtremePointSet extreme_points(const WeightSet& set) {
  const auto m = set.m;
  require(m >= 1, "weight set needs at least one criterion");
  for (const auto& row : set.constraints) {
    require(row.coefficients.size() == m, "weight constraint has wrong number of coefficients");
  }

  // Inequality rows: user constraints, then -w_j <= 0.
  std::vector<WeightConstraint> rows = set.constraints;
  for (std::size_t j = 0; j < m; ++j) {
    WeightConstraint nonneg{std::vector<double>(m, 0.0), 0.0};
    nonneg.coefficients[j] = -1.0;
    rows.push_back(std::move(nonneg));
  }

  ExtremePointSet out;
  detail::for_each_subset(rows.size(), m - 1, [&](const std::vector<std::size_t>& active) {
    std::vector<std::vector<double>> a;
    std::vector<double> rhs;
    a.reserve(m);
    for (auto r : active) {
      a.push_back(rows[r].coefficients);
      rhs.push_back(rows[r].bound);
    }
    a.emplace_back(m, 1.0);
    rhs.push_back(1.0);
    auto w = detail::solve_linear(std::move(a), std::move(rhs));
    if (!w || !detail::satisfies(set, *w, weight_tolerance)) return;
    for (auto& wi : *w) {
      if (std::abs(wi) < 1e-15) wi = 0.0;
    }
    for (const auto& seen : out.points) {
      if (detail::max_abs_diff(seen, *w) <= weight_tolerance) return;
    }
    out.points.push_back(std::move(*w));
  });
  if (out.points.empty()) throw Error(ErrorKind::infeasible, "weight set is empty (constraints are infeasible)");
  std::sort(out.points.begin(), out.points.end(), std::greater<>());
  return out;
}

inline bool is_feasible(const WeightSet& set) {
  try {
    (void)extreme_points(set);
    return true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::infeasible) return false;
    throw;
  }
}

/// w_j >= r_j * w_t for the least-volume criterion t and every other j, with
/// r_j = v_j / v_t rounded to one decimal unless `round_ratios` is false.
/// Ties for the least volume go to the last such criterion.
inline std::vector<WeightConstraint> ratio_constraints_from_volumes(const std::vector<double>& volumes,
                                                                    bool round_ratios = true) {
  require(!volumes.empty(), "no volumes given");
  for (double v : volumes) require(v > 0.0 && std::isfinite(v), "volumes must be positive");
  std::size_t t = 0;
  for (std::size_t j = 1; j < volumes.size(); ++j) {
    if (volumes[j] <= volumes[t]) t = j;
  }
  std::vector<WeightConstraint> rows;
  for (std::size_t j = 0; j < volumes.size(); ++j) {
    if (j == t) continue;
    double ratio = volumes[j] / volumes[t];
    if (round_ratios) ratio = std::round(ratio * 10.0) / 10.0;
    WeightConstraint row{std::vector<double>(volumes.size(), 0.0), 0.0};
    row.coefficients[t] = ratio;
    row.coefficients[j] = -1.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline WeightVector canonical_vector(std::size_t m, std::size_t j) {
  WeightVector e(m, 0.0);
  e.at(j) = 1.0;
  return e;
}

/// Adds e_j for each criterion with a nonzero requirement, skipping vectors
/// already present within tolerance. Existing points keep their order.
inline ExtremePointSet augment_with_requirements(const ExtremePointSet& extremes, const std::vector<double>& alpha) {
  require(extremes.size() > 0, "empty extreme point set");
  require(alpha.size() == extremes.criteria(), "requirement vector length differs from criterion count");
  ExtremePointSet out = extremes;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] == 0.0) continue;
    auto e = canonical_vector(alpha.size(), j);
    bool present = std::any_of(out.points.begin(), out.points.end(), [&](const WeightVector& w) {
      return detail::max_abs_diff(w, e) <= weight_tolerance;
    });
    if (!present) out.points.push_back(std::move(e));
  }
  return out;
}

}  // namespace fortinet

#endif
