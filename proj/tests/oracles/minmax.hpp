#pragma once

// Reference solutions of  min_y max_i J_i(y)  over {y >= 0, sum y = Y} for
// one fixed schedule, without any simplex code: exact vertex enumeration of
// the epigraph polytope, and brute-force grids.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fifo_sim.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// a[i][k] = J_i at the unit allocation e_k, so that J = a y by linearity.
inline Matrix coefficients(const Instance& in, const std::vector<std::vector<std::size_t>>& schedule,
                           double w1, double w2, double cycles_per_bit) {
  const std::size_t n = in.size();
  Matrix a(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> unit(n, 0.0);
    unit[k] = 1.0;
    const auto j = node_costs(in, schedule, unit, w1, w2, cycles_per_bit);
    for (std::size_t i = 0; i < n; ++i) a[i][k] = j[i];
  }
  return a;
}

/// Gaussian elimination with partial pivoting; false if (near) singular.
inline bool solve_linear(Matrix m, std::vector<double> rhs, std::vector<double>& x) {
  const std::size_t n = rhs.size();
  double scale = 0.0;
  for (const auto& row : m) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) <= 1e-13 * scale) return false;
    std::swap(m[piv], m[c]);
    std::swap(rhs[piv], rhs[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double acc = rhs[c];
    for (std::size_t k = c + 1; k < n; ++k) acc -= m[c][k] * x[k];
    x[c] = acc / m[c][c];
  }
  return true;
}

inline double max_row(const Matrix& a, const std::vector<double>& y) {
  double z = 0.0;
  for (const auto& row : a) {
    double v = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) v += row[k] * y[k];
    z = std::max(z, v);
  }
  return z;
}

/// Optimal value by enumerating every (support, active rows) pair with
/// |support| = |active rows|; each nonsingular, feasible choice is a vertex
/// of the epigraph polytope, and a linear objective attains its minimum at
/// one of them. Solved on normalized data at total 1, then scaled back.
inline double vertex_min(const Matrix& raw, double total) {
  const std::size_t n = raw.size();
  double scale = 0.0;
  for (const auto& row : raw) {
    for (double v : row) scale = std::max(scale, v);
  }
  if (scale == 0.0) return 0.0;
  Matrix a = raw;
  for (auto& row : a) {
    for (double& v : row) v /= scale;
  }
  double best = std::numeric_limits<double>::infinity();
  for (unsigned support = 1; support < (1u << n); ++support) {
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < n; ++k) {
      if (support & (1u << k)) cols.push_back(k);
    }
    const std::size_t s = cols.size();
    for (unsigned active = 1; active < (1u << n); ++active) {
      if (static_cast<std::size_t>(__builtin_popcount(active)) != s) continue;
      // Unknowns: y over cols, then z.
      Matrix m;
      std::vector<double> rhs;
      for (std::size_t r = 0; r < n; ++r) {
        if (!(active & (1u << r))) continue;
        std::vector<double> row(s + 1);
        for (std::size_t j = 0; j < s; ++j) row[j] = a[r][cols[j]];
        row[s] = -1.0;
        m.push_back(row);
        rhs.push_back(0.0);
      }
      std::vector<double> sum(s + 1, 1.0);
      sum[s] = 0.0;
      m.push_back(sum);
      rhs.push_back(1.0);
      std::vector<double> x;
      if (!solve_linear(m, rhs, x)) continue;
      bool feasible = true;
      std::vector<double> y(n, 0.0);
      for (std::size_t j = 0; j < s; ++j) {
        if (x[j] < -1e-12) feasible = false;
        y[cols[j]] = std::max(0.0, x[j]);
      }
      if (!feasible) continue;
      const double z = max_row(a, y);
      best = std::min(best, z);
    }
  }
  return best * scale * total;
}

/// Minimum over the grid {y = total * g / steps : g integer, sum g = steps}.
inline double grid_min(const Matrix& a, double total, std::size_t steps) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0] * total;
  double best = std::numeric_limits<double>::infinity();
  const double h = total / static_cast<double>(steps);
  // acc[k][r]: row r summed over coordinates 1..k-1. Coordinate 0 takes
  // whatever is left.
  std::vector<std::vector<double>> acc(n + 1, std::vector<double>(n, 0.0));
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t left) {
    if (k == n - 1) {
      // Last free coordinate: coordinate 0 gets the rest.
      for (std::size_t v = 0; v <= left; ++v) {
        const double yk = h * static_cast<double>(v);
        const double y0 = h * static_cast<double>(left - v);
        double z = 0.0;
        for (std::size_t r = 0; r < n; ++r) z = std::max(z, acc[k][r] + a[r][k] * yk + a[r][0] * y0);
        best = std::min(best, z);
      }
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      const double yk = h * static_cast<double>(v);
      for (std::size_t r = 0; r < n; ++r) acc[k + 1][r] = acc[k][r] + a[r][k] * yk;
      rec(k + 1, left - v);
    }
  };
  rec(1, steps);
  return best;
}

}  // namespace oracle
