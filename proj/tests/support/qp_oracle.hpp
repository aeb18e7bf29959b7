#pragma once

// Dense active-set solver for min 1/2 ||x - p||^2 s.t. C x <= d, used as the
// independent oracle certifying the Dykstra projection. Deliberately separate
// from the library implementation.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bwshare/types.hpp"

namespace oracle {

struct Constraints {
  std::vector<std::vector<double>> rows;  // C
  std::vector<double> bounds;             // d
};

// The sharing polytope as explicit inequalities.
inline Constraints omega_constraints(const bwshare::SystemConfig& cfg) {
  const int O = cfg.num_operators;
  const int R = cfg.num_regions;
  const size_t dim = static_cast<size_t>(R) * O * O;
  const auto entry = [O](int r, int j, int i) {
    return (static_cast<size_t>(r) * O + j) * O + i;
  };
  Constraints c;
  for (size_t e = 0; e < dim; ++e) {
    std::vector<double> row(dim, 0.0);
    row[e] = -1.0;
    c.rows.push_back(std::move(row));
    c.bounds.push_back(0.0);
  }
  for (int r = 0; r < R; ++r)
    for (int j = 0; j < O; ++j) {
      std::vector<double> row(dim, 0.0);
      for (int i = 0; i < O; ++i) row[entry(r, j, i)] = 1.0;
      c.rows.push_back(std::move(row));
      c.bounds.push_back(static_cast<double>(cfg.slots_per_period));
    }
  for (int i = 0; i < O; ++i)
    for (int j = i + 1; j < O; ++j) {
      std::vector<double> plus(dim, 0.0);
      for (int r = 0; r < R; ++r) {
        plus[entry(r, j, i)] = 1.0;
        plus[entry(r, i, j)] = -1.0;
      }
      std::vector<double> minus = plus;
      for (double& v : minus) v = -v;
      c.rows.push_back(std::move(plus));
      c.bounds.push_back(cfg.balance_bound);
      c.rows.push_back(std::move(minus));
      c.bounds.push_back(cfg.balance_bound);
    }
  return c;
}

// Gaussian elimination with partial pivoting; returns false on a singular
// system.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
  const size_t n = a.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t row = col + 1; row < n; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (std::abs(a[pivot][col]) < 1e-11) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (size_t row = col + 1; row < n; ++row) {
      const double f = a[row][col] / a[col][col];
      for (size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (size_t row = n; row-- > 0;) {
    double s = b[row];
    for (size_t k = row + 1; k < n; ++k) s -= a[row][k] * out[k];
    out[row] = s / a[row][row];
  }
  return true;
}

struct QpResult {
  std::vector<double> x;
  std::vector<double> multipliers;  // per constraint, 0 when inactive
};

// Primal active-set iteration starting from a feasible point.
inline QpResult project_qp(const std::vector<double>& point, const Constraints& c,
                           const std::vector<double>& feasible_start) {
  const size_t dim = point.size();
  const size_t m = c.rows.size();
  std::vector<double> x = feasible_start;
  std::vector<size_t> working;

  const auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t e = 0; e < a.size(); ++e) s += a[e] * b[e];
    return s;
  };

  for (int iter = 0; iter < 2000; ++iter) {
    // Equality-constrained step: x* = p - C_W^T mu with
    // (C_W C_W^T) mu = C_W p - d_W.
    const size_t w = working.size();
    std::vector<double> target(dim);
    std::vector<double> mu(w, 0.0);
    bool solved = true;
    if (w > 0) {
      std::vector<std::vector<double>> gram(w, std::vector<double>(w, 0.0));
      std::vector<double> rhs(w, 0.0);
      for (size_t a = 0; a < w; ++a) {
        for (size_t b = 0; b < w; ++b)
          gram[a][b] = dot(c.rows[working[a]], c.rows[working[b]]);
        rhs[a] = dot(c.rows[working[a]], point) - c.bounds[working[a]];
      }
      solved = solve_linear(gram, rhs, mu);
    }
    if (!solved) {
      // Degenerate working set: drop the last added constraint and retry.
      working.pop_back();
      continue;
    }
    for (size_t e = 0; e < dim; ++e) target[e] = point[e];
    for (size_t a = 0; a < w; ++a)
      for (size_t e = 0; e < dim; ++e) target[e] -= mu[a] * c.rows[working[a]][e];

    std::vector<double> dx(dim);
    double step_norm = 0.0;
    for (size_t e = 0; e < dim; ++e) {
      dx[e] = target[e] - x[e];
      step_norm = std::max(step_norm, std::abs(dx[e]));
    }

    if (step_norm < 1e-12) {
      // At the working-set minimizer: optimal unless a multiplier is negative.
      double most_negative = -1e-10;
      size_t drop = w;
      for (size_t a = 0; a < w; ++a)
        if (mu[a] < most_negative) {
          most_negative = mu[a];
          drop = a;
        }
      if (drop == w) {
        QpResult result;
        result.x = x;
        result.multipliers.assign(m, 0.0);
        for (size_t a = 0; a < w; ++a) result.multipliers[working[a]] = mu[a];
        return result;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    size_t blocking = m;
    for (size_t row = 0; row < m; ++row) {
      bool in_working = false;
      for (size_t a : working)
        if (a == row) in_working = true;
      if (in_working) continue;
      const double advance = dot(c.rows[row], dx);
      if (advance <= 1e-12) continue;
      const double room = c.bounds[row] - dot(c.rows[row], x);
      const double limit = room / advance;
      if (limit < alpha) {
        alpha = std::max(limit, 0.0);
        blocking = row;
      }
    }
    for (size_t e = 0; e < dim; ++e) x[e] += alpha * dx[e];
    if (blocking != m) working.push_back(blocking);
  }
  throw std::runtime_error("qp oracle did not converge");
}

// Convenience wrapper for the sharing polytope; starts from the always
// feasible no-sharing matrix.
inline bwshare::SharingMatrix project_omega_qp(const bwshare::SharingMatrix& point,
                                               const bwshare::SystemConfig& cfg) {
  const Constraints constraints = omega_constraints(cfg);
  const bwshare::SharingMatrix start = bwshare::SharingMatrix::no_sharing(cfg);
  const QpResult result = project_qp(point.data(), constraints, start.data());
  bwshare::SharingMatrix out(cfg.num_regions, cfg.num_operators, 0.0);
  out.data() = result.x;

  // Sanity: the oracle's own KKT conditions must hold before it certifies
  // anything else.
  const size_t dim = result.x.size();
  std::vector<double> grad(dim);
  for (size_t e = 0; e < dim; ++e) grad[e] = result.x[e] - point.data()[e];
  for (size_t row = 0; row < constraints.rows.size(); ++row) {
    const double mu = result.multipliers[row];
    if (mu < -1e-8) throw std::logic_error("qp oracle: negative multiplier");
    double slack = constraints.bounds[row];
    for (size_t e = 0; e < dim; ++e) slack -= constraints.rows[row][e] * result.x[e];
    if (slack < -1e-7) throw std::logic_error("qp oracle: infeasible result");
    if (mu > 1e-8 && slack > 1e-6) throw std::logic_error("qp oracle: slack complementarity");
    for (size_t e = 0; e < dim; ++e) grad[e] += mu * constraints.rows[row][e];
  }
  for (size_t e = 0; e < dim; ++e)
    if (std::abs(grad[e]) > 1e-6) throw std::logic_error("qp oracle: stationarity failed");
  return out;
}

}  // namespace oracle
