#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Projection onto {x : sum x = 1, 0 <= x <= 1} by trying every
/// lower/free/upper pattern (3^n) and keeping the closest feasible point.
inline VectorXd capped_simplex_enumeration(const VectorXd& z) {
  const int n = static_cast<int>(z.size());
  int patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;
  VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> state(n);
  for (int p = 0; p < patterns; ++p) {
    int code = p;
    int n_free = 0, n_upper = 0;
    double free_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      state[i] = code % 3;
      code /= 3;
      if (state[i] == 1) {
        ++n_free;
        free_sum += z[i];
      } else if (state[i] == 2) {
        ++n_upper;
      }
    }
    VectorXd x(n);
    if (n_free == 0) {
      if (n_upper != 1) continue;
      for (int i = 0; i < n; ++i) x[i] = state[i] == 2 ? 1.0 : 0.0;
    } else {
      const double tau = (free_sum + n_upper - 1.0) / n_free;
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        x[i] = state[i] == 0 ? 0.0 : state[i] == 2 ? 1.0 : z[i] - tau;
        ok = x[i] >= -1e-12 && x[i] <= 1.0 + 1e-12;
      }
      if (!ok) continue;
    }
    const double d = (x - z).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  }
  return best;
}

/// min 1/2 x'Hx + c'x  s.t.  Aeq x = beq, Ain x <= bin, by enumerating every
/// active subset of the inequalities and solving the KKT system of each.
/// Suitable for a handful of variables and at most ~20 inequalities.
struct QpSolution {
  VectorXd x;
  double objective = 0.0;
};

inline std::optional<QpSolution> qp_active_set_enumeration(const MatrixXd& H, const VectorXd& c, const MatrixXd& Aeq,
                                                           const VectorXd& beq, const MatrixXd& Ain,
                                                           const VectorXd& bin) {
  const int n = static_cast<int>(H.rows());
  const int me = static_cast<int>(Aeq.rows());
  const int mi = static_cast<int>(Ain.rows());
  std::optional<QpSolution> best;
  for (long mask = 0; mask < (1L << mi); ++mask) {
    std::vector<int> active;
    for (int i = 0; i < mi; ++i) {
      if (mask & (1L << i)) active.push_back(i);
    }
    const int m = me + static_cast<int>(active.size());
    if (m > n) continue;
    MatrixXd K = MatrixXd::Zero(n + m, n + m);
    VectorXd rhs(n + m);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -c;
    for (int r = 0; r < me; ++r) {
      K.block(n + r, 0, 1, n) = Aeq.row(r);
      K.block(0, n + r, n, 1) = Aeq.row(r).transpose();
      rhs[n + r] = beq[r];
    }
    for (int r = 0; r < static_cast<int>(active.size()); ++r) {
      K.block(n + me + r, 0, 1, n) = Ain.row(active[r]);
      K.block(0, n + me + r, n, 1) = Ain.row(active[r]).transpose();
      rhs[n + me + r] = bin[active[r]];
    }
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const VectorXd sol = lu.solve(rhs);
    const VectorXd x = sol.head(n);
    bool ok = mi == 0 || (Ain * x - bin).maxCoeff() <= 1e-10;
    for (int r = 0; r < static_cast<int>(active.size()) && ok; ++r) ok = sol[n + me + r] >= -1e-10;
    if (!ok) continue;
    const double f = 0.5 * x.dot(H * x) + c.dot(x);
    if (!best || f < best->objective) best = QpSolution{x, f};
  }
  return best;
}

/// Central-difference gradient.
inline VectorXd finite_difference_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                                           double h = 1e-5) {
  VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Largest singular value from a dense symmetric eigendecomposition of M'M.
inline double spectral_norm(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M.transpose() * M, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace oracle
