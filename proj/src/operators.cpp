#include "momsplit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

namespace momsplit {

// ---------------------------------------------------------------------------
// Projections

Vector project_box(const Vector& z, double lo, double hi) {
  if (lo > hi) throw ArgumentError("project_box: lo > hi");
  return z.cwiseMax(lo).cwiseMin(hi);
}

Vector project_nonneg(const Vector& z) { return z.cwiseMax(0.0); }

Vector project_capped_simplex(const Vector& z) {
  const Index n = z.size();
  if (n == 0) throw ArgumentError("project_capped_simplex: empty vector");
  if (n == 1) return Vector::Ones(1);

  // sum(clamp(z - tau, 0, 1)) is nonincreasing in tau; bracket and bisect.
  auto mass = [&z](double tau) { return (z.array() - tau).max(0.0).min(1.0).sum(); };
  double lo = z.minCoeff() - 1.0;  // every coordinate clamps to 1: mass n >= 1
  double hi = z.maxCoeff();        // every coordinate clamps to 0: mass 0 <= 1
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double tau = 0.5 * (lo + hi);

  // Solve for tau exactly on the active pattern identified by bisection.
  double free_sum = 0.0;
  Index free_count = 0;
  Index upper_count = 0;
  for (Index i = 0; i < n; ++i) {
    const double v = z[i] - tau;
    if (v >= 1.0) {
      ++upper_count;
    } else if (v > 0.0) {
      free_sum += z[i];
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum + static_cast<double>(upper_count) - 1.0) / static_cast<double>(free_count);
    // Keep the refinement only if it preserves the pattern.
    bool consistent = true;
    for (Index i = 0; i < n && consistent; ++i) {
      const double before = z[i] - tau;
      const double after = z[i] - exact;
      const bool was_free = before > 0.0 && before < 1.0;
      if (was_free && (after < 0.0 || after > 1.0)) consistent = false;
    }
    if (consistent) tau = exact;
  }
  return (z.array() - tau).max(0.0).min(1.0).matrix();
}

// ---------------------------------------------------------------------------
// Resolvent

Vector Resolvent::operator()(double gamma, const Vector& z) const {
  if (!eval) throw UnsupportedConfiguration("Resolvent: no Euclidean resolvent available for this operator");
  return eval(gamma, z);
}

Resolvent Resolvent::box(double lo, double hi) {
  if (lo > hi) throw ArgumentError("Resolvent::box: lo > hi");
  Resolvent r;
  r.eval = [lo, hi](double, const Vector& z) { return project_box(z, lo, hi); };
  r.eval_diag = [lo, hi](double, const Vector&, const Vector& z) { return project_box(z, lo, hi); };
  return r;
}

Resolvent Resolvent::nonneg() {
  Resolvent r;
  r.eval = [](double, const Vector& z) { return project_nonneg(z); };
  r.eval_diag = [](double, const Vector&, const Vector& z) { return project_nonneg(z); };
  return r;
}

Resolvent Resolvent::capped_simplex() {
  Resolvent r;
  r.eval = [](double, const Vector& z) { return project_capped_simplex(z); };
  return r;
}

Resolvent Resolvent::zero() {
  Resolvent r;
  r.eval = [](double, const Vector& z) { return z; };
  r.eval_diag = [](double, const Vector&, const Vector& z) { return z; };
  return r;
}

Resolvent Resolvent::product(Resolvent first, Index split, Resolvent second) {
  if (split < 0) throw ArgumentError("Resolvent::product: negative split");
  Resolvent r;
  if (first.eval && second.eval) {
    r.eval = [first, second, split](double gamma, const Vector& z) {
      if (z.size() < split) throw ArgumentError("Resolvent::product: vector shorter than split");
      Vector out(z.size());
      out.head(split) = first.eval(gamma, z.head(split));
      out.tail(z.size() - split) = second.eval(gamma, z.tail(z.size() - split));
      return out;
    };
  }
  if (first.eval_diag && second.eval_diag) {
    r.eval_diag = [first, second, split](double gamma, const Vector& s, const Vector& z) {
      if (z.size() < split) throw ArgumentError("Resolvent::product: vector shorter than split");
      const Index rest = z.size() - split;
      Vector out(z.size());
      out.head(split) = first.eval_diag(gamma, s.head(split), z.head(split));
      out.tail(rest) = second.eval_diag(gamma, s.tail(rest), z.tail(rest));
      return out;
    };
  }
  return r;
}

Resolvent Resolvent::shifted(Resolvent base, double rho) {
  if (rho < 0.0) throw ArgumentError("Resolvent::shifted: rho must be >= 0");
  // (Id + g(A + rho S))^-1 z = J_{g/(1+g rho) A}(z / (1 + g rho)), same form in either metric.
  Resolvent r;
  if (base.eval) {
    r.eval = [base, rho](double gamma, const Vector& z) {
      const double f = 1.0 + gamma * rho;
      return base.eval(gamma / f, z / f);
    };
  }
  if (base.eval_diag) {
    r.eval_diag = [base, rho](double gamma, const Vector& s, const Vector& z) {
      const double f = 1.0 + gamma * rho;
      return base.eval_diag(gamma / f, s, z / f);
    };
  }
  return r;
}

// ---------------------------------------------------------------------------
// Single-valued operators

SingleValuedOp SingleValuedOp::zero() {
  SingleValuedOp op;
  op.eval = [](const Vector& x) { return Vector::Zero(x.size()); };
  op.lipschitz_mu = 0.0;
  return op;
}

SingleValuedOp SingleValuedOp::scaled(const SingleValuedOp& op, double factor) {
  if (factor < 0.0) throw ArgumentError("SingleValuedOp::scaled: negative factor breaks monotonicity");
  SingleValuedOp out;
  auto f = op.eval;
  out.eval = [f, factor](const Vector& x) -> Vector { return factor * f(x); };
  out.lipschitz_mu = factor * op.lipschitz_mu;
  if (op.cocoercivity_beta && factor > 0.0) out.cocoercivity_beta = factor * *op.cocoercivity_beta;
  if (op.strong_rho) out.strong_rho = factor * *op.strong_rho;
  return out;
}

SingleValuedOp SingleValuedOp::sum(const SingleValuedOp& a, const SingleValuedOp& b) {
  SingleValuedOp out;
  auto fa = a.eval;
  auto fb = b.eval;
  out.eval = [fa, fb](const Vector& x) -> Vector { return fa(x) + fb(x); };
  out.lipschitz_mu = a.lipschitz_mu + b.lipschitz_mu;
  return out;
}

// ---------------------------------------------------------------------------
// Building blocks

std::pair<Vector, Vector> skew_saddle(const Matrix& D, const Vector& b, const Vector& x, const Vector& u) {
  if (x.size() != D.cols() || u.size() != D.rows() || b.size() != D.rows()) {
    throw ArgumentError("skew_saddle: shape mismatch");
  }
  Vector top = D.transpose() * u;
  Vector bottom = -(D * x) - b;
  return {std::move(top), std::move(bottom)};
}

Vector quad_grad(const Matrix& G, const Vector& b, const Vector& x) {
  if (x.size() != G.cols() || b.size() != G.rows()) throw ArgumentError("quad_grad: shape mismatch");
  Vector r = G * x - b;
  return G.transpose() * r;
}

namespace {

/// Largest eigenvalue of a PSD map self-adjoint in `inner`, by restarted
/// Lanczos with full reorthogonalization. Returns its square root.
NormEstimate power_iterate(const std::function<Vector(const Vector&)>& gram,
                           const std::function<double(const Vector&, const Vector&)>& inner, Index dim, double tol,
                           std::size_t max_iter) {
  if (!(tol > 0.0)) throw ArgumentError("operator_norm: tol must be > 0");
  NormEstimate est;
  if (dim == 0) {
    est.converged = true;
    return est;
  }
  std::mt19937_64 rng(0x5eed1234ULL);
  std::normal_distribution<double> nd;
  Vector start(dim);
  for (Index i = 0; i < dim; ++i) start[i] = nd(rng);

  const Index block = std::min<Index>(dim, 64);
  double theta = 0.0;
  while (est.iterations < max_iter) {
    std::vector<Vector> basis;
    Matrix T = Matrix::Zero(block, block);
    Vector q = start / std::sqrt(inner(start, start));
    Index m = 0;
    double beta_last = 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    while (m < block && est.iterations < max_iter) {
      basis.push_back(q);
      Vector w = gram(q);
      ++est.iterations;
      // Two passes of Gram-Schmidt keep the basis orthogonal to working precision.
      for (int pass = 0; pass < 2; ++pass) {
        for (Index j = 0; j <= m; ++j) {
          const double h = inner(basis[static_cast<std::size_t>(j)], w);
          if (pass == 0 && j == m) T(m, m) = h;
          if (pass == 1 && j == m) T(m, m) += h;
          w -= h * basis[static_cast<std::size_t>(j)];
        }
      }
      beta_last = std::sqrt(std::max(0.0, inner(w, w)));
      ++m;
      eig.compute(T.topLeftCorner(m, m));
      theta = std::max(0.0, eig.eigenvalues()[m - 1]);
      const double residual = beta_last * std::abs(eig.eigenvectors()(m - 1, m - 1));
      const double scale = std::max(theta, std::abs(T(0, 0)));
      if (scale == 0.0 && beta_last == 0.0) {
        est.value = 0.0;
        est.converged = true;
        return est;
      }
      // The Ritz pair is exact when the Krylov space is invariant.
      if (residual <= 0.5 * tol * theta || beta_last <= 1e-14 * std::max(scale, 1e-300) || m == dim) {
        est.value = std::sqrt(theta);
        est.converged = true;
        return est;
      }
      if (m < block) {
        T(m, m - 1) = T(m - 1, m) = beta_last;
        q = w / beta_last;
      }
    }
    // Restart from the current top Ritz vector.
    const Vector y = eig.eigenvectors().col(m - 1);
    start = Vector::Zero(dim);
    for (Index j = 0; j < m; ++j) start += y[j] * basis[static_cast<std::size_t>(j)];
  }
  est.value = std::sqrt(theta);
  return est;
}

}  // namespace

NormEstimate operator_norm(const VectorMap& apply, const VectorMap& apply_adjoint, Index dim, double tol,
                           std::size_t max_iter) {
  return power_iterate([&](const Vector& v) { return apply_adjoint(apply(v)); },
                       [](const Vector& a, const Vector& b) { return a.dot(b); }, dim, tol, max_iter);
}

NormEstimate operator_norm_in_metric(const VectorMap& apply, const VectorMap& apply_adjoint, const Metric& metric,
                                     double tol, std::size_t max_iter) {
  if (metric.is_identity()) return operator_norm(apply, apply_adjoint, metric.dim(), tol, max_iter);
  // K = S^-1 T^T S^-1 T is self-adjoint in <.,.>_S with top eigenvalue ||T||^2.
  return power_iterate(
      [&](const Vector& v) { return metric.apply_inv(apply_adjoint(metric.apply_inv(apply(v)))); },
      [&](const Vector& a, const Vector& b) { return s_inner(metric, a, b); }, metric.dim(), tol, max_iter);
}

NormEstimate operator_norm(const Matrix& m, double tol, std::size_t max_iter) {
  return operator_norm([&m](const Vector& v) -> Vector { return m * v; },
                       [&m](const Vector& v) -> Vector { return m.transpose() * v; }, m.cols(), tol, max_iter);
}

// ---------------------------------------------------------------------------
// Kernels

Kernel Kernel::custom(const Metric& metric, double gamma, VectorMap eval_M, VectorMap warped_resolvent,
                      double lipschitz_L) {
  if (!(gamma > 0.0)) throw ArgumentError("Kernel::custom: gamma must be > 0");
  if (!(lipschitz_L >= 0.0 && lipschitz_L < 1.0)) throw ArgumentError("Kernel::custom: L must lie in [0, 1)");
  Kernel k;
  k.gamma = gamma;
  k.lipschitz_L = lipschitz_L;
  k.eval_M = eval_M;
  k.warped_resolvent = std::move(warped_resolvent);
  k.correction = [metric, eval_M = std::move(eval_M), gamma](const Vector& x) -> Vector {
    return gamma * eval_M(x) - metric.apply(x);
  };
  return k;
}

Kernel kernel_classic(const Metric& metric, const Resolvent& A, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("kernel_classic: gamma must be > 0");
  Kernel k;
  k.gamma = gamma;
  k.lipschitz_L = 0.0;
  k.correction = [](const Vector& x) -> Vector { return Vector::Zero(x.size()); };
  if (metric.is_identity()) {
    k.eval_M = [gamma](const Vector& x) -> Vector { return x / gamma; };
    k.warped_resolvent = [A, gamma](const Vector& z) { return A(gamma, gamma * z); };
  } else if (metric.diagonal_entries()) {
    if (!A.eval_diag) {
      throw UnsupportedConfiguration("kernel_classic: operator has no diagonal-metric resolvent");
    }
    const Vector d = *metric.diagonal_entries();
    k.eval_M = [d, gamma](const Vector& x) -> Vector { return d.cwiseProduct(x) / gamma; };
    // S x / gamma + A x contains z  <=>  x = J^S_{gamma A}(gamma S^-1 z).
    k.warped_resolvent = [A, d, gamma](const Vector& z) { return A.eval_diag(gamma, d, gamma * z.cwiseQuotient(d)); };
  } else {
    throw UnsupportedConfiguration("kernel_classic: dense metrics need a user-supplied warped resolvent");
  }
  return k;
}

Kernel kernel_lipschitz_split(const Metric& metric, const Resolvent& A1, const SingleValuedOp& A2, double gamma) {
  if (!metric.is_identity()) throw UnsupportedConfiguration("kernel_lipschitz_split: requires the identity metric");
  if (!(gamma > 0.0)) throw ArgumentError("kernel_lipschitz_split: gamma must be > 0");
  Kernel k;
  k.gamma = gamma;
  k.lipschitz_L = gamma * A2.lipschitz_mu;
  auto a2 = A2.eval;
  k.eval_M = [a2, gamma](const Vector& x) -> Vector { return x / gamma - a2(x); };
  k.correction = [a2, gamma](const Vector& x) -> Vector { return -gamma * a2(x); };
  // (M + A1 + A2) x = x/gamma + A1 x, so (M + A)^-1 w = J_{gamma A1}(gamma w).
  k.warped_resolvent = [A1, gamma](const Vector& w) { return A1(gamma, gamma * w); };
  return k;
}

// ---------------------------------------------------------------------------
// Counting wrappers

SingleValuedOp counted(const SingleValuedOp& op, const EvalCounter& counter) {
  SingleValuedOp out = op;
  auto f = op.eval;
  auto c = counter.count;
  out.eval = [f, c](const Vector& x) {
    ++*c;
    return f(x);
  };
  return out;
}

Resolvent counted(const Resolvent& r, const EvalCounter& counter) {
  Resolvent out = r;
  auto c = counter.count;
  if (r.eval) {
    auto f = r.eval;
    out.eval = [f, c](double g, const Vector& z) {
      ++*c;
      return f(g, z);
    };
  }
  if (r.eval_diag) {
    auto f = r.eval_diag;
    out.eval_diag = [f, c](double g, const Vector& s, const Vector& z) {
      ++*c;
      return f(g, s, z);
    };
  }
  return out;
}

Kernel counted(const Kernel& k, const EvalCounter& resolvent_counter) {
  Kernel out = k;
  auto f = k.warped_resolvent;
  auto c = resolvent_counter.count;
  out.warped_resolvent = [f, c](const Vector& z) {
    ++*c;
    return f(z);
  };
  return out;
}

}  // namespace momsplit
