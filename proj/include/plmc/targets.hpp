#pragma once

// Potential-function interface and the built-in strongly convex targets.
// A target is a potential g with analytic gradient, strong-convexity constant
// m, gradient Lipschitz constant M, and minimizer x*; the sampler draws from
// pi proportional to exp(-g).

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plmc/linalg.hpp"

namespace plmc {

struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& what, double grad_norm)
      : std::runtime_error(what), final_grad_norm(grad_norm) {}
  double final_grad_norm;
};

struct TargetSpec {
  int dim = 0;
  double m = 0.0;  // strong convexity
  double M = 0.0;  // gradient Lipschitz bound, m <= M
  Eigen::VectorXd x_star;
  std::function<double(const Eigen::VectorXd&)> potential;
  // Gradient written into a caller-provided buffer; keeps hot loops
  // allocation-free.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> gradient_into;
  std::string id;
};

namespace detail {

inline void require_dim(const TargetSpec& t, const Eigen::VectorXd& x) {
  if (x.size() != t.dim)
    throw std::invalid_argument("dimension mismatch: target dim " +
                                std::to_string(t.dim) + ", point dim " +
                                std::to_string(x.size()));
}

// log(1 + e^u) without overflow.
inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

// 1 / (1 + e^-u) without overflow.
inline double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt_num(v[i]);
  }
  return s;
}

}  // namespace detail

inline double eval_potential(const TargetSpec& t, const Eigen::VectorXd& x) {
  detail::require_dim(t, x);
  return t.potential(x);
}

inline Eigen::VectorXd eval_gradient(const TargetSpec& t,
                                     const Eigen::VectorXd& x) {
  detail::require_dim(t, x);
  Eigen::VectorXd g(t.dim);
  t.gradient_into(x, g);
  return g;
}

// Two-component Gaussian mixture potential
//   g(x) = |x-a|^2/2 - log(1 + e^{-2 x'a}),
//   grad g(x) = x - a + 2a (1 + e^{2 x'a})^{-1},
// with m = 1 - |a|^2, M = 1, x* = 0 (g is even, so 0 is the minimizer).
inline TargetSpec mixture_gaussian_target(const Eigen::VectorXd& a) {
  if (a.size() < 1)
    throw std::invalid_argument("mixture target: empty direction vector");
  const double na2 = a.squaredNorm();
  if (!(na2 < 1.0))
    throw std::invalid_argument("mixture target requires |a| < 1");
  TargetSpec t;
  t.dim = static_cast<int>(a.size());
  t.m = 1.0 - na2;
  t.M = 1.0;
  t.x_star = Eigen::VectorXd::Zero(t.dim);
  t.potential = [a](const Eigen::VectorXd& x) {
    const double u = 2.0 * x.dot(a);
    // log(1 + e^{-u}) = softplus(-u)
    return 0.5 * (x - a).squaredNorm() - detail::softplus(-u);
  };
  t.gradient_into = [a](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double u = 2.0 * x.dot(a);
    // (1 + e^u)^{-1} = sigmoid(-u)
    const double w = 2.0 * detail::sigmoid(-u);
    g = x - a + w * a;
  };
  t.id = "mixture:a=" + detail::fmt_vec(a);
  return t;
}

// Gaussian-cosine potential g(x) = |x|^2/2 - lambda1 cos|x| with
// grad g(x) = x (1 - lambda1 sin|x|/|x|); the origin is a removable
// singularity handled by the series value.
inline TargetSpec gaussian_cosine_target(double lambda1, int p) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0))
    throw std::invalid_argument("gaussian-cosine target requires lambda1 in (0,1)");
  if (p < 1) throw std::invalid_argument("gaussian-cosine target: dim < 1");
  TargetSpec t;
  t.dim = p;
  t.m = 1.0 - lambda1;
  t.M = 1.0 + lambda1;
  t.x_star = Eigen::VectorXd::Zero(p);
  t.potential = [lambda1](const Eigen::VectorXd& x) {
    const double r = x.norm();
    return 0.5 * r * r - lambda1 * std::cos(r);
  };
  // d/dx of -lambda1 cos|x| is +lambda1 sin|x| x/|x|; sin|x|/|x| -> 1 at 0.
  t.gradient_into = [lambda1](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double r = x.norm();
    if (r < 1e-12) {
      g = (1.0 + lambda1) * x;
      return;
    }
    g = (1.0 + lambda1 * std::sin(r) / r) * x;
  };
  t.id = "gcos:lambda1=" + detail::fmt_num(lambda1) + ":dim=" + std::to_string(p);
  return t;
}

// Quadratic potential g(x) = (x-c)' A (x-c) / 2 for SPD A; exact Gaussian
// target used by the analytic oracles.
inline TargetSpec quadratic_target(const Eigen::MatrixXd& A,
                                   const Eigen::VectorXd& c) {
  if (A.rows() != c.size())
    throw std::invalid_argument("quadratic target: dimension mismatch");
  const SpectralBounds sb = spectral_bounds(A);
  TargetSpec t;
  t.dim = static_cast<int>(A.rows());
  t.m = sb.m_H;
  t.M = sb.M_H;
  t.x_star = c;
  Eigen::MatrixXd As = 0.5 * (A + A.transpose());
  t.potential = [As, c](const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - c;
    return 0.5 * d.dot(As * d);
  };
  t.gradient_into = [As, c](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.noalias() = As * (x - c);
  };
  t.id = "quadratic:dim=" + std::to_string(t.dim);
  return t;
}

inline TargetSpec quadratic_target(const Eigen::MatrixXd& A) {
  return quadratic_target(A, Eigen::VectorXd::Zero(A.rows()));
}

// Gradient descent with step 1/M from the origin; convergence is guaranteed
// by m-strong convexity.
inline Eigen::VectorXd find_minimizer(const TargetSpec& t, double tol,
                                      long long iter_cap = 5000000) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_minimizer: tol <= 0");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(t.dim);
  Eigen::VectorXd g(t.dim);
  const double step = 1.0 / t.M;
  for (long long it = 0; it < iter_cap; ++it) {
    t.gradient_into(x, g);
    if (g.norm() <= tol) return x;
    x -= step * g;
  }
  t.gradient_into(x, g);
  const double gn = g.norm();
  if (gn <= tol) return x;
  throw ConvergenceError("find_minimizer: iteration cap exceeded (|grad| = " +
                             detail::fmt_num(gn) + ")",
                         gn);
}

// Negative log posterior of the Bayesian logistic path model:
//   g(theta) = -sum_t (1 - y_t)(x_t'theta - cutoff)
//              + sum_t log(1 + exp(x_t'theta - cutoff)) + |theta|^2/(2 sigma2),
// where column t of X is the 0/1 path indicator x_t.  m = 1/sigma2,
// M = 1/sigma2 + lambda_max(X X')/4; x* is computed by gradient descent.
inline TargetSpec logistic_path_target(const Eigen::MatrixXd& X,
                                       const std::vector<int>& y,
                                       double cutoff, double sigma2) {
  const Eigen::Index E = X.rows();
  const Eigen::Index n = X.cols();
  if (E < 1) throw std::invalid_argument("logistic target: no edges");
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw std::invalid_argument("logistic target: |y| != number of observations");
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("logistic target: sigma2 <= 0");
  for (Eigen::Index i = 0; i < E; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (X(i, j) != 0.0 && X(i, j) != 1.0)
        throw std::invalid_argument("logistic target: design entries must be 0/1");
  for (int v : y)
    if (v != 0 && v != 1)
      throw std::invalid_argument("logistic target: responses must be 0/1");

  double lam_max = 0.0;
  if (n > 0) {
    const Eigen::MatrixXd XXt = X * X.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(XXt);
    lam_max = es.eigenvalues().maxCoeff();
  }
  TargetSpec t;
  t.dim = static_cast<int>(E);
  t.m = 1.0 / sigma2;
  t.M = 1.0 / sigma2 + 0.25 * lam_max;
  Eigen::VectorXd yv(n);
  for (Eigen::Index j = 0; j < n; ++j) yv[j] = static_cast<double>(y[j]);
  t.potential = [X, yv, cutoff, sigma2](const Eigen::VectorXd& th) {
    const Eigen::VectorXd u = X.transpose() * th;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      const double uj = u[j] - cutoff;
      acc += -(1.0 - yv[j]) * uj + detail::softplus(uj);
    }
    return acc + th.squaredNorm() / (2.0 * sigma2);
  };
  t.gradient_into = [X, yv, cutoff, sigma2](const Eigen::VectorXd& th,
                                            Eigen::VectorXd& g) {
    const Eigen::VectorXd u = X.transpose() * th;
    Eigen::VectorXd w(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j)
      w[j] = detail::sigmoid(u[j] - cutoff) - (1.0 - yv[j]);
    g.noalias() = X * w;
    g += th / sigma2;
  };
  t.id = "logistic:edges=" + std::to_string(E) + ":n=" + std::to_string(n) +
         ":cutoff=" + detail::fmt_num(cutoff) +
         ":sigma2=" + detail::fmt_num(sigma2);
  t.x_star = find_minimizer(t, 1e-10);
  return t;
}

}  // namespace plmc
