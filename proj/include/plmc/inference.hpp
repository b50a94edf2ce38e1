#pragma once

// Chain-output inference: spatial averages, non-overlapping batch-means
// variance estimation, one-dimensional projection confidence intervals, and a
// Kolmogorov-Smirnov normality diagnostic for replicate averages.  The CI
// estimand is the stationary-distribution functional of the discrete chain
// (integral of f under pi_gamma), not the potential's minimizer.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "plmc/sampler.hpp"
#include "plmc/stats.hpp"

namespace plmc {

inline double spatial_average(const Trajectory& traj,
                              const std::function<double(
                                  const Eigen::VectorXd&)>& f) {
  const long long k = traj.rows();
  if (k < 1) throw std::invalid_argument("spatial_average: empty trajectory");
  double acc = 0.0;
  for (long long i = 0; i < k; ++i) acc += f(traj.samples.row(i));
  return acc / static_cast<double>(k);
}

// Means of n_batches non-overlapping batches of size floor(k/n_batches);
// the trailing remainder is dropped.
inline std::vector<double> batch_means(const Trajectory& traj,
                                       const std::function<double(
                                           const Eigen::VectorXd&)>& f,
                                       int n_batches) {
  if (n_batches < 2)
    throw std::invalid_argument("batch_means: need n_batches >= 2");
  const long long k = traj.rows();
  if (k < 2 * static_cast<long long>(n_batches))
    throw std::invalid_argument("batch_means: trajectory shorter than 2 batches");
  const long long bs = k / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (int b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (long long i = b * bs; i < (b + 1) * bs; ++i)
      acc += f(traj.samples.row(i));
    means[b] = acc / static_cast<double>(bs);
  }
  return means;
}

// Non-overlapping batch-means estimate of the asymptotic standard deviation
// sigma(f, pi_gamma): sigma^2 = batch_size * sample variance of the means.
inline double batch_means_sigma(const Trajectory& traj,
                                const std::function<double(
                                    const Eigen::VectorXd&)>& f,
                                int n_batches) {
  const std::vector<double> means = batch_means(traj, f, n_batches);
  const long long bs = traj.rows() / n_batches;
  double mu = 0.0;
  for (double v : means) mu += v;
  mu /= n_batches;
  double var = 0.0;
  for (double v : means) var += (v - mu) * (v - mu);
  var /= (n_batches - 1);
  return std::sqrt(static_cast<double>(bs) * var);
}

struct ProjectionCI {
  Eigen::VectorXd u;
  double point_estimate = 0.0;
  double sigma_hat = 0.0;
  double level = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  long long k = 0;
  bool degenerate = false;  // sigma_hat == 0
};

// CI for the stationary mean of f(x) = M_H^{-1/2} <u, x - x*> at the given
// coverage level; u must arrive as a unit vector (no silent normalization).
inline ProjectionCI projection_ci(const Trajectory& traj,
                                  const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& x_star, double M_H,
                                  double level, int n_batches) {
  if (std::abs(u.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("projection_ci: u is not a unit vector");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("projection_ci: level outside (0,1)");
  if (u.size() != traj.samples.cols() || x_star.size() != u.size())
    throw std::invalid_argument("projection_ci: dimension mismatch");
  if (!(M_H > 0.0)) throw std::invalid_argument("projection_ci: M_H <= 0");
  const double scale = 1.0 / std::sqrt(M_H);
  const auto f = [&](const Eigen::VectorXd& x) {
    return scale * u.dot(x - x_star);
  };
  ProjectionCI ci;
  ci.u = u;
  ci.level = level;
  ci.k = traj.rows();
  const double point = spatial_average(traj, f);
  ci.sigma_hat = batch_means_sigma(traj, f, n_batches);
  ci.degenerate = ci.sigma_hat == 0.0;
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double half = z * ci.sigma_hat / std::sqrt(static_cast<double>(ci.k));
  ci.lo = point - half;
  ci.hi = point + half;
  // Midpoint of the rounded endpoints, so lo + hi == 2 * point_estimate holds
  // exactly in floating point.
  ci.point_estimate = 0.5 * (ci.lo + ci.hi);
  return ci;
}

struct NormalityDiagnostic {
  double ks = 0.0;
  double critical = 0.0;  // 1.36 / sqrt(n), asymptotic 5% value
  bool pass = false;
};

// Standardizes the replicate averages by their sample mean/SD and compares
// the empirical CDF with the standard normal.
inline NormalityDiagnostic normality_diagnostic(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n < 100)
    throw std::invalid_argument("normality_diagnostic: need at least 100 values");
  double mu = 0.0;
  for (double v : values) mu += v;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - mu) * (v - mu);
  var /= static_cast<double>(n - 1);
  if (var == 0.0)
    throw std::invalid_argument("normality_diagnostic: degenerate (constant) inputs");
  const double sd = std::sqrt(var);
  for (double& v : values) v = (v - mu) / sd;
  std::sort(values.begin(), values.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = normal_cdf(values[i]);
    ks = std::max(ks, std::max((i + 1.0) / n - c, c - static_cast<double>(i) / n));
  }
  NormalityDiagnostic out;
  out.ks = ks;
  out.critical = 1.36 / std::sqrt(static_cast<double>(n));
  out.pass = ks < out.critical;
  return out;
}

}  // namespace plmc
