#pragma once

// Distances and analytic oracles: empirical 1-D Wasserstein-2, closed-form
// Gaussian W2, the discrete-Lyapunov stationary covariance of the
// linear-Gaussian chain, and histogram total variation.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "plmc/linalg.hpp"
#include "plmc/theory.hpp"

namespace plmc {

namespace detail {

inline void require_sorted(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw std::invalid_argument(std::string(name) + ": empty sample");
  if (!std::is_sorted(v.begin(), v.end()))
    throw std::invalid_argument(std::string(name) + ": sample not sorted");
}

}  // namespace detail

// Exact W2 between two equal-size empirical 1-D measures via the monotone
// coupling.  Unequal sizes are reduced to n = min(|a|,|b|) by evenly spaced
// quantiles of the larger sample.
inline double w2_empirical_1d(const std::vector<double>& a,
                              const std::vector<double>& b) {
  detail::require_sorted(a, "w2_empirical_1d: a");
  detail::require_sorted(b, "w2_empirical_1d: b");
  const std::size_t n = std::min(a.size(), b.size());
  const auto pick = [n](const std::vector<double>& s, std::size_t i) {
    const std::size_t idx =
        static_cast<std::size_t>((i + 0.5) * s.size() / n);
    return s[std::min(idx, s.size() - 1)];
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pick(a, i) - pick(b, i);
    acc += d * d;
  }
  return std::sqrt(acc / n);
}

// W2 between Gaussians:
// sqrt(|m1-m2|^2 + tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2})).
inline double w2_gaussian(const Eigen::VectorXd& m1, const Eigen::MatrixXd& S1,
                          const Eigen::VectorXd& m2,
                          const Eigen::MatrixXd& S2) {
  if (m1.size() != m2.size() || S1.rows() != m1.size() ||
      S2.rows() != m2.size())
    throw std::invalid_argument("w2_gaussian: dimension mismatch");
  const Eigen::MatrixXd r2 = sqrt_spd(S2);
  const Eigen::MatrixXd cross = sqrt_spd(r2 * S1 * r2);
  double tr = (S1 + S2 - 2.0 * cross).trace();
  if (tr < 0.0) tr = 0.0;  // roundoff guard; exact value is >= 0
  return std::sqrt((m1 - m2).squaredNorm() + tr);
}

// Stationary covariance of x_{k+1} = B x_k + noise, B = I - gamma H A,
// noise covariance 2 gamma H: fixed-point iteration on
// Sigma = B Sigma B' + 2 gamma H from Sigma_0 = 2 gamma H.
inline Eigen::MatrixXd stationary_covariance_oracle(const Eigen::MatrixXd& A,
                                                    const Eigen::MatrixXd& H,
                                                    double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("stationary covariance: gamma <= 0");
  if (A.rows() != H.rows())
    throw std::invalid_argument("stationary covariance: dimension mismatch");
  // Eigenvalues of HA equal those of H^{1/2} A H^{1/2}, so the spectral
  // radius of B is max |1 - gamma lambda_i| over that positive spectrum.
  const Eigen::MatrixXd Hs = sqrt_spd(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs * (0.5 * (A + A.transpose())) * Hs);
  if (es.info() != Eigen::Success)
    throw std::domain_error("stationary covariance: eigendecomposition failed");
  double sr = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    sr = std::max(sr, std::abs(1.0 - gamma * es.eigenvalues()[i]));
  if (sr >= 1.0)
    throw TheoryError("stationary covariance: unstable chain (spectral radius " +
                      std::to_string(sr) + " >= 1)");
  const Eigen::MatrixXd B =
      Eigen::MatrixXd::Identity(A.rows(), A.cols()) - gamma * H * A;
  const Eigen::MatrixXd Q = 2.0 * gamma * H;
  Eigen::MatrixXd S = Q;
  for (long long it = 0; it < 10000000; ++it) {
    Eigen::MatrixXd next = B * S * B.transpose() + Q;
    const double inc = (next - S).norm();
    S = std::move(next);
    if (inc <= 1e-12) {
      return 0.5 * (S + S.transpose());
    }
  }
  throw TheoryError("stationary covariance: fixed-point iteration stalled");
}

// Histogram total variation over shared bins on [lo, hi]; samples outside the
// range are clamped into the end bins.
inline double tv_histogram(const std::vector<double>& a,
                           const std::vector<double>& b, int bins, double lo,
                           double hi) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("tv_histogram: empty sample");
  if (bins < 2) throw std::invalid_argument("tv_histogram: bins < 2");
  if (!(lo < hi)) throw std::invalid_argument("tv_histogram: empty range");
  const auto counts = [&](const std::vector<double>& s) {
    std::vector<double> c(bins, 0.0);
    for (double v : s) {
      int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
      idx = std::clamp(idx, 0, bins - 1);
      c[idx] += 1.0;
    }
    for (double& v : c) v /= static_cast<double>(s.size());
    return c;
  };
  const std::vector<double> pa = counts(a);
  const std::vector<double> pb = counts(b);
  double acc = 0.0;
  for (int i = 0; i < bins; ++i) acc += std::abs(pa[i] - pb[i]);
  return 0.5 * acc;
}

inline double tv_histogram(const std::vector<double>& a,
                           const std::vector<double>& b, int bins) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("tv_histogram: empty sample");
  const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
  const auto [blo, bhi] = std::minmax_element(b.begin(), b.end());
  double lo = std::min(*alo, *blo);
  double hi = std::max(*ahi, *bhi);
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return tv_histogram(a, b, bins, lo, hi);
}

}  // namespace plmc
