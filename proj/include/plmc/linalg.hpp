#pragma once

// Dense SPD helpers: symmetric square root, spectral bounds, spectral norm.

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace plmc {

struct SpectralBounds {
  double m_H;        // smallest eigenvalue
  double M_H;        // largest eigenvalue
  double kappa_star; // m_H / M_H
};

namespace detail {

inline void require_symmetric(const Eigen::MatrixXd& A, double tol = 1e-12) {
  if (A.rows() != A.cols())
    throw std::domain_error("matrix is not square");
  const double dev = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (dev > tol)
    throw std::domain_error("matrix is not symmetric (max asymmetry " +
                            std::to_string(dev) + ")");
}

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_sym(
    const Eigen::MatrixXd& A) {
  require_symmetric(A);
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw std::domain_error("eigendecomposition failed");
  return es;
}

}  // namespace detail

// Extreme eigenvalues of an SPD matrix; rejects non-PD input.
inline SpectralBounds spectral_bounds(const Eigen::MatrixXd& A) {
  const auto es = detail::eigen_sym(A);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0)
    throw std::domain_error("matrix is not positive definite (eigenvalue " +
                            std::to_string(lo) + ")");
  return {lo, hi, lo / hi};
}

// SPD square root via symmetric eigendecomposition: A = Q L Q', B = Q L^1/2 Q'.
inline Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& A) {
  const auto es = detail::eigen_sym(A);
  const double lo = es.eigenvalues().minCoeff();
  if (lo <= 0.0)
    throw std::domain_error("matrix is not positive definite (eigenvalue " +
                            std::to_string(lo) + ")");
  const Eigen::MatrixXd B = es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().asDiagonal() *
                            es.eigenvectors().transpose();
  return 0.5 * (B + B.transpose());
}

// Inverse of an SPD matrix through the same eigendecomposition.
inline Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& A) {
  const auto es = detail::eigen_sym(A);
  const double lo = es.eigenvalues().minCoeff();
  if (lo <= 0.0)
    throw std::domain_error("matrix is not positive definite (eigenvalue " +
                            std::to_string(lo) + ")");
  const Eigen::MatrixXd B = es.eigenvectors() *
                            es.eigenvalues().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
  return 0.5 * (B + B.transpose());
}

// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
inline double spectral_norm_sym(const Eigen::MatrixXd& A) {
  const auto es = detail::eigen_sym(A);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace plmc
