#pragma once

// Preconditioners: fixed SPD matrices (including the AR(1) Toeplitz family)
// and spatially varying maps with declared global bounds m_H, M_H and the
// inverse-Lipschitz parameter beta.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "plmc/linalg.hpp"
#include "plmc/philox.hpp"
#include "plmc/targets.hpp"

namespace plmc {

struct FixedPreconditioner {
  Eigen::MatrixXd H;
  Eigen::MatrixXd H_sqrt;
  Eigen::MatrixXd H_inv;
  double m_H = 1.0;
  double M_H = 1.0;
  double kappa_star = 1.0;
  bool is_identity = false;
  std::string id;

  int dim() const { return static_cast<int>(H.rows()); }
};

// A spatial map carries declared (not inferred) bounds: a sup over all pairs
// is not computable, so beta is the caller's analytic value and
// estimate_beta only sanity-checks it from below.
struct SpatialPreconditioner {
  int dim = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> H_at;
  double m_H = 1.0;
  double M_H = 1.0;
  double beta = 0.0;
  std::string id;
};

using Preconditioner = std::variant<FixedPreconditioner, SpatialPreconditioner>;

inline FixedPreconditioner make_fixed(const Eigen::MatrixXd& H,
                                      std::string id = "fixed") {
  FixedPreconditioner p;
  const SpectralBounds sb = spectral_bounds(H);  // validates symmetry and PD
  p.H = 0.5 * (H + H.transpose());
  p.H_sqrt = sqrt_spd(p.H);
  p.H_inv = inverse_spd(p.H);
  p.m_H = sb.m_H;
  p.M_H = sb.M_H;
  p.kappa_star = sb.kappa_star;
  p.is_identity =
      (p.H - Eigen::MatrixXd::Identity(p.H.rows(), p.H.cols()))
          .cwiseAbs()
          .maxCoeff() == 0.0;
  p.id = std::move(id);
  return p;
}

inline FixedPreconditioner identity_precond(int p) {
  if (p < 1) throw std::invalid_argument("identity preconditioner: dim < 1");
  return make_fixed(Eigen::MatrixXd::Identity(p, p), "identity");
}

struct AR1Preconditioner {
  double rho = 0.0;
  int dim = 0;
  FixedPreconditioner fixed;
};

// Toeplitz matrix with entries rho^|i-j|; SPD for |rho| < 1.  Eigen-extremes
// are computed numerically.
inline AR1Preconditioner build_ar1(double rho, int p) {
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("ar1 preconditioner requires |rho| < 1");
  if (p < 1) throw std::invalid_argument("ar1 preconditioner: dim < 1");
  Eigen::MatrixXd H(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) H(i, j) = std::pow(rho, std::abs(i - j));
  AR1Preconditioner out;
  out.rho = rho;
  out.dim = p;
  out.fixed = make_fixed(H, "ar1:" + detail::fmt_num(rho));
  return out;
}

inline int precond_dim(const Preconditioner& P) {
  return std::visit([](const auto& p) {
    if constexpr (std::is_same_v<std::decay_t<decltype(p)>,
                                 FixedPreconditioner>)
      return p.dim();
    else
      return p.dim;
  }, P);
}

inline double precond_m_H(const Preconditioner& P) {
  return std::visit([](const auto& p) { return p.m_H; }, P);
}

inline double precond_M_H(const Preconditioner& P) {
  return std::visit([](const auto& p) { return p.M_H; }, P);
}

inline double precond_beta(const Preconditioner& P) {
  if (std::holds_alternative<FixedPreconditioner>(P)) return 0.0;
  return std::get<SpatialPreconditioner>(P).beta;
}

inline const std::string& precond_id(const Preconditioner& P) {
  return std::visit([](const auto& p) -> const std::string& { return p.id; },
                    P);
}

// V~(x) = (x - x*)' H(x)^-1 (x - x*) + 1, the drift function of the
// ergodicity analysis.
inline double v_tilde(const Preconditioner& P, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& x_star) {
  const Eigen::VectorXd d = x - x_star;
  if (const auto* f = std::get_if<FixedPreconditioner>(&P))
    return d.dot(f->H_inv * d) + 1.0;
  const auto& s = std::get<SpatialPreconditioner>(P);
  const Eigen::MatrixXd H = s.H_at(x);
  return d.dot(H.llt().solve(d)) + 1.0;
}

// Monte-Carlo lower estimate of sup-pair M_H * |H^-1(x) - H^-1(y)|_2 over
// pairs drawn uniformly from the origin-centred ball; diagnostic only.
inline double estimate_beta(const SpatialPreconditioner& s, int n_pairs,
                            double radius, std::uint64_t seed = 0) {
  if (n_pairs < 1) throw std::invalid_argument("estimate_beta: n_pairs < 1");
  if (!(radius > 0.0)) throw std::invalid_argument("estimate_beta: radius <= 0");
  const int p = s.dim;
  NoiseSource ns(seed, 0);
  Eigen::VectorXd z(p);
  const auto draw = [&](std::uint64_t step, bool second) {
    ns.fill_normals(step, z);
    double nz = z.norm();
    if (nz == 0.0) nz = 1.0;
    const double u = ns.uniform(step, second ? 1 : 0);
    return Eigen::VectorXd(radius * std::pow(u, 1.0 / p) / nz * z);
  };
  double best = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const Eigen::VectorXd x = draw(2 * static_cast<std::uint64_t>(i), false);
    const Eigen::VectorXd y = draw(2 * static_cast<std::uint64_t>(i) + 1, true);
    const Eigen::MatrixXd d = inverse_spd(s.H_at(x)) - inverse_spd(s.H_at(y));
    best = std::max(best, s.M_H * spectral_norm_sym(d));
  }
  return best;
}

}  // namespace plmc
