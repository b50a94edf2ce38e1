#pragma once

// Explicit constants of the ergodicity and Wasserstein-plan analysis:
// admissible step-size interval, drift constants, small set and minorization
// constant, geometric rate bound with its free-parameter grid search, total
// variation bound, and the W2 sampling plan (horizon, constants, step cap).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plmc/philox.hpp"
#include "plmc/precond.hpp"
#include "plmc/stats.hpp"
#include "plmc/targets.hpp"

namespace plmc {

// Infeasibility of a theoretical hypothesis (as opposed to malformed input).
struct TheoryError : std::domain_error {
  using std::domain_error::domain_error;
};

// kappa = m*m_H ("appendix", conservative default) or 2*m*m_H ("text").
enum class KappaConvention { appendix, text };

inline const char* kappa_convention_name(KappaConvention c) {
  return c == KappaConvention::text ? "text" : "appendix";
}

inline KappaConvention parse_kappa_convention(const std::string& s) {
  if (s == "text") return KappaConvention::text;
  if (s == "appendix") return KappaConvention::appendix;
  throw std::invalid_argument("kappa convention must be 'text' or 'appendix'");
}

struct ProblemConstants {
  double m = 0.0;
  double M = 0.0;
  double m_H = 0.0;
  double M_H = 0.0;
  double beta = 0.0;
  int p = 0;
  double kappa = 0.0;
  double kappa_star = 0.0;
  KappaConvention convention = KappaConvention::appendix;
};

// Pairs a target with a preconditioner and validates the beta condition
// beta/(1+beta) < (m m_H / (M M_H))^2 required by the ergodicity hypotheses.
inline ProblemConstants make_problem_constants(
    const TargetSpec& target, const Preconditioner& precond,
    KappaConvention convention = KappaConvention::appendix) {
  ProblemConstants pc;
  pc.m = target.m;
  pc.M = target.M;
  pc.p = target.dim;
  pc.m_H = precond_m_H(precond);
  pc.M_H = precond_M_H(precond);
  pc.beta = precond_beta(precond);
  pc.convention = convention;
  if (!(pc.m > 0.0 && pc.M >= pc.m))
    throw std::invalid_argument("problem constants: need 0 < m <= M");
  if (!(pc.m_H > 0.0 && pc.M_H >= pc.m_H))
    throw std::invalid_argument("problem constants: need 0 < m_H <= M_H");
  if (pc.beta < 0.0)
    throw std::invalid_argument("problem constants: beta < 0");
  if (precond_dim(precond) != target.dim)
    throw std::invalid_argument("problem constants: dimension mismatch");
  const double q = pc.m * pc.m_H / (pc.M * pc.M_H);
  if (!(pc.beta / (1.0 + pc.beta) < q * q))
    throw TheoryError(
        "beta condition violated: beta/(1+beta) must be < (m m_H / (M M_H))^2");
  pc.kappa = (convention == KappaConvention::text ? 2.0 : 1.0) * pc.m * pc.m_H;
  pc.kappa_star = pc.m_H / pc.M_H;
  return pc;
}

// Open interval of admissible step sizes: the two roots of
// (1+beta)(1 - 2 gamma m m_H + gamma^2 M_H^2 M^2) = 1.  For beta = 0 this is
// (0, 2 m m_H / (M_H^2 M^2)).
inline std::pair<double, double> gamma_interval(const ProblemConstants& pc) {
  const double s = pc.m * pc.m_H;
  const double a = pc.M_H * pc.M_H * pc.M * pc.M;
  const double disc = s * s - a * pc.beta / (1.0 + pc.beta);
  if (disc < 0.0)
    throw TheoryError(
        "no admissible step size: beta/(1+beta) exceeds (m m_H / (M M_H))^2");
  const double root = std::sqrt(disc);
  return {(s - root) / a, (s + root) / a};
}

struct DriftConstants {
  double lambda_tilde;  // drift factor, < 1 inside the admissible interval
  double b;             // drift offset 2(1+beta) p gamma
  double b_tilde;       // b + 1 - lambda_tilde
};

inline DriftConstants drift_constants(const ProblemConstants& pc,
                                      double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("drift constants: gamma <= 0");
  const double a = pc.M_H * pc.M_H * pc.M * pc.M;
  const double lt =
      (1.0 + pc.beta) * (1.0 - 2.0 * gamma * pc.m * pc.m_H + gamma * gamma * a);
  if (!(lt < 1.0))
    throw TheoryError(
        "lambda_tilde >= 1: gamma lies outside the admissible interval");
  DriftConstants d;
  d.lambda_tilde = lt;
  d.b = 2.0 * (1.0 + pc.beta) * pc.p * gamma;
  d.b_tilde = d.b + 1.0 - lt;
  return d;
}

// Radius of the bounding ball of the small set C = {V~ <= 2 b~/(alpha - l~)}.
inline double small_set_radius(const ProblemConstants& pc,
                               const DriftConstants& d, double alpha) {
  if (!(alpha > d.lambda_tilde && alpha < 1.0))
    throw TheoryError("alpha must lie in (lambda_tilde, 1)");
  const double level = 2.0 * d.b_tilde / (alpha - d.lambda_tilde);
  return std::sqrt(pc.M_H * (level - 1.0));
}

struct ErgodicityReport {
  double gamma = 0.0;
  double lambda_tilde = 0.0;
  double b = 0.0;
  double b_tilde = 0.0;
  double alpha = 0.0;
  double small_set_radius = 0.0;
  double mu_leb_C = 0.0;
  double mu_leb_se = 0.0;
  double eta = 0.0;
  double r = 0.0;
  double d = 0.0;
  double rho = 0.0;
};

struct MuLebEstimate {
  double value = 0.0;
  double se = 0.0;
  double accepted_fraction = 0.0;
  bool degenerate = false;
};

// Uniform rejection estimate of the Lebesgue measure of the small set C:
// sample the bounding ball around x*, accept where V~ <= 2 b~/(alpha - l~).
inline MuLebEstimate estimate_mu_leb(const ProblemConstants& pc,
                                     const ErgodicityReport& rep,
                                     const TargetSpec& target,
                                     const Preconditioner& precond,
                                     int n_samples, std::uint64_t seed) {
  if (rep.small_set_radius <= 0.0) return {0.0, 0.0, 0.0, true};
  if (n_samples < 1000)
    throw std::invalid_argument("estimate_mu_leb: need n_samples >= 1000");
  const int p = pc.p;
  const double level = 2.0 * rep.b_tilde / (rep.alpha - rep.lambda_tilde);
  const double vol = ball_volume(p, rep.small_set_radius);
  NoiseSource ns(seed, 0);
  Eigen::VectorXd z(p), x(p);
  long long acc = 0;
  for (int i = 0; i < n_samples; ++i) {
    const auto s = static_cast<std::uint64_t>(i);
    ns.fill_normals(s, z);
    double nz = z.norm();
    if (nz == 0.0) nz = 1.0;
    const double scale =
        rep.small_set_radius * std::pow(ns.uniform(s, 0), 1.0 / p) / nz;
    x = target.x_star + scale * z;
    if (v_tilde(precond, x, target.x_star) <= level) ++acc;
  }
  const double phat = static_cast<double>(acc) / n_samples;
  MuLebEstimate out;
  out.value = vol * phat;
  out.se = vol * std::sqrt(phat * (1.0 - phat) / n_samples);
  out.accepted_fraction = phat;
  return out;
}

// Explicit minorization constant,
//   eta = mu_Leb(C) / ((2 pi)^{p/2} M_H^{p/2})
//         * exp{-(L-1)(M_H/m_H + M M_H + M_H^2 M^2/2) - |x*|^2/m_H
//               - M |x*| sqrt(M_H (L-1))}
// with L = 2 b~/(alpha - l~).
inline double eta_lower_bound(const ProblemConstants& pc,
                              const ErgodicityReport& rep,
                              double x_star_norm) {
  if (!(rep.alpha > rep.lambda_tilde))
    throw TheoryError("eta: alpha must exceed lambda_tilde");
  const double level = 2.0 * rep.b_tilde / (rep.alpha - rep.lambda_tilde);
  if (!(level >= 1.0)) throw TheoryError("eta: small-set level below 1");
  const double ex = level - 1.0;
  const double a = pc.M_H * pc.M_H * pc.M * pc.M;
  const double expo = -ex * (pc.M_H / pc.m_H + pc.M * pc.M_H + 0.5 * a) -
                      x_star_norm * x_star_norm / pc.m_H -
                      pc.M * x_star_norm * std::sqrt(pc.M_H * ex);
  const double denom =
      std::pow(2.0 * std::numbers::pi * pc.M_H, 0.5 * pc.p);
  return rep.mu_leb_C / denom * std::exp(expo);
}

// Rate bound at one choice of the free parameters:
//   rho(r, d) = max{(1-eta)^r,
//                   ((1 + 2b~ + l~ + l~ d)/(1 + d))^{1-r} (1 + 2b~ + 2 l~ d)^r}.
inline double rho_at(double lambda_tilde, double b_tilde, double eta, double r,
                     double d) {
  if (!(eta > 0.0 && eta <= 1.0)) throw TheoryError("rho: eta outside (0,1]");
  if (!(r > 0.0 && r < 1.0)) throw TheoryError("rho: r outside (0,1)");
  if (!(d > 0.0)) throw TheoryError("rho: d <= 0");
  const double first = std::pow(1.0 - eta, r);
  const double num = 1.0 + 2.0 * b_tilde + lambda_tilde + lambda_tilde * d;
  const double second = std::pow(num / (1.0 + d), 1.0 - r) *
                        std::pow(1.0 + 2.0 * b_tilde + 2.0 * lambda_tilde * d, r);
  return std::max(first, second);
}

inline std::vector<double> default_r_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

inline std::vector<double> default_d_grid(int n = 61) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i)
    g.push_back(std::pow(10.0, -2.0 + 6.0 * i / (n - 1)));
  return g;
}

struct RhoGridResult {
  double rho;
  double r;
  double d;
};

// Grid minimizer of rho over (r, d); ties resolve to the lexicographically
// smallest (r, d).
inline RhoGridResult rho_grid_search(double lambda_tilde, double b_tilde,
                                     double eta,
                                     const std::vector<double>& r_grid,
                                     const std::vector<double>& d_grid) {
  if (r_grid.empty() || d_grid.empty())
    throw std::invalid_argument("rho grid search: empty grid");
  RhoGridResult best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (double r : r_grid)
    for (double d : d_grid) {
      const double rho = rho_at(lambda_tilde, b_tilde, eta, r, d);
      if (rho < best.rho) best = {rho, r, d};
    }
  return best;
}

// M(x) = 2 + b~/(1 - l~) + V~(x).
inline double ergodicity_constant(const ErgodicityReport& rep, double v_tilde_x) {
  return 2.0 + rep.b_tilde / (1.0 - rep.lambda_tilde) + v_tilde_x;
}

struct TvBound {
  double raw;      // M(x) rho^k
  double clipped;  // min(1, raw); total variation never exceeds 1
};

inline TvBound tv_bound(const ErgodicityReport& rep, const Eigen::VectorXd& x,
                        long long k, const TargetSpec& target,
                        const Preconditioner& precond) {
  const double mx = ergodicity_constant(rep, v_tilde(precond, x, target.x_star));
  const double raw = mx * std::pow(rep.rho, static_cast<double>(k));
  return {raw, std::min(1.0, raw)};
}

// Assembles the full ergodicity report for one step size.
inline ErgodicityReport build_ergodicity_report(
    const TargetSpec& target, const Preconditioner& precond, double gamma,
    std::optional<double> alpha_opt = std::nullopt, int mc_samples = 100000,
    std::uint64_t seed = 0,
    KappaConvention convention = KappaConvention::appendix) {
  const ProblemConstants pc = make_problem_constants(target, precond, convention);
  const DriftConstants dc = drift_constants(pc, gamma);
  ErgodicityReport rep;
  rep.gamma = gamma;
  rep.lambda_tilde = dc.lambda_tilde;
  rep.b = dc.b;
  rep.b_tilde = dc.b_tilde;
  rep.alpha = alpha_opt.value_or(0.5 * (1.0 + dc.lambda_tilde));
  rep.small_set_radius = small_set_radius(pc, dc, rep.alpha);
  const MuLebEstimate mu =
      estimate_mu_leb(pc, rep, target, precond, mc_samples, seed);
  rep.mu_leb_C = mu.value;
  rep.mu_leb_se = mu.se;
  rep.eta = std::min(1.0, eta_lower_bound(pc, rep, target.x_star.norm()));
  const RhoGridResult rg = rho_grid_search(rep.lambda_tilde, rep.b_tilde,
                                           rep.eta, default_r_grid(),
                                           default_d_grid());
  rep.rho = rg.rho;
  rep.r = rg.r;
  rep.d = rg.d;
  return rep;
}

struct SamplingPlan {
  double epsilon = 0.0;
  double kappa = 0.0;
  double kappa_star = 0.0;
  double T = 0.0;
  double C_star = 0.0;
  double C_const = 0.0;
  double gamma_max = 0.0;
  double gamma = 0.0;
  long long K = 0;
  double alpha_exp = 0.0;
  bool degenerate = false;
  std::string note;
};

// Step-size budget for W2(final iterate, target) <= epsilon:
//   T        = (1/kappa) log[(2/eps)(kappa*^{-1/2}|x0-x*| + kappa*^{-1}(p/m)^{1/2})]
//   C*       = (M_H/6)(g(x0) - g(x*)) + (5/12) M_H^2 M p T
//   C        = (M_H/alpha)[3/2 + 2 alpha T p
//              + log(E(L0) + alpha |grad g(0)|^2 T / (2m - 4 alpha/m_H))]
//   gamma_max= min{(1/(32 C*))(sqrt(1 + 2^{3/2} eps/C) - 1)^4, kappa*/(M M_H)}
// with E(L0) = exp(alpha x0' H^-1 x0) for the deterministic start x0.
inline SamplingPlan plan_sampling(const ProblemConstants& pc,
                                  const TargetSpec& target,
                                  const FixedPreconditioner& precond,
                                  const Eigen::VectorXd& x0, double epsilon,
                                  std::optional<double> alpha_exp = std::nullopt,
                                  std::optional<double> gamma_override =
                                      std::nullopt) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("plan: epsilon <= 0");
  detail::require_dim(target, x0);
  const double alpha = alpha_exp.value_or(pc.kappa / 4.0);
  if (!(alpha > 0.0 && alpha < pc.kappa / 2.0))
    throw TheoryError("plan: alpha_exp outside (0, kappa/2)");
  const double moment_margin = 2.0 * pc.m - 4.0 * alpha / pc.m_H;
  if (!(moment_margin > 0.0))
    throw TheoryError(
        "plan: exponential-moment condition fails (2m - 4 alpha/m_H <= 0)");

  SamplingPlan plan;
  plan.epsilon = epsilon;
  plan.kappa = pc.kappa;
  plan.kappa_star = pc.kappa_star;
  plan.alpha_exp = alpha;

  const double dist = (x0 - target.x_star).norm();
  const double arg = (2.0 / epsilon) *
                     (dist / std::sqrt(pc.kappa_star) +
                      std::sqrt(static_cast<double>(pc.p) / pc.m) /
                          pc.kappa_star);
  plan.T = std::log(arg) / pc.kappa;
  const double T_eff = std::max(plan.T, 0.0);

  const double g_gap =
      eval_potential(target, x0) - eval_potential(target, target.x_star);
  plan.C_star = pc.M_H / 6.0 * g_gap +
                (5.0 / 12.0) * pc.M_H * pc.M_H * pc.M * pc.p * T_eff;

  const double e_l0 = std::exp(alpha * x0.dot(precond.H_inv * x0));
  const Eigen::VectorXd grad0 =
      eval_gradient(target, Eigen::VectorXd::Zero(target.dim));
  plan.C_const =
      pc.M_H / alpha *
      (1.5 + 2.0 * alpha * T_eff * pc.p +
       std::log(e_l0 + alpha * grad0.squaredNorm() * T_eff / moment_margin));

  const double cap = pc.kappa_star / (pc.M * pc.M_H);
  if (plan.T <= 0.0) {
    plan.degenerate = true;
    plan.note = "start point already within epsilon by the horizon bound";
    plan.gamma_max = cap;
    plan.gamma = gamma_override.value_or(cap);
    plan.K = 0;
    return plan;
  }
  const double root =
      std::sqrt(1.0 + std::pow(2.0, 1.5) * epsilon / plan.C_const) - 1.0;
  plan.gamma_max =
      std::min(std::pow(root, 4) / (32.0 * plan.C_star), cap);
  plan.gamma = gamma_override.value_or(plan.gamma_max);
  if (!(plan.gamma > 0.0 && plan.gamma <= plan.gamma_max))
    throw std::invalid_argument("plan: chosen gamma outside (0, gamma_max]");
  plan.K = static_cast<long long>(std::ceil(plan.T / plan.gamma));
  return plan;
}

}  // namespace plmc
