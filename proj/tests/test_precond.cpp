#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "plmc/linalg.hpp"
#include "plmc/precond.hpp"

using plmc::FixedPreconditioner;

TEST_SUITE("precond") {

TEST_CASE("ar1 with rho=0 is the identity") {
  const auto ar = plmc::build_ar1(0.0, 3);
  CHECK((ar.fixed.H - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(ar.fixed.m_H == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ar.fixed.M_H == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ar1 2x2 eigenvalues are 1 +- rho") {
  const auto ar = plmc::build_ar1(0.5, 2);
  CHECK(ar.fixed.m_H == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(ar.fixed.M_H == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(ar.fixed.kappa_star == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("ar1 spectrum stays inside the Toeplitz envelope") {
  const double rho = 0.9;
  const auto ar = plmc::build_ar1(rho, 10);
  const double lo = (1.0 - rho) / (1.0 + rho);
  const double hi = (1.0 + rho) / (1.0 - rho);
  CHECK(ar.fixed.m_H >= lo - 1e-12);
  CHECK(ar.fixed.M_H <= hi + 1e-12);
}

TEST_CASE("ar1 rejects |rho| >= 1") {
  CHECK_THROWS_AS(plmc::build_ar1(1.0, 2), std::domain_error);
  CHECK_THROWS_AS(plmc::build_ar1(-1.5, 2), std::domain_error);
}

TEST_CASE("spd square root on identity and diagonals") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  CHECK((plmc::sqrt_spd(I) - I).cwiseAbs().maxCoeff() <= 1e-14);
  Eigen::Matrix2d D = Eigen::Vector2d(4.0, 9.0).asDiagonal();
  Eigen::Matrix2d R = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  CHECK((plmc::sqrt_spd(D) - R).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("spd square root reconstructs ar1") {
  const auto ar = plmc::build_ar1(0.5, 2);
  const Eigen::MatrixXd B = ar.fixed.H_sqrt;
  CHECK((B * B - ar.fixed.H).norm() <= 1e-12);
  CHECK((B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("square-root eigenvalues are the roots of the input's") {
  const auto ar = plmc::build_ar1(0.6, 4);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(ar.fixed.H);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(ar.fixed.H_sqrt);
  for (int i = 0; i < 4; ++i)
    CHECK(eb.eigenvalues()[i] ==
          doctest::Approx(std::sqrt(ea.eigenvalues()[i])).epsilon(1e-10));
}

TEST_CASE("spectral bounds on simple matrices") {
  const auto sb1 = plmc::spectral_bounds(Eigen::MatrixXd::Identity(4, 4));
  CHECK(sb1.m_H == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sb1.M_H == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sb1.kappa_star == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::Matrix2d D = Eigen::Vector2d(2.0, 8.0).asDiagonal();
  const auto sb2 = plmc::spectral_bounds(D);
  CHECK(sb2.m_H == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sb2.M_H == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(sb2.kappa_star == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("non-symmetric and non-positive inputs are rejected") {
  Eigen::Matrix2d A;
  A << 1, 0.5, 0.0, 1;
  CHECK_THROWS_AS(plmc::sqrt_spd(A), std::domain_error);
  Eigen::Matrix2d B = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  CHECK_THROWS_AS(plmc::sqrt_spd(B), std::domain_error);
  CHECK_THROWS_AS(plmc::spectral_bounds(B), std::domain_error);
}

TEST_CASE("ar1 inverse matches the tridiagonal closed form") {
  const double rho = 0.6;
  const int p = 5;
  const auto ar = plmc::build_ar1(rho, p);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, p);
  const double s = 1.0 / (1.0 - rho * rho);
  for (int i = 0; i < p; ++i)
    T(i, i) = (i == 0 || i == p - 1) ? s : s * (1.0 + rho * rho);
  for (int i = 0; i + 1 < p; ++i) {
    T(i, i + 1) = -s * rho;
    T(i + 1, i) = -s * rho;
  }
  CHECK((ar.fixed.H_inv - T).norm() <= 1e-8);
}

TEST_CASE("condition ratio is 1 exactly for scalar multiples of I") {
  const auto f = plmc::make_fixed(3.0 * Eigen::MatrixXd::Identity(3, 3));
  CHECK(f.kappa_star == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(f.is_identity);
  const auto ar = plmc::build_ar1(0.5, 4);
  CHECK(ar.fixed.kappa_star < 1.0);
  CHECK(plmc::identity_precond(3).is_identity);
}

TEST_CASE("fixed preconditioners have beta zero") {
  const plmc::Preconditioner P{plmc::build_ar1(0.5, 2).fixed};
  CHECK(plmc::precond_beta(P) == 0.0);
}

TEST_CASE("drift function with identity preconditioner") {
  const plmc::Preconditioner P{plmc::identity_precond(2)};
  Eigen::Vector2d x(3.0, 4.0), star(0.0, 0.0);
  CHECK(plmc::v_tilde(P, x, star) == doctest::Approx(26.0).epsilon(1e-14));
}

TEST_CASE("beta estimate is zero for a constant spatial map") {
  plmc::SpatialPreconditioner s;
  s.dim = 2;
  s.H_at = [](const Eigen::VectorXd&) {
    return Eigen::MatrixXd(Eigen::Matrix2d::Identity());
  };
  s.m_H = 1.0;
  s.M_H = 1.0;
  s.beta = 0.0;
  CHECK(plmc::estimate_beta(s, 50, 5.0, 3) == 0.0);
}

TEST_CASE("beta estimate stays below the analytic bound") {
  // H(x) = (1 + eps tanh(x1)) I in one dimension; the inverse ranges over
  // (1/(1+eps), 1/(1-eps)), so M_H * sup|H^-1(x) - H^-1(y)| is
  // (1+eps) * 2 eps / (1-eps^2).
  const double eps = 0.1;
  plmc::SpatialPreconditioner s;
  s.dim = 1;
  s.H_at = [eps](const Eigen::VectorXd& x) {
    Eigen::MatrixXd H(1, 1);
    H(0, 0) = 1.0 + eps * std::tanh(x[0]);
    return H;
  };
  s.m_H = 1.0 - eps;
  s.M_H = 1.0 + eps;
  s.beta = (1.0 + eps) * 2.0 * eps / (1.0 - eps * eps);
  const double est = plmc::estimate_beta(s, 200, 10.0, 4);
  CHECK(est > 0.0);
  CHECK(est <= s.beta + 1e-12);
}

}  // TEST_SUITE
