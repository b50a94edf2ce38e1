#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "plmc/philox.hpp"
#include "plmc/targets.hpp"

using plmc::NoiseSource;
using plmc::TargetSpec;

namespace {

Eigen::VectorXd ball_point(const NoiseSource& ns, std::uint64_t step, int p,
                           double radius) {
  Eigen::VectorXd z(p);
  ns.fill_normals(step, z);
  double n = z.norm();
  if (n == 0.0) n = 1.0;
  return radius * std::pow(ns.uniform(step, 0), 1.0 / p) / n * z;
}

Eigen::VectorXd fd_gradient(const TargetSpec& t, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(t.dim);
  for (int j = 0; j < t.dim; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (plmc::eval_potential(t, xp) - plmc::eval_potential(t, xm)) /
           (2.0 * h);
  }
  return g;
}

void check_gradient(const TargetSpec& t, int n_points, std::uint64_t seed) {
  NoiseSource ns(seed, 0);
  for (int i = 0; i < n_points; ++i) {
    const Eigen::VectorXd x = ball_point(ns, i, t.dim, 5.0);
    const Eigen::VectorXd an = plmc::eval_gradient(t, x);
    const Eigen::VectorXd fd = fd_gradient(t, x);
    for (int j = 0; j < t.dim; ++j)
      CHECK(std::abs(fd[j] - an[j]) <=
            1e-5 * std::max(1.0, std::abs(an[j])));
  }
}

plmc::TargetSpec small_logistic() {
  // 4 edges, 6 observations, fixed paths.
  Eigen::MatrixXd X(4, 6);
  X << 1, 0, 1, 0, 1, 1,
       1, 1, 0, 0, 1, 0,
       0, 1, 1, 1, 0, 0,
       0, 0, 0, 1, 1, 1;
  const std::vector<int> y{1, 0, 1, 1, 0, 1};
  return plmc::logistic_path_target(X, y, 1.5, 2.0);
}

}  // namespace

TEST_SUITE("targets") {

TEST_CASE("mixture potential at the origin") {
  const Eigen::Vector2d a(0.5, 0.0);
  const TargetSpec t = plmc::mixture_gaussian_target(a);
  CHECK(plmc::eval_potential(t, Eigen::Vector2d::Zero()) ==
        doctest::Approx(0.125 - std::log(2.0)).epsilon(1e-14));
  CHECK(t.m == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(t.M == 1.0);
  CHECK(t.x_star.norm() == 0.0);
}

TEST_CASE("mixture gradient vanishes at the origin") {
  const Eigen::Vector2d a(0.7, -0.2);
  const TargetSpec t = plmc::mixture_gaussian_target(a);
  CHECK(plmc::eval_gradient(t, Eigen::Vector2d::Zero()).norm() <= 1e-15);
}

TEST_CASE("mixture rejects |a| >= 1") {
  Eigen::Vector2d a(1.0, 0.0);
  CHECK_THROWS_AS(plmc::mixture_gaussian_target(a), std::invalid_argument);
}

TEST_CASE("cosine-perturbed potential values") {
  const TargetSpec t = plmc::gaussian_cosine_target(0.5, 2);
  CHECK(plmc::eval_potential(t, Eigen::Vector2d::Zero()) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  const Eigen::Vector2d xpi(std::numbers::pi, 0.0);
  CHECK(plmc::eval_potential(t, xpi) ==
        doctest::Approx(0.5 * std::numbers::pi * std::numbers::pi + 0.5)
            .epsilon(1e-14));
  CHECK(plmc::eval_gradient(t, Eigen::Vector2d::Zero()).norm() == 0.0);
  CHECK(t.m == doctest::Approx(0.5));
  CHECK(t.M == doctest::Approx(1.5));
}

TEST_CASE("cosine weight domain") {
  CHECK_THROWS_AS(plmc::gaussian_cosine_target(0.0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(plmc::gaussian_cosine_target(1.0, 2),
                  std::invalid_argument);
}

TEST_CASE("dimension mismatch is rejected") {
  const TargetSpec t = plmc::mixture_gaussian_target(Eigen::Vector2d(0.5, 0));
  Eigen::Vector3d x(0, 0, 0);
  CHECK_THROWS_AS(plmc::eval_potential(t, x), std::invalid_argument);
  CHECK_THROWS_AS(plmc::eval_gradient(t, x), std::invalid_argument);
}

TEST_CASE("gradients match finite differences") {
  Eigen::Vector4d a(0.5, 0.0, 0.25, -0.25);
  check_gradient(plmc::mixture_gaussian_target(a), 25, 11);
  check_gradient(plmc::gaussian_cosine_target(0.5, 6), 25, 12);
  check_gradient(small_logistic(), 25, 13);
}

TEST_CASE("convexity sandwich with declared constants") {
  const auto check = [](const TargetSpec& t, std::uint64_t seed) {
    NoiseSource ns(seed, 1);
    for (int i = 0; i < 25; ++i) {
      const Eigen::VectorXd x = ball_point(ns, 2 * i, t.dim, 5.0);
      const Eigen::VectorXd y = ball_point(ns, 2 * i + 1, t.dim, 5.0);
      const double gap = plmc::eval_potential(t, y) -
                         plmc::eval_potential(t, x) -
                         plmc::eval_gradient(t, x).dot(y - x);
      const double sq = (y - x).squaredNorm();
      CHECK(gap >= 0.5 * t.m * sq - 1e-10);
      CHECK(gap <= 0.5 * t.M * sq + 1e-10);
    }
  };
  check(plmc::mixture_gaussian_target(Eigen::Vector2d(0.5, 0.0)), 21);
  check(plmc::gaussian_cosine_target(0.3, 3), 22);
  check(small_logistic(), 23);
}

TEST_CASE("mixture Hessian eigenvalues stay in [1-|a|^2, 1]") {
  const Eigen::Vector2d a(0.6, 0.3);
  NoiseSource ns(31, 0);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = ball_point(ns, i, 2, 5.0);
    const double u = 2.0 * x.dot(a);
    // sech-style factor e^u/(1+e^u)^2 written stably.
    const double s = plmc::detail::sigmoid(u) * plmc::detail::sigmoid(-u);
    const Eigen::Matrix2d hess =
        Eigen::Matrix2d::Identity() - 4.0 * s * (a * a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(hess);
    CHECK(es.eigenvalues().minCoeff() >= 1.0 - a.squaredNorm() - 1e-12);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("cosine-perturbed Hessian eigenvalues stay in [1-l, 1+l]") {
  const double l = 0.4;
  const TargetSpec t = plmc::gaussian_cosine_target(l, 3);
  NoiseSource ns(32, 0);
  const double h = 1e-5;
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = ball_point(ns, i, 3, 4.0);
    Eigen::Matrix3d hess;
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      hess.col(j) =
          (plmc::eval_gradient(t, xp) - plmc::eval_gradient(t, xm)) / (2 * h);
    }
    hess = 0.5 * (hess + hess.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hess);
    CHECK(es.eigenvalues().minCoeff() >= 1.0 - l - 1e-4);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + l + 1e-4);
  }
}

TEST_CASE("minimizer search lands on the known minimizers") {
  const TargetSpec mix = plmc::mixture_gaussian_target(Eigen::Vector2d(0.5, 0));
  CHECK(plmc::find_minimizer(mix, 1e-10).norm() <= 1e-9);
  const TargetSpec gc = plmc::gaussian_cosine_target(0.7, 2);
  CHECK(plmc::find_minimizer(gc, 1e-10).norm() <= 1e-9);
}

TEST_CASE("pure-prior logistic instance has minimizer 0") {
  Eigen::MatrixXd X(3, 0);
  const TargetSpec t = plmc::logistic_path_target(X, {}, 1.0, 1.0);
  CHECK(t.x_star.norm() <= 1e-10);
  CHECK(t.m == doctest::Approx(1.0));
  CHECK(t.M == doctest::Approx(1.0));
}

TEST_CASE("minimizer iteration cap raises a convergence error") {
  const TargetSpec t = small_logistic();
  CHECK(t.x_star.norm() > 1e-3);  // non-trivial minimizer
  try {
    plmc::find_minimizer(t, 1e-14, 1);
    FAIL("expected a convergence error");
  } catch (const plmc::ConvergenceError& e) {
    CHECK(e.final_grad_norm > 0.0);
  }
}

TEST_CASE("logistic input validation") {
  Eigen::MatrixXd X(2, 2);
  X << 1, 0, 0.5, 1;  // non-binary entry
  CHECK_THROWS_AS(plmc::logistic_path_target(X, {1, 0}, 0.0, 1.0),
                  std::invalid_argument);
  Eigen::MatrixXd X2(2, 2);
  X2 << 1, 0, 0, 1;
  CHECK_THROWS_AS(plmc::logistic_path_target(X2, {1}, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(plmc::logistic_path_target(X2, {1, 0}, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("logistic lipschitz constant uses the design spectrum") {
  const TargetSpec t = small_logistic();
  Eigen::MatrixXd X(4, 6);
  X << 1, 0, 1, 0, 1, 1,
       1, 1, 0, 0, 1, 0,
       0, 1, 1, 1, 0, 0,
       0, 0, 0, 1, 1, 1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X * X.transpose());
  CHECK(t.M == doctest::Approx(0.5 + 0.25 * es.eigenvalues().maxCoeff())
                   .epsilon(1e-12));
  CHECK(t.m == doctest::Approx(0.5).epsilon(1e-15));
}

}  // TEST_SUITE
