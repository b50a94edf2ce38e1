#pragma once

// Preconditioned Langevin Monte Carlo recursion
//   x_{k+1} = x_k - gamma H(x_k) grad g(x_k) + sqrt(2 gamma) H(x_k)^{1/2} xi
// with counter-based noise streams: replicate r consumes stream r, so output
// is bit-identical regardless of execution order or thread count.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plmc/philox.hpp"
#include "plmc/precond.hpp"
#include "plmc/targets.hpp"

namespace plmc {

inline constexpr double kDivergenceLimit = 1e12;

struct DivergenceError : std::runtime_error {
  DivergenceError(long long step_idx, std::vector<int> reps = {})
      : std::runtime_error(make_what(step_idx, reps)),
        step(step_idx),
        replicates(std::move(reps)) {}
  long long step;
  std::vector<int> replicates;

 private:
  static std::string make_what(long long step_idx,
                               const std::vector<int>& reps) {
    std::string s = "chain diverged at step " + std::to_string(step_idx);
    if (!reps.empty()) {
      s += " (replicates";
      for (int r : reps) s += " " + std::to_string(r);
      s += ")";
    }
    return s;
  }
};

struct ChainConfig {
  double gamma = 0.0;
  long long K = 0;
  Eigen::VectorXd x0;
  std::uint64_t seed = 0;
  long long record_every = 1;
  long long burn_in = 0;
  bool record_grad_norms = false;
};

inline void validate_config(const ChainConfig& c) {
  if (!(c.gamma > 0.0)) throw std::invalid_argument("chain config: gamma <= 0");
  if (c.K < 1) throw std::invalid_argument("chain config: K < 1");
  if (c.record_every < 1)
    throw std::invalid_argument("chain config: record_every < 1");
  if (c.burn_in < 0 || c.burn_in >= c.K)
    throw std::invalid_argument("chain config: burn_in outside [0, K)");
  if (c.x0.size() < 1) throw std::invalid_argument("chain config: empty x0");
}

struct Trajectory {
  Eigen::MatrixXd samples;  // rows = recorded iterates
  ChainConfig config;
  Eigen::VectorXd terminal;
  Eigen::VectorXd grad_norms;  // empty unless requested
  int stream = 0;

  long long rows() const { return samples.rows(); }
  // Absolute iteration index of recorded row j.
  long long step_of_row(long long j) const {
    return config.burn_in + (j + 1) * config.record_every;
  }
};

namespace detail {

inline void check_state(const Eigen::VectorXd& x, long long step_idx) {
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceLimit)
    throw DivergenceError(step_idx);
}

}  // namespace detail

// One update with caller-supplied standard Gaussian noise; exactly one
// gradient evaluation.  Spatial preconditioners are evaluated at the current
// point.
inline Eigen::VectorXd step(const Eigen::VectorXd& x, const TargetSpec& target,
                            const Preconditioner& precond, double gamma,
                            const Eigen::VectorXd& noise) {
  detail::require_dim(target, x);
  if (noise.size() != x.size())
    throw std::invalid_argument("step: noise dimension mismatch");
  Eigen::VectorXd g(x.size());
  target.gradient_into(x, g);
  const double s2g = std::sqrt(2.0 * gamma);
  Eigen::VectorXd out;
  if (const auto* f = std::get_if<FixedPreconditioner>(&precond)) {
    if (f->is_identity)
      out = x - gamma * g + s2g * noise;
    else
      out = x - gamma * (f->H * g) + s2g * (f->H_sqrt * noise);
  } else {
    const auto& s = std::get<SpatialPreconditioner>(precond);
    const Eigen::MatrixXd H = s.H_at(x);
    const Eigen::MatrixXd Hs = sqrt_spd(H);
    out = x - gamma * (H * g) + s2g * (Hs * noise);
  }
  detail::check_state(out, -1);
  return out;
}

// Runs one chain on the given noise stream (replicates use streams 0..n-1).
inline Trajectory run_chain(const TargetSpec& target,
                            const Preconditioner& precond,
                            const ChainConfig& config, int stream = 0) {
  validate_config(config);
  detail::require_dim(target, config.x0);
  if (precond_dim(precond) != target.dim)
    throw std::invalid_argument("run_chain: preconditioner dimension mismatch");

  const int p = target.dim;
  const long long n_rows = (config.K - config.burn_in) / config.record_every;
  Trajectory traj;
  traj.config = config;
  traj.stream = stream;
  traj.samples.resize(n_rows, p);
  if (config.record_grad_norms) traj.grad_norms.resize(n_rows);

  NoiseSource ns(config.seed, static_cast<std::uint32_t>(stream));
  const double s2g = std::sqrt(2.0 * config.gamma);
  Eigen::VectorXd x = config.x0;
  Eigen::VectorXd g(p), xi(p), tmp(p);

  const auto* fixed = std::get_if<FixedPreconditioner>(&precond);
  const auto* spatial = std::get_if<SpatialPreconditioner>(&precond);
  const bool ident = fixed != nullptr && fixed->is_identity;

  long long row = 0;
  for (long long k = 1; k <= config.K; ++k) {
    target.gradient_into(x, g);
    ns.fill_normals(static_cast<std::uint64_t>(k), xi);
    if (ident) {
      x.noalias() -= config.gamma * g;
      x.noalias() += s2g * xi;
    } else if (fixed != nullptr) {
      tmp.noalias() = fixed->H * g;
      x.noalias() -= config.gamma * tmp;
      tmp.noalias() = fixed->H_sqrt * xi;
      x.noalias() += s2g * tmp;
    } else {
      const Eigen::MatrixXd H = spatial->H_at(x);
      const Eigen::MatrixXd Hs = sqrt_spd(H);
      tmp.noalias() = H * g;
      x.noalias() -= config.gamma * tmp;
      tmp.noalias() = Hs * xi;
      x.noalias() += s2g * tmp;
    }
    detail::check_state(x, k);
    if (k > config.burn_in && (k - config.burn_in) % config.record_every == 0) {
      traj.samples.row(row) = x;
      if (config.record_grad_norms) {
        target.gradient_into(x, g);
        traj.grad_norms[row] = g.norm();
      }
      ++row;
    }
  }
  traj.terminal = x;
  return traj;
}

// Runs replicate r on stream r and passes it to fn in replicate order.
// Divergent replicates are collected and reported together after the rest
// complete.
template <typename Fn>
void run_replicates_apply(const TargetSpec& target,
                          const Preconditioner& precond,
                          const ChainConfig& config, int n_rep, Fn&& fn) {
  if (n_rep < 1) throw std::invalid_argument("run_replicates: n_rep < 1");
  std::vector<int> failed;
  long long first_step = -1;
  for (int r = 0; r < n_rep; ++r) {
    try {
      fn(r, run_chain(target, precond, config, r));
    } catch (const DivergenceError& e) {
      failed.push_back(r);
      if (first_step < 0) first_step = e.step;
    }
  }
  if (!failed.empty()) throw DivergenceError(first_step, failed);
}

// Parallel replicates; schedule-independent because stream r is a pure
// function of (seed, r).
inline std::vector<Trajectory> run_replicates(const TargetSpec& target,
                                              const Preconditioner& precond,
                                              const ChainConfig& config,
                                              int n_rep, int n_threads = 1) {
  if (n_rep < 1) throw std::invalid_argument("run_replicates: n_rep < 1");
  std::vector<Trajectory> out(n_rep);
  std::vector<std::optional<long long>> diverged(n_rep);
  if (n_threads <= 1) {
    for (int r = 0; r < n_rep; ++r) {
      try {
        out[r] = run_chain(target, precond, config, r);
      } catch (const DivergenceError& e) {
        diverged[r] = e.step;
      }
    }
  } else {
    std::vector<std::thread> pool;
    const int workers = std::min(n_threads, n_rep);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int r = w; r < n_rep; r += workers) {
          try {
            out[r] = run_chain(target, precond, config, r);
          } catch (const DivergenceError& e) {
            diverged[r] = e.step;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  std::vector<int> failed;
  long long first_step = -1;
  for (int r = 0; r < n_rep; ++r) {
    if (diverged[r]) {
      failed.push_back(r);
      if (first_step < 0) first_step = *diverged[r];
    }
  }
  if (!failed.empty()) throw DivergenceError(first_step, failed);
  return out;
}

}  // namespace plmc
