// Command-line front end: reproducible sampling runs, step-size planning,
// ergodicity bounds, projection inference, and trajectory metrics.
//
// Exit codes: 0 ok, 2 usage error, 3 divergence, 4 infeasible hypotheses.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "plmc/inference.hpp"
#include "plmc/io.hpp"
#include "plmc/metrics.hpp"
#include "plmc/sampler.hpp"
#include "plmc/targets.hpp"
#include "plmc/theory.hpp"

namespace {

Eigen::VectorXd parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::istringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty())
      throw std::invalid_argument("empty component in vector: " + csv);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number in vector argument: " + tok);
    }
    if (used != tok.size())
      throw std::invalid_argument("not a number in vector argument: " + tok);
    vals.push_back(v);
  }
  if (vals.empty()) throw std::invalid_argument("empty vector argument");
  return Eigen::Map<Eigen::VectorXd>(vals.data(),
                                     static_cast<Eigen::Index>(vals.size()));
}

struct TargetFlags {
  std::string kind;
  std::string a_csv;
  double lambda1 = 0.5;
  int dim = 1;
  std::string data_path;
};

void add_target_flags(CLI::App* cmd, TargetFlags& tf) {
  cmd->add_option("--target", tf.kind,
                  "target distribution: mixture|gcos|logistic")
      ->required()
      ->check(CLI::IsMember({"mixture", "gcos", "logistic"}));
  cmd->add_option("--a", tf.a_csv, "mixture centre vector, comma-separated");
  cmd->add_option("--lambda1", tf.lambda1, "gcos cosine weight in (0,1)");
  cmd->add_option("--dim", tf.dim, "gcos dimension");
  cmd->add_option("--data", tf.data_path, "logistic edge-list file");
}

plmc::TargetSpec build_target(const TargetFlags& tf) {
  if (tf.kind == "mixture") {
    if (tf.a_csv.empty())
      throw std::invalid_argument("--target mixture requires --a");
    return plmc::mixture_gaussian_target(parse_vector(tf.a_csv));
  }
  if (tf.kind == "gcos")
    return plmc::gaussian_cosine_target(tf.lambda1, tf.dim);
  if (tf.kind == "logistic") {
    if (tf.data_path.empty())
      throw std::invalid_argument("--target logistic requires --data");
    const plmc::EdgeListData d = plmc::read_edge_list(tf.data_path);
    return plmc::logistic_path_target(d.X, d.y, d.cutoff, d.sigma2);
  }
  throw std::invalid_argument("unknown target: " + tf.kind);
}

// Appends the target-defining keys so a sidecar can reconstruct the flags.
void append_target_meta(plmc::KvReport& kv, const TargetFlags& tf,
                        const plmc::TargetSpec& target) {
  kv.emplace_back("target", tf.kind);
  if (tf.kind == "mixture")
    kv.emplace_back("a", plmc::detail::fmt_vec(parse_vector(tf.a_csv)));
  else if (tf.kind == "gcos") {
    kv.emplace_back("lambda1", plmc::fmt_g17(tf.lambda1));
    kv.emplace_back("dim", std::to_string(tf.dim));
  } else {
    kv.emplace_back("data", tf.data_path);
  }
  kv.emplace_back("target_id", target.id);
}

plmc::FixedPreconditioner build_precond(const std::string& spec, int p) {
  if (spec == "identity") return plmc::identity_precond(p);
  if (spec.rfind("ar1:", 0) == 0) {
    const double rho = std::stod(spec.substr(4));
    return plmc::build_ar1(rho, p).fixed;
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    plmc::FixedPreconditioner f =
        plmc::make_fixed(plmc::read_matrix_file(path), "file:" + path);
    if (f.dim() != p)
      throw std::invalid_argument(
          "preconditioner dimension does not match target dimension");
    return f;
  }
  throw std::invalid_argument(
      "--precond must be identity, ar1:<rho>, or file:<path>");
}

void emit_report(const plmc::KvReport& kv, const std::string& out_path) {
  if (out_path.empty()) {
    plmc::write_report(std::cout, kv);
    return;
  }
  std::ofstream out = plmc::open_out(out_path);
  plmc::write_report(out, kv);
}

std::string rep_name(int r, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep%04d.%s", r, ext);
  return buf;
}

// --- sample -----------------------------------------------------------------

struct SampleArgs {
  TargetFlags tf;
  std::string precond = "identity";
  double gamma = 0.0;
  long long iters = 0;
  int replicates = 1;
  std::uint64_t seed = 0;
  int stream = 0;
  std::string x0_csv;
  long long burn_in = 0;
  long long record_every = 1;
  std::string out_dir = ".";
};

void run_sample(const SampleArgs& a) {
  const plmc::TargetSpec target = build_target(a.tf);
  const plmc::Preconditioner P{build_precond(a.precond, target.dim)};
  const Eigen::VectorXd x0 = a.x0_csv.empty()
                                 ? Eigen::VectorXd::Zero(target.dim).eval()
                                 : parse_vector(a.x0_csv);

  try {
    const plmc::ProblemConstants pc = plmc::make_problem_constants(target, P);
    const auto [lo, hi] = plmc::gamma_interval(pc);
    if (!(a.gamma > lo && a.gamma < hi))
      std::cerr << "warning: gamma=" << plmc::fmt_g17(a.gamma)
                << " lies outside the admissible interval ("
                << plmc::fmt_g17(lo) << ", " << plmc::fmt_g17(hi) << ")\n";
  } catch (const plmc::TheoryError& e) {
    std::cerr << "warning: admissible step-size interval unavailable: "
              << e.what() << "\n";
  }

  plmc::ChainConfig cfg;
  cfg.gamma = a.gamma;
  cfg.K = a.iters;
  cfg.x0 = x0;
  cfg.seed = a.seed;
  cfg.record_every = a.record_every;
  cfg.burn_in = a.burn_in;
  plmc::validate_config(cfg);
  if (a.replicates < 1) throw std::invalid_argument("--replicates < 1");

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);

  std::vector<int> failed;
  long long first_step = -1;
  for (int r = 0; r < a.replicates; ++r) {
    const int stream = a.stream + r;
    try {
      const plmc::Trajectory traj = plmc::run_chain(target, P, cfg, stream);
      plmc::write_trajectory_csv((dir / rep_name(r, "csv")).string(), traj);
      plmc::KvReport meta;
      append_target_meta(meta, a.tf, target);
      meta.emplace_back("precond", a.precond);
      meta.emplace_back("precond_id", plmc::precond_id(P));
      meta.emplace_back("gamma", plmc::fmt_g17(a.gamma));
      meta.emplace_back("iters", std::to_string(a.iters));
      meta.emplace_back("burn-in", std::to_string(a.burn_in));
      meta.emplace_back("record-every", std::to_string(a.record_every));
      meta.emplace_back("seed", std::to_string(a.seed));
      meta.emplace_back("stream", std::to_string(stream));
      meta.emplace_back("x0", plmc::detail::fmt_vec(x0));
      plmc::write_meta((dir / rep_name(r, "meta")).string(), meta);
    } catch (const plmc::DivergenceError& e) {
      failed.push_back(r);
      if (first_step < 0) first_step = e.step;
    }
  }
  if (!failed.empty()) throw plmc::DivergenceError(first_step, failed);
}

// --- plan -------------------------------------------------------------------

struct PlanArgs {
  TargetFlags tf;
  std::string precond = "identity";
  double epsilon = 0.0;
  std::string x0_csv;
  double alpha_exp = 0.0;
  bool has_alpha = false;
  double gamma = 0.0;
  bool has_gamma = false;
  std::string convention = "appendix";
  std::string out;
};

void run_plan(const PlanArgs& a) {
  const plmc::TargetSpec target = build_target(a.tf);
  const plmc::FixedPreconditioner F = build_precond(a.precond, target.dim);
  const plmc::KappaConvention conv =
      plmc::parse_kappa_convention(a.convention);
  const plmc::ProblemConstants pc =
      plmc::make_problem_constants(target, plmc::Preconditioner{F}, conv);
  const Eigen::VectorXd x0 = a.x0_csv.empty()
                                 ? Eigen::VectorXd::Zero(target.dim).eval()
                                 : parse_vector(a.x0_csv);
  std::optional<double> alpha, gamma;
  if (a.has_alpha) alpha = a.alpha_exp;
  if (a.has_gamma) gamma = a.gamma;
  const plmc::SamplingPlan plan =
      plmc::plan_sampling(pc, target, F, x0, a.epsilon, alpha, gamma);

  plmc::KvReport kv;
  kv.emplace_back("kappa_convention", plmc::kappa_convention_name(conv));
  kv.emplace_back("kappa", plmc::fmt_g17(plan.kappa));
  kv.emplace_back("kappa_star", plmc::fmt_g17(plan.kappa_star));
  kv.emplace_back("epsilon", plmc::fmt_g17(plan.epsilon));
  kv.emplace_back("alpha_exp", plmc::fmt_g17(plan.alpha_exp));
  kv.emplace_back("T", plmc::fmt_g17(plan.T));
  kv.emplace_back("C_star", plmc::fmt_g17(plan.C_star));
  kv.emplace_back("C", plmc::fmt_g17(plan.C_const));
  kv.emplace_back("gamma_max", plmc::fmt_g17(plan.gamma_max));
  kv.emplace_back("gamma", plmc::fmt_g17(plan.gamma));
  kv.emplace_back("K", std::to_string(plan.K));
  kv.emplace_back("degenerate", plan.degenerate ? "true" : "false");
  if (!plan.note.empty()) kv.emplace_back("note", plan.note);
  emit_report(kv, a.out);
}

// --- bounds -----------------------------------------------------------------

struct BoundsArgs {
  TargetFlags tf;
  std::string precond = "identity";
  double gamma = 0.0;
  double alpha = 0.0;
  bool has_alpha = false;
  int grid_r = 19;
  int grid_d = 61;
  int mc_samples = 100000;
  std::uint64_t seed = 0;
  std::string x0_csv;
  std::string out;
  std::string grid_csv;
  std::string tv_csv;
  long long k_max = 200;
};

void run_bounds(const BoundsArgs& a) {
  const plmc::TargetSpec target = build_target(a.tf);
  const plmc::Preconditioner P{build_precond(a.precond, target.dim)};
  const Eigen::VectorXd x0 = a.x0_csv.empty()
                                 ? Eigen::VectorXd::Zero(target.dim).eval()
                                 : parse_vector(a.x0_csv);
  const plmc::ProblemConstants pc = plmc::make_problem_constants(target, P);
  const auto [glo, ghi] = plmc::gamma_interval(pc);
  const plmc::DriftConstants dc = plmc::drift_constants(pc, a.gamma);

  plmc::ErgodicityReport rep;
  rep.gamma = a.gamma;
  rep.lambda_tilde = dc.lambda_tilde;
  rep.b = dc.b;
  rep.b_tilde = dc.b_tilde;
  rep.alpha = a.has_alpha ? a.alpha : 0.5 * (1.0 + dc.lambda_tilde);
  rep.small_set_radius = plmc::small_set_radius(pc, dc, rep.alpha);
  const plmc::MuLebEstimate mu =
      plmc::estimate_mu_leb(pc, rep, target, P, a.mc_samples, a.seed);
  rep.mu_leb_C = mu.value;
  rep.mu_leb_se = mu.se;
  rep.eta =
      std::min(1.0, plmc::eta_lower_bound(pc, rep, target.x_star.norm()));

  if (a.grid_r < 1 || a.grid_d < 2)
    throw std::invalid_argument("grid sizes must be >= 1 (r) and >= 2 (d)");
  std::vector<double> r_grid;
  if (a.grid_r == 19) {
    r_grid = plmc::default_r_grid();
  } else if (a.grid_r == 1) {
    r_grid = {0.5};
  } else {
    for (int i = 0; i < a.grid_r; ++i)
      r_grid.push_back(0.05 + 0.90 * i / (a.grid_r - 1));
  }
  const std::vector<double> d_grid = plmc::default_d_grid(a.grid_d);
  const plmc::RhoGridResult rg = plmc::rho_grid_search(
      rep.lambda_tilde, rep.b_tilde, rep.eta, r_grid, d_grid);
  rep.rho = rg.rho;
  rep.r = rg.r;
  rep.d = rg.d;

  const double m_x0 =
      plmc::ergodicity_constant(rep, plmc::v_tilde(P, x0, target.x_star));

  plmc::KvReport kv;
  kv.emplace_back("gamma", plmc::fmt_g17(a.gamma));
  kv.emplace_back("gamma_lo", plmc::fmt_g17(glo));
  kv.emplace_back("gamma_hi", plmc::fmt_g17(ghi));
  kv.emplace_back("lambda_tilde", plmc::fmt_g17(rep.lambda_tilde));
  kv.emplace_back("b", plmc::fmt_g17(rep.b));
  kv.emplace_back("b_tilde", plmc::fmt_g17(rep.b_tilde));
  kv.emplace_back("alpha", plmc::fmt_g17(rep.alpha));
  kv.emplace_back("radius", plmc::fmt_g17(rep.small_set_radius));
  kv.emplace_back("mu_leb", plmc::fmt_g17(rep.mu_leb_C));
  kv.emplace_back("mu_leb_se", plmc::fmt_g17(rep.mu_leb_se));
  kv.emplace_back("eta", plmc::fmt_g17(rep.eta));
  kv.emplace_back("r", plmc::fmt_g17(rep.r));
  kv.emplace_back("d", plmc::fmt_g17(rep.d));
  kv.emplace_back("rho", plmc::fmt_g17(rep.rho));
  kv.emplace_back("M_x0", plmc::fmt_g17(m_x0));
  emit_report(kv, a.out);

  if (!a.grid_csv.empty()) {
    std::ofstream out = plmc::open_out(a.grid_csv);
    out << "r,d,rho\n";
    for (double r : r_grid)
      for (double d : d_grid)
        out << plmc::fmt_g17(r) << "," << plmc::fmt_g17(d) << ","
            << plmc::fmt_g17(
                   plmc::rho_at(rep.lambda_tilde, rep.b_tilde, rep.eta, r, d))
            << "\n";
  }
  if (!a.tv_csv.empty()) {
    if (a.k_max < 0) throw std::invalid_argument("--k-max < 0");
    std::ofstream out = plmc::open_out(a.tv_csv);
    out << "k,tv_bound\n";
    for (long long k = 0; k <= a.k_max; ++k)
      out << k << ","
          << plmc::fmt_g17(plmc::tv_bound(rep, x0, k, target, P).clipped)
          << "\n";
  }
}

// --- infer ------------------------------------------------------------------

struct InferArgs {
  std::string traj;
  std::string u_csv;
  double level = 0.95;
  int n_batches = 30;
  std::string x_star_csv;
  double m_h = 0.0;
  bool has_m_h = false;
  std::string out;
  std::string batch_csv;
  int hist_bins = 0;
  std::string hist_csv;
  std::string hist_svg;
};

void run_infer(const InferArgs& a) {
  const plmc::TrajectoryFile tfile = plmc::read_trajectory_csv(a.traj);
  const int p = static_cast<int>(tfile.samples.cols());

  std::map<std::string, std::string> meta;
  {
    std::filesystem::path mp(a.traj);
    mp.replace_extension(".meta");
    if (std::filesystem::exists(mp)) meta = plmc::read_meta(mp.string());
  }

  Eigen::VectorXd x_star;
  if (!a.x_star_csv.empty()) {
    x_star = parse_vector(a.x_star_csv);
  } else if (meta.count("target")) {
    TargetFlags tf;
    tf.kind = meta.at("target");
    if (meta.count("a")) tf.a_csv = meta.at("a");
    if (meta.count("lambda1")) tf.lambda1 = std::stod(meta.at("lambda1"));
    if (meta.count("dim")) tf.dim = std::stoi(meta.at("dim"));
    if (meta.count("data")) tf.data_path = meta.at("data");
    x_star = build_target(tf).x_star;
  } else {
    throw std::invalid_argument(
        "no meta sidecar next to the trajectory: pass --x-star");
  }

  double m_h = 0.0;
  if (a.has_m_h) {
    m_h = a.m_h;
  } else if (meta.count("precond")) {
    m_h = build_precond(meta.at("precond"), p).M_H;
  } else {
    throw std::invalid_argument(
        "no meta sidecar next to the trajectory: pass --m-h");
  }

  const Eigen::VectorXd u = parse_vector(a.u_csv);
  plmc::Trajectory traj;
  traj.samples = tfile.samples;
  traj.config.gamma = 1.0;
  traj.config.K = traj.samples.rows();
  traj.config.x0 = Eigen::VectorXd::Zero(p);

  const plmc::ProjectionCI ci =
      plmc::projection_ci(traj, u, x_star, m_h, a.level, a.n_batches);

  plmc::KvReport kv;
  kv.emplace_back("u", plmc::detail::fmt_vec(u));
  kv.emplace_back("k", std::to_string(ci.k));
  kv.emplace_back("level", plmc::fmt_g17(ci.level));
  kv.emplace_back("point_estimate", plmc::fmt_g17(ci.point_estimate));
  kv.emplace_back("sigma_hat", plmc::fmt_g17(ci.sigma_hat));
  kv.emplace_back("lo", plmc::fmt_g17(ci.lo));
  kv.emplace_back("hi", plmc::fmt_g17(ci.hi));
  kv.emplace_back("degenerate", ci.degenerate ? "true" : "false");
  emit_report(kv, a.out);

  if (!a.batch_csv.empty()) {
    const double scale = 1.0 / std::sqrt(m_h);
    const auto f = [&](const Eigen::VectorXd& x) {
      return scale * u.dot(x - x_star);
    };
    const std::vector<double> means =
        plmc::batch_means(traj, f, a.n_batches);
    std::ofstream out = plmc::open_out(a.batch_csv);
    out << "batch,mean\n";
    for (std::size_t b = 0; b < means.size(); ++b)
      out << (b + 1) << "," << plmc::fmt_g17(means[b]) << "\n";
  }

  if (a.hist_bins > 0) {
    const plmc::HistogramData h =
        plmc::histogram_counts(traj.samples, a.hist_bins);
    const std::string csv_path =
        a.hist_csv.empty() ? a.traj + ".hist.csv" : a.hist_csv;
    plmc::write_histogram_csv(csv_path, h);
    if (!a.hist_svg.empty())
      plmc::write_histogram_svg(a.hist_svg, h, a.traj);
  }
}

// --- metrics ----------------------------------------------------------------

struct MetricsArgs {
  std::string a_path;
  std::string b_path;
  int bins = 50;
  std::string range;
  std::string out;
};

void run_metrics(const MetricsArgs& a) {
  const plmc::TrajectoryFile A = plmc::read_trajectory_csv(a.a_path);
  const plmc::TrajectoryFile B = plmc::read_trajectory_csv(a.b_path);
  if (A.samples.cols() != B.samples.cols())
    throw std::invalid_argument("trajectories have different dimensions");
  if (a.bins < 2) throw std::invalid_argument("--bins < 2");

  bool has_range = false;
  double lo = 0.0, hi = 0.0;
  if (!a.range.empty()) {
    const auto colon = a.range.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("--range must be lo:hi");
    lo = std::stod(a.range.substr(0, colon));
    hi = std::stod(a.range.substr(colon + 1));
    if (!(lo < hi)) throw std::invalid_argument("--range must have lo < hi");
    has_range = true;
  }

  std::ostringstream rows;
  rows << "coord,w2,tv\n";
  for (Eigen::Index j = 0; j < A.samples.cols(); ++j) {
    std::vector<double> av(A.samples.rows()), bv(B.samples.rows());
    for (Eigen::Index i = 0; i < A.samples.rows(); ++i) av[i] = A.samples(i, j);
    for (Eigen::Index i = 0; i < B.samples.rows(); ++i) bv[i] = B.samples(i, j);
    const double tv = has_range
                          ? plmc::tv_histogram(av, bv, a.bins, lo, hi)
                          : plmc::tv_histogram(av, bv, a.bins);
    std::sort(av.begin(), av.end());
    std::sort(bv.begin(), bv.end());
    const double w2 = plmc::w2_empirical_1d(av, bv);
    rows << (j + 1) << "," << plmc::fmt_g17(w2) << "," << plmc::fmt_g17(tv)
         << "\n";
  }
  if (a.out.empty()) {
    std::cout << rows.str();
  } else {
    std::ofstream out = plmc::open_out(a.out);
    out << rows.str();
  }
}

// The vendored CLI11 never reads a config option attached to a subcommand, so
// --config is expanded here before parsing: each key=value line becomes a
// --key value pair appended after the user's own flags, and a key already
// given on the command line is skipped (command line wins).
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  std::string path;
  bool found = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& tok = args[i];
    std::string value;
    bool is_config = false;
    if (tok == "--config") {
      if (i + 1 >= args.size())
        throw std::invalid_argument("--config needs a file path");
      value = args[++i];
      is_config = true;
    } else if (tok.rfind("--config=", 0) == 0) {
      value = tok.substr(9);
      is_config = true;
    }
    if (is_config) {
      if (found) throw std::invalid_argument("--config given more than once");
      found = true;
      path = value;
      continue;
    }
    out.push_back(tok);
  }
  if (!found) return out;

  const std::map<std::string, std::string> kv = plmc::read_meta(path);
  std::set<std::string> present;
  for (const std::string& tok : out)
    if (tok.rfind("--", 0) == 0) present.insert(tok.substr(0, tok.find('=')));
  for (const auto& [key, value] : kv) {
    if (key == "config")
      throw std::invalid_argument("config file cannot set --config");
    if (present.count("--" + key) > 0) continue;
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Preconditioned Langevin sampling toolkit: sample chains, plan step "
      "sizes for a Wasserstein budget, compute ergodicity bounds, and run "
      "inference and metrics on trajectories."};
  app.require_subcommand(1);

  // Display-only binding: expand_config_args consumes --config before CLI11
  // sees it, so this option exists for help text and flag validation.
  std::string config_file;

  SampleArgs sa;
  CLI::App* sample = app.add_subcommand(
      "sample", "run chains and write trajectory CSVs with meta sidecars");
  add_target_flags(sample, sa.tf);
  sample->add_option("--precond", sa.precond,
                     "identity | ar1:<rho> | file:<path>");
  sample->add_option("--gamma", sa.gamma, "step size")->required();
  sample->add_option("--iters", sa.iters, "iterations per replicate")
      ->required();
  sample->add_option("--replicates", sa.replicates, "number of replicates");
  sample->add_option("--seed", sa.seed, "base seed shared by all replicates");
  sample->add_option("--stream", sa.stream,
                     "noise substream of the first replicate");
  sample->add_option("--x0", sa.x0_csv, "start point, comma-separated");
  sample->add_option("--burn-in", sa.burn_in, "iterations dropped up front");
  sample->add_option("--record-every", sa.record_every, "thinning stride");
  sample->add_option("--out-dir", sa.out_dir, "output directory");
  sample->add_option("--config", config_file,
                     "key=value file of flags; command line wins");
  sample->callback([&] { run_sample(sa); });

  PlanArgs pa;
  CLI::App* plan = app.add_subcommand(
      "plan", "step-size and iteration budget for a Wasserstein target");
  add_target_flags(plan, pa.tf);
  plan->add_option("--precond", pa.precond,
                   "identity | ar1:<rho> | file:<path>");
  plan->add_option("--epsilon", pa.epsilon, "Wasserstein accuracy")
      ->required();
  plan->add_option("--x0", pa.x0_csv, "start point, comma-separated");
  plan->add_option("--alpha-exp", pa.alpha_exp,
                   "exponential-moment parameter (default kappa/4)");
  plan->add_option("--gamma", pa.gamma,
                   "override the planned step size (must be <= gamma_max)");
  plan->add_option("--kappa-convention", pa.convention,
                   "kappa = m*m_H (appendix) or 2*m*m_H (text)")
      ->check(CLI::IsMember({"appendix", "text"}));
  plan->add_option("--out", pa.out, "write the report here instead of stdout");
  plan->add_option("--config", config_file,
                   "key=value file of flags; command line wins");
  plan->callback([&] {
    pa.has_alpha = plan->count("--alpha-exp") > 0;
    pa.has_gamma = plan->count("--gamma") > 0;
    run_plan(pa);
  });

  BoundsArgs ba;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "drift/minorization constants and the geometric rate bound");
  add_target_flags(bounds, ba.tf);
  bounds->add_option("--precond", ba.precond,
                     "identity | ar1:<rho> | file:<path>");
  bounds->add_option("--gamma", ba.gamma, "step size")->required();
  bounds->add_option("--alpha", ba.alpha,
                     "small-set level parameter in (lambda_tilde, 1)");
  bounds->add_option("--grid-r", ba.grid_r, "grid points for r");
  bounds->add_option("--grid-d", ba.grid_d, "grid points for d");
  bounds->add_option("--mc-samples", ba.mc_samples,
                     "rejection samples for the small-set volume");
  bounds->add_option("--seed", ba.seed, "seed for the volume estimate");
  bounds->add_option("--x0", ba.x0_csv, "point for the M(x0) constant");
  bounds->add_option("--out", ba.out,
                     "write the report here instead of stdout");
  bounds->add_option("--grid-csv", ba.grid_csv, "write the full (r,d,rho) grid");
  bounds->add_option("--tv-csv", ba.tv_csv,
                     "write k,min(1,M(x0)rho^k) rows up to --k-max");
  bounds->add_option("--k-max", ba.k_max, "last k for --tv-csv");
  bounds->add_option("--config", config_file,
                     "key=value file of flags; command line wins");
  bounds->callback([&] {
    ba.has_alpha = bounds->count("--alpha") > 0;
    run_bounds(ba);
  });

  InferArgs ia;
  CLI::App* infer = app.add_subcommand(
      "infer", "projection confidence interval from a trajectory CSV");
  infer->add_option("--traj", ia.traj, "trajectory CSV")->required();
  infer->add_option("--u", ia.u_csv, "unit projection direction")->required();
  infer->add_option("--level", ia.level, "confidence level");
  infer->add_option("--n-batches", ia.n_batches, "number of batches");
  infer->add_option("--x-star", ia.x_star_csv,
                    "minimizer override when no sidecar is present");
  infer->add_option("--m-h", ia.m_h,
                    "preconditioner upper bound override");
  infer->add_option("--out", ia.out, "write the report here instead of stdout");
  infer->add_option("--batch-csv", ia.batch_csv, "write the batch means");
  infer->add_option("--histogram-bins", ia.hist_bins,
                    "also write per-coordinate histogram counts");
  infer->add_option("--histogram-csv", ia.hist_csv,
                    "histogram CSV path (default <traj>.hist.csv)");
  infer->add_option("--histogram-svg", ia.hist_svg,
                    "also render the histogram to a standalone SVG");
  infer->add_option("--config", config_file,
                    "key=value file of flags; command line wins");
  infer->callback([&] {
    ia.has_m_h = infer->count("--m-h") > 0;
    run_infer(ia);
  });

  MetricsArgs ma;
  CLI::App* metrics = app.add_subcommand(
      "metrics", "per-coordinate W2 and TV between two trajectory CSVs");
  metrics->add_option("--a", ma.a_path, "first trajectory CSV")->required();
  metrics->add_option("--b", ma.b_path, "second trajectory CSV")->required();
  metrics->add_option("--bins", ma.bins, "histogram bins for TV");
  metrics->add_option("--range", ma.range, "shared histogram range lo:hi");
  metrics->add_option("--out", ma.out, "write rows here instead of stdout");
  metrics->add_option("--config", config_file,
                      "key=value file of flags; command line wins");
  metrics->callback([&] { run_metrics(ma); });

  try {
    app.name(argv[0]);
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // the vector overload pops back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const plmc::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const plmc::TheoryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
