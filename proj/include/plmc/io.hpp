#pragma once

// File formats: trajectory CSV with metadata sidecar, dense matrix files,
// logistic edge-list files, flat key=value reports, and minimal SVG
// histograms.  All numeric output uses %.17g so reruns are byte-identical.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plmc/sampler.hpp"
#include "plmc/targets.hpp"

namespace plmc {

using KvReport = std::vector<std::pair<std::string, std::string>>;

inline std::string fmt_g17(double v) { return detail::fmt_num(v); }

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  return in;
}

inline void write_report(std::ostream& os, const KvReport& kv) {
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
}

// --- trajectory CSV + sidecar ---------------------------------------------

inline void write_trajectory_csv(const std::string& path,
                                 const Trajectory& traj) {
  std::ofstream out = open_out(path);
  const Eigen::Index p = traj.samples.cols();
  out << "step";
  for (Eigen::Index j = 0; j < p; ++j) out << ",x" << (j + 1);
  out << "\n";
  for (long long i = 0; i < traj.rows(); ++i) {
    out << traj.step_of_row(i);
    for (Eigen::Index j = 0; j < p; ++j)
      out << "," << fmt_g17(traj.samples(i, j));
    out << "\n";
  }
}

inline void write_meta(const std::string& path, const KvReport& kv) {
  std::ofstream out = open_out(path);
  write_report(out, kv);
}

inline std::map<std::string, std::string> read_meta(const std::string& path) {
  std::ifstream in = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed meta line in " + path + ": " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

struct TrajectoryFile {
  std::vector<long long> steps;
  Eigen::MatrixXd samples;
};

inline TrajectoryFile read_trajectory_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty trajectory file: " + path);
  Eigen::Index p = 0;
  for (char c : line)
    if (c == ',') ++p;
  if (p < 1)
    throw std::invalid_argument("trajectory header has no coordinates: " + path);
  std::vector<long long> steps;
  std::vector<double> flat;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    if (!std::getline(ss, tok, ','))
      throw std::invalid_argument("malformed trajectory row in " + path);
    steps.push_back(std::stoll(tok));
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::getline(ss, tok, ','))
        throw std::invalid_argument("short trajectory row in " + path);
      flat.push_back(std::stod(tok));
    }
  }
  TrajectoryFile tf;
  tf.steps = std::move(steps);
  tf.samples.resize(static_cast<Eigen::Index>(tf.steps.size()), p);
  for (Eigen::Index i = 0; i < tf.samples.rows(); ++i)
    for (Eigen::Index j = 0; j < p; ++j) tf.samples(i, j) = flat[i * p + j];
  return tf;
}

// --- dense matrix file: first line p, then p whitespace-separated rows -----

inline Eigen::MatrixXd read_matrix_file(const std::string& path) {
  std::ifstream in = open_in(path);
  int p = 0;
  if (!(in >> p) || p < 1)
    throw std::invalid_argument("matrix file must start with the dimension: " + path);
  Eigen::MatrixXd A(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (!(in >> A(i, j)))
        throw std::invalid_argument("matrix file too short: " + path);
  return A;
}

// --- logistic edge-list file -----------------------------------------------
// Header: edges=<E> cutoff=<c> sigma2=<s>
// Then one observation per line: comma-separated 0-based edge indices of the
// path, ';', then the binary response.

struct EdgeListData {
  int edges = 0;
  double cutoff = 0.0;
  double sigma2 = 1.0;
  Eigen::MatrixXd X;  // edges x n
  std::vector<int> y;
};

inline EdgeListData read_edge_list(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty edge-list file: " + path);
  EdgeListData d;
  {
    std::istringstream hs(line);
    std::string tok;
    bool have_e = false;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("malformed edge-list header: " + line);
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "edges") {
        d.edges = std::stoi(val);
        have_e = true;
      } else if (key == "cutoff") {
        d.cutoff = std::stod(val);
      } else if (key == "sigma2") {
        d.sigma2 = std::stod(val);
      } else {
        throw std::invalid_argument("unknown edge-list header key: " + key);
      }
    }
    if (!have_e || d.edges < 1)
      throw std::invalid_argument("edge-list header must declare edges >= 1");
  }
  std::vector<std::vector<int>> paths;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto semi = line.find(';');
    if (semi == std::string::npos)
      throw std::invalid_argument("edge-list observation missing ';': " + line);
    std::vector<int> path;
    std::istringstream ps(line.substr(0, semi));
    std::string tok;
    while (std::getline(ps, tok, ',')) {
      if (tok.empty()) continue;
      const int e = std::stoi(tok);
      if (e < 0 || e >= d.edges)
        throw std::invalid_argument("edge index out of range: " + tok);
      path.push_back(e);
    }
    const int resp = std::stoi(line.substr(semi + 1));
    if (resp != 0 && resp != 1)
      throw std::invalid_argument("edge-list response must be 0/1: " + line);
    paths.push_back(std::move(path));
    d.y.push_back(resp);
  }
  d.X = Eigen::MatrixXd::Zero(d.edges, static_cast<Eigen::Index>(paths.size()));
  for (std::size_t t = 0; t < paths.size(); ++t)
    for (int e : paths[t]) d.X(e, static_cast<Eigen::Index>(t)) = 1.0;
  return d;
}

// --- histograms -------------------------------------------------------------

struct HistogramData {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::vector<long long>> counts;  // per coordinate
};

inline HistogramData histogram_counts(const Eigen::MatrixXd& samples,
                                      int bins) {
  if (samples.rows() < 1)
    throw std::invalid_argument("histogram: empty sample matrix");
  if (bins < 2) throw std::invalid_argument("histogram: bins < 2");
  HistogramData h;
  h.lo = samples.minCoeff();
  h.hi = samples.maxCoeff();
  if (h.lo == h.hi) {
    h.lo -= 0.5;
    h.hi += 0.5;
  }
  h.counts.assign(static_cast<std::size_t>(samples.cols()),
                  std::vector<long long>(bins, 0));
  for (Eigen::Index j = 0; j < samples.cols(); ++j)
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      int idx = static_cast<int>((samples(i, j) - h.lo) / (h.hi - h.lo) * bins);
      idx = std::min(std::max(idx, 0), bins - 1);
      ++h.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx)];
    }
  return h;
}

inline void write_histogram_csv(const std::string& path,
                                const HistogramData& h) {
  std::ofstream out = open_out(path);
  out << "coord,bin_lo,bin_hi,count\n";
  const int bins = static_cast<int>(h.counts.empty() ? 0 : h.counts[0].size());
  const double width = (h.hi - h.lo) / bins;
  for (std::size_t j = 0; j < h.counts.size(); ++j)
    for (int i = 0; i < bins; ++i)
      out << (j + 1) << "," << fmt_g17(h.lo + i * width) << ","
          << fmt_g17(h.lo + (i + 1) * width) << "," << h.counts[j][i] << "\n";
}

// Minimal standalone SVG: one bar panel per coordinate, axis line and
// numeric range labels, no external dependencies.
inline void write_histogram_svg(const std::string& path,
                                const HistogramData& h,
                                const std::string& title) {
  const int bins = static_cast<int>(h.counts.empty() ? 0 : h.counts[0].size());
  const int panel_w = 480, panel_h = 160, margin = 40;
  const int n_coord = static_cast<int>(h.counts.size());
  const int width = panel_w + 2 * margin;
  const int height = n_coord * (panel_h + margin) + margin;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">" << title
      << "</text>\n";
  for (int j = 0; j < n_coord; ++j) {
    long long peak = 1;
    for (long long c : h.counts[j]) peak = std::max(peak, c);
    const int top = margin + j * (panel_h + margin);
    const double bw = static_cast<double>(panel_w) / bins;
    for (int i = 0; i < bins; ++i) {
      const double frac =
          static_cast<double>(h.counts[j][i]) / static_cast<double>(peak);
      const int bh = static_cast<int>(frac * (panel_h - 20));
      out << "<rect x=\"" << (margin + i * bw) << "\" y=\""
          << (top + panel_h - bh) << "\" width=\"" << (bw > 1.0 ? bw - 1.0 : bw)
          << "\" height=\"" << bh << "\" fill=\"steelblue\"/>\n";
    }
    out << "<line x1=\"" << margin << "\" y1=\"" << (top + panel_h)
        << "\" x2=\"" << (margin + panel_w) << "\" y2=\"" << (top + panel_h)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << margin << "\" y=\"" << (top + panel_h + 15)
        << "\" font-size=\"11\">" << fmt_g17(h.lo) << "</text>\n";
    out << "<text x=\"" << (margin + panel_w - 60) << "\" y=\""
        << (top + panel_h + 15) << "\" font-size=\"11\">" << fmt_g17(h.hi)
        << "</text>\n";
    out << "<text x=\"" << (margin - 35) << "\" y=\"" << (top + 12)
        << "\" font-size=\"11\">x" << (j + 1) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace plmc
