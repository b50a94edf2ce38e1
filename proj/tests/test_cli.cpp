#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "plmc/io.hpp"

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliFixture {
  fs::path dir;
  std::string cli;
  CliFixture() : dir(fs::current_path() / "cli_test_tmp") {
    fs::create_directories(dir);
    const char* env = std::getenv("PLMC_CLI");
    REQUIRE_MESSAGE(env != nullptr, "PLMC_CLI must point at the binary");
    cli = env;
  }
  ~CliFixture() { fs::remove_all(dir); }

  CmdResult run(const std::string& args) const {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = "\"" + cli + "\" " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int st = std::system(cmd.c_str());
    CmdResult r;
    r.code = (st >= 0 && WIFEXITED(st)) ? WEXITSTATUS(st) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }
};

std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
  CliFixture f;
  CHECK(f.run("").code == 2);
  CHECK(f.run("sample --target mixture --a 0.5,0 --precond identity --iters 10")
            .code == 2);  // missing --gamma
  CHECK(f.run("sample --target unknown --gamma 0.1 --iters 10").code == 2);
  CHECK(f.run("--help").code == 0);
}

TEST_CASE("infeasible theory requests exit with code 4") {
  CliFixture f;
  const CmdResult r = f.run(
      "plan --target mixture --a 0.9999 --precond identity --epsilon 0.1 "
      "--alpha-exp 5");
  CHECK(r.code == 4);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("diverging chains exit with code 3") {
  CliFixture f;
  const CmdResult r = f.run(
      "sample --target mixture --a 0.5,0 --precond identity --gamma 100 "
      "--iters 50 --x0 1,1 --out-dir " +
      (f.dir / "div").string());
  CHECK(r.code == 3);
  CHECK(r.err.find("step") != std::string::npos);
}

TEST_CASE("step sizes outside the admissible interval warn on stderr") {
  CliFixture f;
  const CmdResult r = f.run(
      "sample --target mixture --a 0.5,0 --precond identity --gamma 1.6 "
      "--iters 5 --out-dir " +
      (f.dir / "warn").string());
  CHECK(r.code == 0);
  CHECK(r.err.find("outside the admissible interval") != std::string::npos);
}

TEST_CASE("planning reports the scalar Gaussian horizon") {
  CliFixture f;
  const CmdResult r = f.run(
      "plan --target mixture --a 0 --precond identity --epsilon 0.1");
  REQUIRE(r.code == 0);
  const auto kv = parse_report(r.out);
  CHECK(std::stod(kv.at("T")) ==
        doctest::Approx(2.995732273553991).epsilon(1e-12));
  CHECK(kv.at("kappa_convention") == "appendix");
  CHECK(kv.at("degenerate") == "false");
  CHECK(std::stoll(kv.at("K")) >= 1);

  // Byte-identical rerun through --out.
  const std::string out1 = (f.dir / "plan1.txt").string();
  const std::string out2 = (f.dir / "plan2.txt").string();
  const std::string args =
      "plan --target mixture --a 0 --precond identity --epsilon 0.05 --out ";
  CHECK(f.run(args + out1).code == 0);
  CHECK(f.run(args + out2).code == 0);
  const std::string c1 = slurp(out1);
  CHECK_FALSE(c1.empty());
  CHECK(c1 == slurp(out2));
}

TEST_CASE("sampling metadata reproduces each replicate exactly") {
  CliFixture f;
  const fs::path d1 = f.dir / "runA", d2 = f.dir / "runB";
  const CmdResult r = f.run(
      "sample --target mixture --a 0.5,0 --precond ar1:0.5 --gamma 0.1 "
      "--iters 200 --replicates 2 --seed 9 --burn-in 10 --record-every 2 "
      "--x0 1,-1 --out-dir " +
      d1.string());
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(d1 / "rep0001.csv"));

  const auto meta = plmc::read_meta((d1 / "rep0001.meta").string());
  std::string args = "sample";
  for (const char* k : {"target", "a", "precond", "gamma", "iters", "burn-in",
                        "record-every", "seed", "stream", "x0"})
    args += std::string(" --") + k + " " + meta.at(k);
  args += " --replicates 1 --out-dir " + d2.string();
  REQUIRE(f.run(args).code == 0);
  const std::string replay = slurp(d2 / "rep0000.csv");
  CHECK_FALSE(replay.empty());
  CHECK(replay == slurp(d1 / "rep0001.csv"));
}

TEST_CASE("config files supply flags and the command line wins") {
  CliFixture f;
  const fs::path cfg = f.dir / "run.cfg";
  const fs::path d1 = f.dir / "cfgA", d2 = f.dir / "cfgB", d3 = f.dir / "cfgC";
  {
    std::ofstream out(cfg);
    out << "target=mixture\n"
        << "a=0.5,0\n"
        << "# comments and blank lines are skipped\n\n"
        << "gamma=0.1\n"
        << "iters=120\n"
        << "seed=7\n"
        << "x0=1,-1\n"
        << "out-dir=" << d1.string() << "\n";
  }
  REQUIRE(f.run("sample --config " + cfg.string()).code == 0);
  REQUIRE(fs::exists(d1 / "rep0000.csv"));

  // The same flags spelled out reproduce the same trajectory.
  REQUIRE(f.run("sample --target mixture --a 0.5,0 --gamma 0.1 --iters 120 "
                "--seed 7 --x0 1,-1 --out-dir " +
                d2.string())
              .code == 0);
  CHECK(slurp(d2 / "rep0000.csv") == slurp(d1 / "rep0000.csv"));

  // An explicit flag beats the file value.
  REQUIRE(f.run("sample --config " + cfg.string() + " --seed 8 --out-dir " +
                d3.string())
              .code == 0);
  const auto meta = plmc::read_meta((d3 / "rep0000.meta").string());
  CHECK(meta.at("seed") == "8");
  CHECK(slurp(d3 / "rep0000.csv") != slurp(d1 / "rep0000.csv"));

  // Malformed and missing files are usage errors.
  const fs::path bad = f.dir / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "no equals sign here\n";
  }
  CHECK(f.run("sample --config " + bad.string()).code == 2);
  CHECK(f.run("sample --config " + (f.dir / "absent.cfg").string()).code == 2);
}

TEST_CASE("convergence bounds report the certified constants") {
  CliFixture f;
  const CmdResult r = f.run(
      "bounds --target mixture --a 0.5,0 --precond identity --gamma 0.5");
  REQUIRE(r.code == 0);
  const auto kv = parse_report(r.out);
  CHECK(std::stod(kv.at("gamma_lo")) <= 1e-15);
  CHECK(std::stod(kv.at("gamma_hi")) ==
        doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::stod(kv.at("rho")) > 0.0);

  // Scalar metric: the small-set measure is exact, so the minorization
  // constant matches its closed form.
  const CmdResult s = f.run(
      "bounds --target mixture --a 0 --precond identity --gamma 0.5 "
      "--alpha 0.875");
  REQUIRE(s.code == 0);
  const auto skv = parse_report(s.out);
  CHECK(std::stod(skv.at("mu_leb_se")) == 0.0);
  CHECK(std::stod(skv.at("eta")) ==
        doctest::Approx(1.7335342853808477e-05).epsilon(1e-9));
}

TEST_CASE("projection intervals from recorded trajectories") {
  CliFixture f;
  const fs::path d = f.dir / "infer_run";
  REQUIRE(f.run("sample --target mixture --a 0 --precond identity --gamma 0.5 "
                "--iters 300 --out-dir " +
                d.string())
              .code == 0);
  const std::string traj = (d / "rep0000.csv").string();

  CHECK(f.run("infer --traj " + traj + " --u 2").code == 2);  // not unit

  const CmdResult r = f.run("infer --traj " + traj + " --u 1 --n-batches 10");
  REQUIRE(r.code == 0);
  const auto kv = parse_report(r.out);
  const double lo = std::stod(kv.at("lo")), hi = std::stod(kv.at("hi"));
  CHECK(lo + hi == 2.0 * std::stod(kv.at("point_estimate")));
  CHECK(hi >= lo);
  CHECK(kv.at("k") == "300");
}

TEST_CASE("distribution distances between a trajectory and itself") {
  CliFixture f;
  const fs::path d = f.dir / "met_run";
  REQUIRE(f.run("sample --target mixture --a 0.5,0 --precond identity "
                "--gamma 0.2 --iters 100 --out-dir " +
                d.string())
              .code == 0);
  const std::string traj = (d / "rep0000.csv").string();
  const CmdResult r = f.run("metrics --a " + traj + " --b " + traj);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("coord,w2,tv") != std::string::npos);
  CHECK(r.out.find("1,0,0") != std::string::npos);
  CHECK(r.out.find("2,0,0") != std::string::npos);
}

}  // TEST_SUITE
