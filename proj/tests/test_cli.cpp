#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qca/timeseries.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin_path() {
  const char* p = std::getenv("QCA_CRITIC_BIN");
  REQUIRE_MESSAGE(p != nullptr, "QCA_CRITIC_BIN must point at the cli binary");
  return p;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() /
               ("qca_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct RunResult {
  int code = -1;
  std::string output;   // stdout + stderr
};

RunResult run_cli(const std::string& args, const fs::path& workdir,
                  const std::string& env_prefix = "") {
  fs::path log = workdir / "run.log";
  std::string cmd = env_prefix + " '" + bin_path() + "' " + args + " > '" +
                    log.string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

// relative path -> file bytes for a whole tree
std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("evolve writes the exact decay series plus a manifest") {
  auto dir = fresh_dir("evolve_decay");
  auto out = dir / "run";
  auto r = run_cli("evolve --backend dense --L 4 --p1 0 --p2 0.1 --T 10 --out '" +
                       out.string() + "'",
                   dir);
  CHECK(r.code == 0);
  auto ts = qca::read_csv_file((out / "series.csv").string());
  REQUIRE(ts.t.size() == 11);
  for (int t = 0; t <= 10; ++t)
    CHECK(std::abs(ts.n_mean[t] - std::pow(0.9, t)) < 1e-12);

  auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "evolve");
  CHECK(manifest["config"]["p2"] == 0.1);
  CHECK(manifest.contains("timestamp"));
  fs::remove_all(dir);
}

TEST_CASE("mps and dense backends agree through the cli") {
  auto dir = fresh_dir("backends");
  auto r1 = run_cli("evolve --backend dense --L 4 --p1 0.3 --p2 0.2 --T 10 --out '" +
                        (dir / "dense").string() + "'",
                    dir);
  auto r2 = run_cli(
      "evolve --backend mps --L 4 --p1 0.3 --p2 0.2 --T 10 --chi 64 --out '" +
          (dir / "mps").string() + "'",
      dir);
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  auto a = qca::read_csv_file((dir / "dense" / "series.csv").string());
  auto b = qca::read_csv_file((dir / "mps" / "series.csv").string());
  REQUIRE(a.t.size() == b.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i)
    CHECK(std::abs(a.n_mean[i] - b.n_mean[i]) < 1e-9);
  // the mps run also reports truncation diagnostics
  CHECK(fs::exists(dir / "mps" / "diagnostics.csv"));
  CHECK_FALSE(fs::exists(dir / "dense" / "diagnostics.csv"));
  fs::remove_all(dir);
}

TEST_CASE("exit codes follow the error taxonomy") {
  auto dir = fresh_dir("exit_codes");
  // capacity: dense row too long
  CHECK(run_cli("evolve --backend dense --L 12 --p1 0.1 --p2 0.1 --T 2 --out '" +
                    (dir / "a").string() + "'",
                dir)
            .code == 2);
  // validation: probability outside [0,1]
  CHECK(run_cli("evolve --backend dense --L 3 --p1 1.5 --p2 0.1 --T 2 --out '" +
                    (dir / "b").string() + "'",
                dir)
            .code == 1);
  // validation: unknown backend rejected by the parser
  CHECK(run_cli("evolve --backend bogus --L 3 --p1 0.1 --p2 0.1 --T 2 --out '" +
                    (dir / "c").string() + "'",
                dir)
            .code == 1);
  // io: analyze on a directory with no manifest
  CHECK(run_cli("analyze --in '" + (dir / "nowhere").string() + "' --out '" +
                    (dir / "d").string() + "'",
                dir)
            .code == 4);
  // validation: plot without inputs
  CHECK(run_cli("plot --kind series --out '" + (dir / "e.svg").string() + "'", dir)
            .code == 1);
  fs::remove_all(dir);
}

TEST_CASE("config files bind and flags win") {
  auto dir = fresh_dir("config");
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"backend":"dense","l":3,"steps":4,"p1":0.0,"p2":0.5})";
  }
  auto out1 = dir / "from_config";
  auto r1 = run_cli("evolve --config '" + (dir / "run.json").string() + "' --out '" +
                        out1.string() + "'",
                    dir);
  CHECK(r1.code == 0);
  auto ts1 = qca::read_csv_file((out1 / "series.csv").string());
  CHECK(std::abs(ts1.n_mean[1] - 0.5) < 1e-12);

  // explicit flag overrides the config value
  auto out2 = dir / "overridden";
  auto r2 = run_cli("evolve --config '" + (dir / "run.json").string() +
                        "' --p2 0.19 --out '" + out2.string() + "'",
                    dir);
  CHECK(r2.code == 0);
  auto ts2 = qca::read_csv_file((out2 / "series.csv").string());
  CHECK(std::abs(ts2.n_mean[1] - 0.81) < 1e-12);

  // unknown keys are rejected, not ignored
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"backend":"dense","bogus_knob":3})";
  }
  auto r3 = run_cli("evolve --config '" + (dir / "bad.json").string() + "' --out '" +
                        (dir / "x").string() + "'",
                    dir);
  CHECK(r3.code == 1);
  // and a missing config file is an io error
  CHECK(run_cli("evolve --config '" + (dir / "absent.json").string() + "' --out '" +
                    (dir / "y").string() + "'",
                dir)
            .code == 4);
  fs::remove_all(dir);
}

TEST_CASE("a 1x1 scan reproduces the single evolve run byte for byte") {
  auto dir = fresh_dir("scan_single");
  auto ev = dir / "evolve";
  auto sc = dir / "scan";
  CHECK(run_cli("evolve --backend dense --L 4 --p1 0.3 --p2 0.2 --T 8 --out '" +
                    ev.string() + "'",
                dir)
            .code == 0);
  CHECK(run_cli("scan --backend dense --L 4 --p1 0.3 --p2 0.2 --T 8 --jobs 1 --out '" +
                    sc.string() + "'",
                dir)
            .code == 0);
  CHECK(slurp(ev / "series.csv") == slurp(sc / "p1=0.3" / "p2=0.2" / "series.csv"));
  fs::remove_all(dir);
}

TEST_CASE("scan trees are byte-identical regardless of parallelism") {
  auto dir = fresh_dir("scan_det");
  const std::string epoch = "QCA_CRITIC_EPOCH=2026-01-05T12:00:00Z";
  const std::string grid =
      " --backend mps --L 8 --chi 16 --T 6 --p1 0.2,0.4 --p2 0.05,0.1,0.15 ";
  auto a = dir / "j1";
  auto b = dir / "j4";
  auto r1 = run_cli("scan" + grid + "--jobs 1 --out '" + a.string() + "'", dir, epoch);
  auto r2 = run_cli("scan" + grid + "--jobs 4 --out '" + b.string() + "'", dir, epoch);
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  CHECK(r1.output.find("6/6 grid points ok") != std::string::npos);

  auto ta = tree_bytes(a);
  auto tb = tree_bytes(b);
  REQUIRE(ta.size() == tb.size());
  REQUIRE(ta.size() >= 13);  // 6 series + 6 diagnostics + manifest
  for (const auto& [rel, bytes] : ta) {
    REQUIRE_MESSAGE(tb.count(rel) == 1, "missing from jobs=4 tree: " << rel);
    CHECK_MESSAGE(tb[rel] == bytes, "differs between jobs=1 and jobs=4: " << rel);
  }

  // the pinned epoch lands verbatim in the manifest
  auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["timestamp"] == "2026-01-05T12:00:00Z");
  CHECK(manifest["entries"].size() == 6);
  for (const auto& e : manifest["entries"]) CHECK(e["status"] == "ok");
  fs::remove_all(dir);
}

TEST_CASE("bit-pattern initial rows reach the scan backends") {
  auto dir = fresh_dir("scan_pattern");
  auto out = dir / "t";
  auto r = run_cli(
      "scan --backend dense --L 4 --initial 0101 --T 3 --p1 0.2 --p2 0.1 --jobs 1 --out '" +
          out.string() + "'",
      dir);
  CHECK(r.code == 0);
  auto ts = qca::read_csv_file((out / "p1=0.2" / "p2=0.1" / "series.csv").string());
  CHECK(std::abs(ts.n_mean[0] - 0.5) < 1e-15);
  // mismatched pattern length is a validation error
  CHECK(run_cli("scan --backend dense --L 4 --initial 011 --T 3 --p1 0.2 --p2 0.1 "
                "--jobs 1 --out '" +
                    (dir / "u").string() + "'",
                dir)
            .code == 1);
  fs::remove_all(dir);
}

TEST_CASE("meanfield command emits the diagram, line, and manifest") {
  auto dir = fresh_dir("meanfield");
  auto out = dir / "mf";
  auto r = run_cli(
      "meanfield --p1 1:1:1 --p2 0:0.3:7 --max-iter 2000000 --tol 1e-13 --svg --out '" +
          out.string() + "'",
      dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "phase_diagram.json"));
  CHECK(fs::exists(out / "phase_diagram.csv"));
  CHECK(fs::exists(out / "critical_line.json"));
  CHECK(fs::exists(out / "phase_diagram.svg"));
  CHECK(fs::exists(out / "manifest.json"));

  auto pd = nlohmann::json::parse(slurp(out / "phase_diagram.json"));
  auto ns = pd["n_stationary"].get<std::vector<double>>();
  REQUIRE(ns.size() == 7);
  // closed-form branch at p1 = 1: n* = max(0, 3/2 + 1/(p2-1))
  for (int j = 0; j < 7; ++j) {
    double p2 = 0.05 * j;
    double want = std::max(0.0, 1.5 + 1.0 / (p2 - 1.0));
    CHECK(std::abs(ns[j] - want) < 1e-5);
  }
  fs::remove_all(dir);
}

TEST_CASE("lindblad comparison command writes records and a slope") {
  auto dir = fresh_dir("lindblad");
  auto out = dir / "lb";
  auto r = run_cli(
      "lindblad-compare --L 2 --gamma-dt 0.04,0.02 --t-final 1 --out '" +
          out.string() + "'",
      dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "gamma_dt=0.04.json"));
  CHECK(fs::exists(out / "gamma_dt=0.02.json"));
  CHECK(fs::exists(out / "gamma_dt=0.02.svg"));
  CHECK(fs::exists(out / "discrepancies.csv"));
  CHECK(r.output.find("log-log slope") != std::string::npos);

  auto rec = nlohmann::json::parse(slurp(out / "gamma_dt=0.02.json"));
  CHECK(rec["gamma_implied"] == 1.0);
  CHECK(rec["max_abs_diff"].get<double>() < 0.05);
  fs::remove_all(dir);
}

TEST_CASE("analyze turns a scan tree into estimates") {
  auto dir = fresh_dir("analyze");
  auto tree = dir / "tree";
  auto out = dir / "ana";
  CHECK(run_cli("scan --backend dense --L 4 --T 40 --p1 0.3 --p2 0.1,0.2,0.3 "
                "--jobs 2 --out '" +
                    tree.string() + "'",
                dir)
            .code == 0);
  auto r = run_cli("analyze --in '" + tree.string() + "' --method both --out '" +
                       out.string() + "'",
                   dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "estimates.json"));
  CHECK(fs::exists(out / "estimates.csv"));
  CHECK(fs::exists(out / "alpha_p1=0.3.svg"));
  CHECK(fs::exists(out / "manifest.json"));

  auto est = nlohmann::json::parse(slurp(out / "estimates.json"));
  REQUIRE(est["estimates"].size() >= 3);  // r2, flat-alpha, averaged
  CHECK(est["t_max"] == 40);
  // windows were rescaled from the t_ref = 100 defaults to t_max = 40
  CHECK(est["fit_window_effective"][1] == 40.0);
  bool has_avg = false;
  for (const auto& e : est["estimates"])
    if (e["method"] == "averaged") has_avg = true;
  CHECK(has_avg);
  fs::remove_all(dir);
}

TEST_CASE("plot renders an svg from a series") {
  auto dir = fresh_dir("plot");
  auto run = dir / "run";
  CHECK(run_cli("evolve --backend dense --L 3 --p1 0.4 --p2 0.1 --T 12 --out '" +
                    run.string() + "'",
                dir)
            .code == 0);
  auto svg = dir / "series.svg";
  auto r = run_cli("plot --kind series --out '" + svg.string() + "' '" +
                       (run / "series.csv").string() + "'",
                   dir);
  CHECK(r.code == 0);
  auto bytes = slurp(svg);
  CHECK(bytes.rfind("<svg", 0) == 0);
  CHECK(bytes.find("</svg>") != std::string::npos);

  auto r2 = run_cli("plot --kind effective-exponent --log-x --out '" +
                        (dir / "alpha.svg").string() + "' '" +
                        (run / "series.csv").string() + "'",
                    dir);
  CHECK(r2.code == 0);
  CHECK(slurp(dir / "alpha.svg").find("</svg>") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
