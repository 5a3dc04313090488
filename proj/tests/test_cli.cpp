#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bcp_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args, const fs::path& dir,
              const std::string& env_prefix = "") {
  const fs::path log = dir / "run.log";
  const std::string cmd = env_prefix + "\"" + BCP_CLI_PATH + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli usage errors do not reach the model layer") {
  const fs::path dir = fresh_dir("usage");
  CHECK(run("", dir).code != 0);
  CHECK(run("--help", dir).code == 0);
  CHECK(run("exact --help", dir).code == 0);
  // --pair wants exactly two indices
  CHECK(run("exact --graph path:3 --a 0.5 --p 0.5 --pair 0 --out-dir \"" +
                dir.string() + "\"",
            dir)
            .code != 0);
}

TEST_CASE("exact graph mode writes sorted tables and the partition identity") {
  const fs::path dir = fresh_dir("exact1");
  const RunResult r = run("exact --graph path:3 --a 0.4 --p 0.5 --q 2 --pair 0 2 --out-dir \"" +
                              dir.string() + "\"",
                          dir);
  INFO(r.output);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "theta.csv"));
  CHECK(fs::exists(dir / "vertex.csv"));
  CHECK(fs::exists(dir / "edge.csv"));
  CHECK(fs::exists(dir / "spins.csv"));
  CHECK(r.output.find("identity check") != std::string::npos);
  CHECK(r.output.find("two-point tau(0, 2)") != std::string::npos);

  // reruns are byte-identical
  const fs::path dir2 = fresh_dir("exact2");
  const RunResult r2 = run("exact --graph path:3 --a 0.4 --p 0.5 --q 2 --pair 0 2 --out-dir \"" +
                               dir2.string() + "\"",
                           dir2);
  REQUIRE(r2.code == 0);
  CHECK(slurp(dir / "theta.csv") == slurp(dir2 / "theta.csv"));
  CHECK(slurp(dir / "spins.csv") == slurp(dir2 / "spins.csv"));
}

TEST_CASE("exact json format and the coupling chart") {
  const fs::path dir = fresh_dir("exactjson");
  const RunResult r = run("exact --graph complete:2 --K 0.8 --Delta -0.3 --format json --out-dir \"" +
                              dir.string() + "\"",
                          dir);
  INFO(r.output);
  REQUIRE(r.code == 0);
  const nlohmann::json theta = nlohmann::json::parse(slurp(dir / "theta.json"));
  CHECK(theta["rows"].size() == 5);  // single edge: 4 vertex patterns + open bond
  CHECK(theta["params"]["K"].get<double>() == Catch::Approx(0.8).epsilon(1e-14));
  CHECK(theta["params"]["a"].get<double>() > 0.0);
}

TEST_CASE("exact region mode emits cluster tables only") {
  const fs::path dir = fresh_dir("exactregion");
  const RunResult r = run("exact --boundary one --dim 1 --box-n 1 --a 0.4 --p 0.6 --out-dir \"" +
                              dir.string() + "\"",
                          dir);
  INFO(r.output);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("box [-1, 1]^1") != std::string::npos);
  CHECK(r.output.find("graph-mode only") != std::string::npos);
  CHECK(fs::exists(dir / "theta.csv"));
  CHECK_FALSE(fs::exists(dir / "spins.csv"));
}

TEST_CASE("exit codes distinguish validation from capacity") {
  const fs::path dir = fresh_dir("codes");
  CHECK(run("exact --graph path:3 --a 1.5 --p 0.5", dir).code == 1);
  CHECK(run("exact --graph path:3 --a 0.5 --p 0.5 --K 1.0", dir).code == 1);
  CHECK(run("exact --graph path:3", dir).code == 1);  // no chart pinned
  CHECK(run("exact --graph complete:7 --a 0.5 --p 0.5", dir).code == 2);
  CHECK(run("sample --graph path:3 --a 0.4 --p 0.5 --q 2.5 --sweeps 10", dir).code == 1);
}

TEST_CASE("dominance reports the four checks with witnesses") {
  const fs::path dir = fresh_dir("dom");
  const fs::path out = dir / "report.json";
  const RunResult r = run(
      "dominance --a1 0.3 --p1 0.2 --a2 0.6 --p2 0.5 --q 2 --graph path:3 --out \"" +
          out.string() + "\"",
      dir);
  INFO(r.output);
  REQUIRE(r.code == 0);
  const nlohmann::json report = nlohmann::json::parse(slurp(out));
  CHECK(report["graph"] == "path:3");
  CHECK(report["measure1"]["a"].get<double>() == 0.3);
  REQUIRE(report["checks"].size() == 4);
  bool saw_dominance = false;
  for (const auto& c : report["checks"]) {
    if (c["check"] == "dominance_upsets") {
      saw_dominance = true;
      CHECK(c["ok"] == true);  // parameters increase componentwise at q = 2
    }
  }
  CHECK(saw_dominance);

  CHECK(run("dominance --a1 0.3 --p1 0.2 --a2 1.0 --p2 0.5", dir).code == 1);
}

TEST_CASE("sample precedence: flag beats environment beats config file") {
  const fs::path dir = fresh_dir("precedence");
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "a = 0.4\np = 0.5\nq = 2\ngraph = \"path:3\"\n"
        << "sweeps = 20\nburn_in = 5\nseed = 9\n";
  }
  const std::string base = "sample --config \"" + cfg.string() + "\" --out-dir \"";

  auto seed_of = [&](const fs::path& d, const std::string& extra_flags,
                     const std::string& env) {
    const RunResult r = run(base + d.string() + "\" " + extra_flags, d, env);
    INFO(r.output);
    REQUIRE(r.code == 0);
    return nlohmann::json::parse(slurp(d / "metadata.json"))["seed"].get<std::uint64_t>();
  };
  CHECK(seed_of(fresh_dir("prec_cfg"), "", "") == 9);
  CHECK(seed_of(fresh_dir("prec_env"), "", "BCP_SEED=5 ") == 5);
  CHECK(seed_of(fresh_dir("prec_flag"), "--seed 7", "BCP_SEED=5 ") == 7);

  const fs::path bad = dir / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "a = 0.4\np = 0.5\ncolor = \"red\"\n";
  }
  CHECK(run("sample --config \"" + bad.string() + "\"", dir).code != 0);
}

TEST_CASE("sample runs are reproducible and resumable") {
  const fs::path d1 = fresh_dir("samp1");
  const fs::path d2 = fresh_dir("samp2");
  const std::string common = "sample --graph path:3 --a 0.4 --p 0.5 --q 2 "
                             "--sweeps 50 --burn-in 10 --seed 3 --out-dir \"";
  const RunResult r1 =
      run(common + d1.string() + "\" --checkpoint-out \"" + (d1 / "cp.json").string() + "\"",
          d1);
  INFO(r1.output);
  REQUIRE(r1.code == 0);
  const RunResult r2 = run(common + d2.string() + "\"", d2);
  REQUIRE(r2.code == 0);
  CHECK(slurp(d1 / "series.csv") == slurp(d2 / "series.csv"));

  const nlohmann::json meta = nlohmann::json::parse(slurp(d1 / "metadata.json"));
  CHECK(meta["n_sites"] == 3);
  CHECK(meta["sweeps_done"] == 50);
  CHECK(meta["recorded"] == 40);

  const fs::path d3 = fresh_dir("samp3");
  const RunResult r3 = run("sample --graph path:3 --a 0.4 --p 0.5 --q 2 --sweeps 50 "
                           "--burn-in 10 --resume \"" +
                               (d1 / "cp.json").string() + "\" --out-dir \"" +
                               d3.string() + "\"",
                           d3);
  INFO(r3.output);
  REQUIRE(r3.code == 0);
  const nlohmann::json meta3 = nlohmann::json::parse(slurp(d3 / "metadata.json"));
  CHECK(meta3["sweeps_done"] == 100);
  CHECK(meta3["recorded"] == 50);  // past burn-in, every sweep records
}

TEST_CASE("scan writes grid tables and gnuplot matrices") {
  const fs::path dir = fresh_dir("scan");
  const std::string cmd = "scan --a-min 0.3 --a-max 0.6 --a-steps 2 "
                          "--p-min 0.2 --p-max 0.4 --p-steps 2 --q 2 --dim 1 --box-n 1 "
                          "--boundary one --sweeps 32 --burn-in 8 "
                          "--matrix open_vertex_density --out-dir \"" +
                          dir.string() + "\"";
  const RunResult r = run(cmd, dir);
  INFO(r.output);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "scan.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 grid rows

  const std::string mat = slurp(dir / "matrix_open_vertex_density.dat");
  std::istringstream min(mat);
  std::string first;
  std::getline(min, first);
  CHECK(first.substr(0, 2) == "2 ");  // two p columns
  CHECK(std::count(mat.begin(), mat.end(), '\n') == 3);

  CHECK(run("scan --a-steps 2 --p-steps 2 --dim 1 --box-n 1 --sweeps 16 --burn-in 4 "
            "--matrix no_such_observable --out-dir \"" +
                dir.string() + "\"",
            dir)
            .code == 1);
}

TEST_CASE("constants subcommand prints the reference table and flags") {
  const fs::path dir = fresh_dir("consts");
  const RunResult text = run("constants", dir);
  REQUIRE(text.code == 0);
  CHECK(text.output.find("pi_c") != std::string::npos);
  CHECK(text.output.find("0.586") != std::string::npos);

  const RunResult js = run("constants --json --a 0.5 --p 0.3", dir);
  REQUIRE(js.code == 0);
  const nlohmann::json j = nlohmann::json::parse(js.output);
  CHECK(j.contains("pi_c"));
  REQUIRE(j.contains("point"));
  CHECK(j["point"]["a"] == 0.5);
  CHECK(j["point"]["flags"]["no_iec_line"] == true);

  CHECK(run("constants --a 0.5", dir).code != 0);  // --a needs --p
}
