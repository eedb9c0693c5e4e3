#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "phaseglm/config.hpp"

using namespace phaseglm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return std::string();
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

// Runs the installed binary through the shell, capturing exit code and both
// streams. `env_prefix` lets a test set environment variables for one run.
RunResult run_bin(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const std::string out_path = "cli_run_out_" + std::to_string(counter);
  const std::string err_path = "cli_run_err_" + std::to_string(counter);
  ++counter;
  std::string cmd = env_prefix;
  if (!cmd.empty()) cmd += " ";
  cmd += std::string("\"") + PHASEGLM_BIN + "\" " + args + " > " + out_path +
         " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Config store

TEST_CASE("config: layer precedence and typed getters") {
  Config cfg;
  cfg.set_default("a.x", "1");
  cfg.set("a.x", "2");
  cfg.set_default("a.x", "3");  // defaults never override
  CHECK(cfg.get_int("a.x", 0) == 2);
  CHECK(cfg.require("a.x") == "2");
  CHECK(cfg.user_keys().count("a.x") == 1);
  CHECK(cfg.touched().count("a.x") == 1);

  Config defaults_only;
  defaults_only.set_default("d.y", "4");
  CHECK(defaults_only.get_int("d.y", 0) == 4);
  CHECK(defaults_only.user_keys().empty());

  CHECK(cfg.get_double("absent", 2.5) == 2.5);
  CHECK_FALSE(cfg.has("absent2"));
  CHECK_THROWS_AS(cfg.require("absent3"), ConfigError);

  cfg.set("bad", "12q");
  CHECK_THROWS_AS(cfg.get_int("bad", 0), ConfigError);
  CHECK_THROWS_AS(cfg.get_double("bad", 0.0), ConfigError);
  cfg.set("huge", "9999999999999999999999");
  CHECK_THROWS_AS(cfg.get_int("huge", 0), ConfigError);

  cfg.set("f1", "YES");
  cfg.set("f2", "off");
  cfg.set("f3", "maybe");
  CHECK(cfg.get_bool("f1", false));
  CHECK_FALSE(cfg.get_bool("f2", true));
  CHECK_THROWS_AS(cfg.get_bool("f3", true), ConfigError);

  cfg.set("seed", "18446744073709551615");
  CHECK(cfg.get_u64("seed", 0) == 18446744073709551615ull);
}

TEST_CASE("config: lists and grids") {
  Config cfg;
  cfg.set("g.list", "1, 2.5  ,3");
  const std::vector<double> want = {1.0, 2.5, 3.0};
  CHECK(cfg.get_list("g.list") == want);

  cfg.set("h.lo", "0.1");
  cfg.set("h.hi", "0.3");
  cfg.set("h.step", "0.1");
  const auto grid = cfg.get_grid("h", {});
  REQUIRE(grid.size() == 3);
  CHECK(grid[2] == doctest::Approx(0.3).epsilon(1e-15));

  // An explicit list beats lo/hi/step under the same prefix.
  cfg.set("h.list", "9");
  const std::vector<double> nine = {9.0};
  CHECK(cfg.get_grid("h", {}) == nine);

  // Absent prefix falls back; partial lo/hi/step is an error.
  const std::vector<double> fb = {7.0};
  CHECK(cfg.get_grid("nothing", fb) == fb);
  cfg.set("part.lo", "0");
  CHECK_THROWS_AS(cfg.get_grid("part", {}), ConfigError);

  Config bad;
  bad.set("k.lo", "1");
  bad.set("k.hi", "0");
  bad.set("k.step", "0.1");
  CHECK_THROWS_AS(bad.get_grid("k", {}), ConfigError);  // hi < lo

  cfg.set("bl.list", "1,x");
  CHECK_THROWS_AS(cfg.get_list("bl.list"), ConfigError);
  cfg.set("empty.list", " , ");
  CHECK_THROWS_AS(cfg.get_list("empty.list"), ConfigError);
}

TEST_CASE("config: file parsing and overrides") {
  const std::string path = "cli_test_config.txt";
  write_file(path,
             "# comment line\n"
             "\n"
             "  model.alpha0 = 1.5  \n"
             "radial.family=gamma\n"
             "note.text = a=b\n");
  Config cfg;
  load_config_file(cfg, path);
  CHECK(cfg.get_double("model.alpha0", 0.0) == 1.5);
  CHECK(cfg.get_string("radial.family", "") == "gamma");
  CHECK(cfg.get_string("note.text", "") == "a=b");  // split at first '='
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_config_file(cfg, "no_such_config_file.txt"),
                  ConfigError);

  write_file(path, "model.alpha0 = 1\njust words\n");
  CHECK_THROWS_AS(load_config_file(cfg, path), ConfigError);
  std::remove(path.c_str());

  apply_override(cfg, "x.y = 3");
  CHECK(cfg.get_int("x.y", 0) == 3);
  CHECK_THROWS_AS(apply_override(cfg, "noequals"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "=value"), ConfigError);
}

TEST_CASE("config: enum spellings round-trip") {
  CHECK(link_from_string("logit") == Link::Logit);
  CHECK(link_from_string("probit") == Link::Probit);
  CHECK(link_from_string("cloglog") == Link::Cloglog);
  CHECK(std::string(link_name(Link::Probit)) == "probit");
  CHECK_THROWS_AS(link_from_string("cauchit"), ConfigError);

  for (const char* name : {"chi", "gamma", "pareto", "halfnormal",
                           "lognormal"})
    CHECK(std::string(family_name(family_from_string(name))) == name);
  CHECK_THROWS_AS(family_from_string("weibull"), ConfigError);
}

// ---------------------------------------------------------------------------
// Binary: argument handling

TEST_CASE("cli: help, missing subcommand, bad profile") {
  const RunResult help = run_bin("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
  CHECK(help.out.find("moments") != std::string::npos);

  CHECK(run_bin("").code == 2);
  CHECK(run_bin("--profile bogus moments radial.family=gamma").code == 2);
  CHECK(run_bin("separate").code == 2);  // dataset path is required
}

TEST_CASE("cli: separate classifies datasets end to end") {
  ScratchDir dir("cli_sep_scratch");

  // 0/1 labels are accepted and remapped; this dataset splits at x = 0.
  write_file(dir.file("complete.csv"),
             "y,x1\n1,1\n1,2\n0,-1\n0,-2\n");
  RunResult r = run_bin("separate " + dir.file("complete.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("kind: complete") != std::string::npos);
  CHECK(r.out.find("lp_objective:") != std::string::npos);
  CHECK(r.out.find("certificate:") != std::string::npos);

  // Identical covariates with both labels pin the threshold to a boundary.
  write_file(dir.file("quasi.csv"), "y,x1\n1,0\n-1,0\n1,1\n");
  r = run_bin("separate " + dir.file("quasi.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("kind: quasicomplete") != std::string::npos);
  CHECK(r.out.find("certificate:") != std::string::npos);

  // Sign pattern +,-,+ along one axis cannot be linearly separated.
  write_file(dir.file("overlap.csv"), "y,x1\n1,1\n-1,2\n1,3\n");
  r = run_bin("separate " + dir.file("overlap.csv"));
  CHECK(r.code == 0);
  CHECK(r.out.find("kind: overlap") != std::string::npos);
  CHECK(r.out.find("certificate:") == std::string::npos);

  // Malformed inputs exit 2 with a diagnostic.
  r = run_bin("separate " + dir.file("missing.csv"));
  CHECK(r.code == 2);
  CHECK(r.err.find("cannot read") != std::string::npos);
  write_file(dir.file("badheader.csv"), "a,b\n1,2\n");
  CHECK(run_bin("separate " + dir.file("badheader.csv")).code == 2);
  write_file(dir.file("badcell.csv"), "y,x1\n1,fish\n");
  CHECK(run_bin("separate " + dir.file("badcell.csv")).code == 2);
  write_file(dir.file("badlabel.csv"), "y,x1\n2,0.5\n");
  CHECK(run_bin("separate " + dir.file("badlabel.csv")).code == 2);
  write_file(dir.file("empty.csv"), "y,x1\n");
  CHECK(run_bin("separate " + dir.file("empty.csv")).code == 2);
}

TEST_CASE("cli: moments writes a table and a manifest") {
  ScratchDir dir("cli_mom_scratch");
  const RunResult r = run_bin(
      "moments --out-dir " + dir.path.string() +
      " --seed 7 radial.family=gamma moments.kmax=6 moments.p=5");
  CHECK(r.code == 0);
  CHECK(r.out.find("moment-growth verdict") != std::string::npos);

  const std::string csv = slurp(dir.file("moments.csv"));
  CHECK(csv.rfind(
            "k,radial_moment,projection_moment,carleman_term,carleman_partial"
            "\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 6);

  const std::string man = slurp(dir.file("manifest.json"));
  CHECK(man.find("\"tool\": \"phaseglm\"") != std::string::npos);
  CHECK(man.find("\"command\": \"moments\"") != std::string::npos);
  CHECK(man.find("\"master_seed\": 7") != std::string::npos);
  CHECK(man.find("\"profile\": \"desk\"") != std::string::npos);
  CHECK(man.find("moments.csv") != std::string::npos);
}

TEST_CASE("cli: unknown keys are rejected, foreign namespaces tolerated") {
  ScratchDir dir("cli_keys_scratch");
  const std::string base =
      "moments --out-dir " + dir.path.string() + " radial.family=gamma ";

  RunResult r = run_bin(base + "bogus.key=1");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown config key") != std::string::npos);

  r = run_bin(base + "moments.nope=1");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown config key 'moments.nope'") != std::string::npos);

  // Keys for other subcommands pass through so one file drives several runs.
  CHECK(run_bin(base + "sweep.n=50").code == 0);

  // Missing required key.
  r = run_bin("moments --out-dir " + dir.path.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("radial.family") != std::string::npos);
}

TEST_CASE("cli: config file feeds runs; flags win over files") {
  ScratchDir dir("cli_file_scratch");
  write_file(dir.file("run.cfg"),
             "radial.family = gamma\n"
             "moments.kmax = 4\n"
             "seed = 99\n");
  const std::string base = "moments --config " + dir.file("run.cfg") +
                           " --out-dir " + dir.path.string();

  RunResult r = run_bin(base);
  CHECK(r.code == 0);
  CHECK(count_lines(slurp(dir.file("moments.csv"))) == 1 + 4);
  CHECK(slurp(dir.file("manifest.json")).find("\"master_seed\": 99") !=
        std::string::npos);

  r = run_bin(base + " --seed 123");
  CHECK(r.code == 0);
  CHECK(slurp(dir.file("manifest.json")).find("\"master_seed\": 123") !=
        std::string::npos);

  CHECK(run_bin("moments --config no_such.cfg radial.family=gamma").code == 2);
}

TEST_CASE("cli: sweep end to end, thread-count invariant") {
  ScratchDir a("cli_sweep_a");
  ScratchDir b("cli_sweep_b");
  const std::string common =
      " --seed 3 radial.family=chi sweep.n=40 sweep.replicates=4"
      " sweep.gamma.list=1,5 sweep.kappa.lo=0.1 sweep.kappa.hi=0.5"
      " sweep.kappa.step=0.2 sweep.theory.replicates=0";
  const RunResult ra =
      run_bin("sweep --out-dir " + a.path.string() + " --threads 1" + common);
  const RunResult rb =
      run_bin("sweep --out-dir " + b.path.string() + " --threads 3" + common);
  CHECK(ra.code == 0);
  CHECK(rb.code == 0);
  CHECK(ra.out.find("mean uncertainty width") != std::string::npos);

  const std::string grid_a = slurp(a.file("sweep_grid.csv"));
  const std::string grid_b = slurp(b.file("sweep_grid.csv"));
  REQUIRE_FALSE(grid_a.empty());
  CHECK(grid_a == grid_b);
  CHECK(grid_a.rfind("gamma0,kappa,p,n,replicates,proportion,failed\n", 0) ==
        0);
  CHECK(count_lines(grid_a) == 1 + 2 * 3);

  CHECK(slurp(a.file("sweep_heatmap.ppm")).rfind("P6\n", 0) == 0);
  CHECK(slurp(a.file("sweep_summary.csv"))
            .rfind("gamma0,h05,band_lo,band_hi,h_mle_theory\n", 0) == 0);
  CHECK(slurp(a.file("manifest.json")).find("\"miw\"") != std::string::npos);
}

TEST_CASE("cli: hmle end to end with plateau report") {
  ScratchDir dir("cli_hmle_scratch");
  const RunResult r = run_bin(
      "hmle --out-dir " + dir.path.string() +
      " --seed 5 --threads 1 radial.family=chi hmle.n=150 hmle.replicates=3"
      " hmle.p.list=6,45 model.gamma0=1");
  CHECK(r.code == 0);
  CHECK(r.out.find("plateau") != std::string::npos);

  const std::string csv = slurp(dir.file("hmle.csv"));
  CHECK(csv.rfind("gamma0,kappa,p,n,replicates,h_mle,spread\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 2);
  CHECK(csv.find("1,0.04,6,150,3,") != std::string::npos);
  CHECK(csv.find("1,0.3,45,150,3,") != std::string::npos);
  CHECK(slurp(dir.file("manifest.json")).find("\"plateau\"") !=
        std::string::npos);
}

TEST_CASE("cli: check end to end on reduced sizes") {
  ScratchDir dir("cli_check_scratch");
  const RunResult r = run_bin(
      "check --out-dir " + dir.path.string() +
      " --seed 11 --threads 1 radial.family=chi check.mc_samples=5000"
      " check.grid.points=41 check.n_list=20,40 check.sstd.datasets=500"
      " check.sstd.n=12");
  CHECK(r.code == 0);
  CHECK(r.out.find("one-sided mass sup") != std::string::npos);
  CHECK(r.out.find("separation probability") != std::string::npos);

  CHECK(slurp(dir.file("gfunctions.csv"))
            .rfind("x,G_plus,G_minus,Gbar_plus,Gbar_minus\n", 0) == 0);
  CHECK(count_lines(slurp(dir.file("gfunctions.csv"))) == 1 + 41);
  const std::string pg = slurp(dir.file("pg_condition.csv"));
  CHECK(pg.rfind("n,scaled_plus,scaled_minus,se\n", 0) == 0);
  CHECK(count_lines(pg) == 1 + 2);
  CHECK(slurp(dir.file("carleman.csv")).rfind("k,term,partial_sum\n", 0) == 0);
  CHECK(slurp(dir.file("sstd.csv"))
            .rfind("n,p,formula,formula_se,simulated,datasets,binomial_se,"
                   "agrees\n", 0) == 0);
  CHECK(slurp(dir.file("manifest.json")).find("\"sstd_agrees\"") !=
        std::string::npos);
}

TEST_CASE("cli: runtime failures and thread-count errors") {
  ScratchDir dir("cli_err_scratch");
  // kappa * n rounding below 1 surfaces as a runtime error, exit 3.
  RunResult r = run_bin(
      "sweep --out-dir " + dir.path.string() +
      " radial.family=chi sweep.n=40 sweep.replicates=1 sweep.gamma.list=1"
      " sweep.kappa.list=0.001 sweep.theory.replicates=0");
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") != std::string::npos);

  r = run_bin("moments radial.family=gamma --out-dir " + dir.path.string(),
              "PHASEGLM_THREADS=abc");
  CHECK(r.code == 2);
  CHECK(r.err.find("PHASEGLM_THREADS") != std::string::npos);

  CHECK(run_bin("moments radial.family=gamma --threads -1 --out-dir " +
                dir.path.string())
            .code == 2);
}
