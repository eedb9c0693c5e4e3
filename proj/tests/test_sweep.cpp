#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phaseglm/sweep.hpp"

using namespace phaseglm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// A hand-filled grid: one gamma0 column over six kappa values.
PhaseGrid synthetic_column(const std::vector<double>& props, int replicates) {
  PhaseGrid grid;
  grid.gamma_grid = {1.0};
  grid.kappa_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  grid.kappa_grid.resize(props.size());
  grid.n = 100;
  grid.replicates = replicates;
  grid.p_at_kappa.assign(props.size(), 10);
  grid.proportion.resize(static_cast<int>(props.size()), 1);
  for (std::size_t k = 0; k < props.size(); ++k)
    grid.proportion(static_cast<int>(k), 0) = props[k];
  grid.failed.setZero(static_cast<int>(props.size()), 1);
  return grid;
}

}  // namespace

TEST_CASE("grid_range: inclusive endpoints and validation") {
  const std::vector<double> g = grid_range(0.1, 0.3, 0.1);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(grid_range(1.0, 1.0, 0.5).size() == 1);
  CHECK(grid_range(0.005, 0.6, 0.005).size() == 120);
  CHECK_THROWS_AS(grid_range(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(grid_range(1.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("isotonic_nonincreasing: frozen poolings") {
  const std::vector<double> untouched = {3.0, 2.0, 2.0, 1.0};
  CHECK(isotonic_nonincreasing(untouched) == untouched);

  const auto pooled = isotonic_nonincreasing({1.0, 2.0});
  CHECK(pooled[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(pooled[1] == doctest::Approx(1.5).epsilon(1e-15));

  const auto mid = isotonic_nonincreasing({0.2, 0.8, 0.5});
  for (double v : mid) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));

  const auto all = isotonic_nonincreasing({1.0, 3.0, 2.0, 4.0});
  for (double v : all) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));

  // The projection preserves the total mass and is idempotent.
  const std::vector<double> v = {0.9, 0.95, 0.4, 0.45, 0.1, 0.2, 0.0};
  const auto w = isotonic_nonincreasing(v);
  double sv = 0.0, sw = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sv += v[i];
    sw += w[i];
    if (i > 0) CHECK(w[i] <= w[i - 1] + 1e-15);
  }
  CHECK(sv == doctest::Approx(sw).epsilon(1e-12));
  CHECK(isotonic_nonincreasing(w) == w);
}

TEST_CASE("summarize_transition: interpolated crossing, band, discrepancy") {
  const PhaseGrid grid =
      synthetic_column({1.0, 1.0, 0.8, 0.4, 0.0, 0.0}, /*replicates=*/10);
  const TransitionSummary sum = summarize_transition(grid, {0.36});
  REQUIRE(sum.columns.size() == 1);
  const TransitionColumn& col = sum.columns[0];
  CHECK(col.gamma0 == 1.0);
  REQUIRE(col.h05.has_value());
  // 0.5 sits 75% of the way from 0.8 (at 0.3) to 0.4 (at 0.4).
  CHECK(*col.h05 == doctest::Approx(0.375).epsilon(1e-12));
  // Band: the 0.9 and 0.1 crossings with 10 replicates.
  CHECK(col.band_lo == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(col.band_hi == doctest::Approx(0.475).epsilon(1e-12));
  CHECK(sum.miw == doctest::Approx(0.225).epsilon(1e-12));
  REQUIRE(col.theory.has_value());
  CHECK(*col.theory == 0.36);
  REQUIRE(sum.md.has_value());
  CHECK(*sum.md == doctest::Approx(0.015).epsilon(1e-10));
}

TEST_CASE("summarize_transition: smooths non-monotone columns first") {
  const PhaseGrid grid =
      synthetic_column({1.0, 0.7, 0.8, 0.2, 0.0, 0.0}, 10);
  const TransitionSummary sum = summarize_transition(grid);
  REQUIRE(sum.columns[0].h05.has_value());
  // After pooling, 0.7/0.8 become 0.75 at kappa 0.2 and 0.3.
  const double expect = 0.3 + 0.1 * (0.75 - 0.5) / (0.75 - 0.2);
  CHECK(*sum.columns[0].h05 == doctest::Approx(expect).epsilon(1e-12));
  CHECK_FALSE(sum.md.has_value());  // no theory column given
}

TEST_CASE("summarize_transition: columns without a crossing are skipped") {
  const PhaseGrid high = synthetic_column({1.0, 1.0, 0.9, 0.8, 0.7, 0.6}, 10);
  const TransitionSummary s1 = summarize_transition(high);
  CHECK_FALSE(s1.columns[0].h05.has_value());
  CHECK(std::isnan(s1.miw));
  CHECK_FALSE(s1.md.has_value());

  // Starting below the level: already past the transition, no crossing.
  const PhaseGrid low = synthetic_column({0.4, 0.3, 0.2, 0.1, 0.0, 0.0}, 10);
  CHECK_FALSE(summarize_transition(low).columns[0].h05.has_value());

  PhaseGrid failed = synthetic_column({1.0, 1.0, 0.8, 0.4, 0.0, 0.0}, 10);
  failed.failed(1, 0) = 1;  // drop one cell; the rest still summarises
  const TransitionSummary s2 = summarize_transition(failed);
  CHECK(s2.columns[0].h05.has_value());

  CHECK_THROWS_AS(summarize_transition(failed, {0.1, 0.2}),
                  std::invalid_argument);
}

TEST_CASE("run_sweep: deterministic across runs and thread counts") {
  SweepConfig cfg;
  cfg.n = 60;
  cfg.gamma_grid = {1.0, 5.0};
  cfg.kappa_grid = {0.1, 0.55};
  cfg.replicates = 10;
  cfg.family = RadialFamily::ChiDF;
  cfg.master_seed = 11;
  cfg.threads = 1;

  const PhaseGrid a = run_sweep(cfg);
  const PhaseGrid b = run_sweep(cfg);
  cfg.threads = 3;
  const PhaseGrid c = run_sweep(cfg);

  REQUIRE(a.proportion.rows() == 2);
  REQUIRE(a.proportion.cols() == 2);
  CHECK(a.p_at_kappa[0] == 6);
  CHECK(a.p_at_kappa[1] == 33);
  CHECK((a.proportion == b.proportion));
  CHECK((a.proportion == c.proportion));
  CHECK(a.failed.sum() == 0);
  for (int k = 0; k < 2; ++k)
    for (int g = 0; g < 2; ++g) {
      CHECK(a.proportion(k, g) >= 0.0);
      CHECK(a.proportion(k, g) <= 1.0);
    }
  // Existence is overwhelming far below the transition and rare far above.
  CHECK(a.proportion(0, 0) >= 0.7);
  CHECK(a.proportion(1, 0) <= 0.3);
}

TEST_CASE("run_sweep: a mixing matrix changes nothing separability-wise") {
  // The generator applies the mix after drawing labels from the spherical
  // rows, and separability is affine invariant, so each replicate's verdict
  // matches the identity-mix run exactly.
  SweepConfig cfg;
  cfg.n = 50;
  cfg.gamma_grid = {1.0};
  cfg.kappa_grid = {0.2, 0.4};
  cfg.replicates = 8;
  cfg.master_seed = 21;
  const PhaseGrid id = run_sweep(cfg);
  cfg.mix = MixKind::RandomFullRank;
  const PhaseGrid mixed = run_sweep(cfg);
  CHECK((id.proportion == mixed.proportion));
  CHECK(mixed.failed.sum() == 0);
}

TEST_CASE("run_sweep: input validation and graceful cell failure") {
  SweepConfig cfg;
  cfg.n = 50;
  cfg.gamma_grid = {1.0};
  cfg.kappa_grid = {0.2};
  cfg.replicates = 2;

  SweepConfig bad = cfg;
  bad.gamma_grid = {};
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
  bad = cfg;
  bad.kappa_grid = {0.2, 0.2};
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
  bad = cfg;
  bad.replicates = 0;
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
  bad = cfg;
  bad.n = 10;
  bad.kappa_grid = {0.004};  // p would round to zero
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  // A cell whose radial family cannot be calibrated fails softly.
  SweepConfig pareto = cfg;
  pareto.family = RadialFamily::ParetoI;
  pareto.aux = 1.5;  // no second moment
  const PhaseGrid grid = run_sweep(pareto);
  CHECK(grid.failed(0, 0) == 1);
  CHECK(std::isnan(grid.proportion(0, 0)));
}

TEST_CASE("export_heatmap: csv cells and ppm pixels") {
  PhaseGrid grid;
  grid.gamma_grid = {1.0, 2.0, 3.0};
  grid.kappa_grid = {0.1, 0.2};
  grid.n = 100;
  grid.replicates = 4;
  grid.p_at_kappa = {10, 20};
  grid.proportion.resize(2, 3);
  grid.proportion << 1.0, 0.0, 0.5, 0.0, 1.0, 0.25;
  grid.failed.setZero(2, 3);
  grid.failed(0, 1) = 1;

  const std::string csv_path = "sweep_test_heatmap.csv";
  const std::string ppm_path = "sweep_test_heatmap.ppm";
  export_heatmap(grid, {0.1, std::nan(""), 0.2}, csv_path, ppm_path);

  const std::string csv = slurp(csv_path);
  CHECK(count_lines(csv) == 1 + 3 * 2);
  CHECK(csv.rfind("gamma0,kappa,p,n,replicates,proportion,failed\n", 0) == 0);
  CHECK(csv.find("1,0.1,10,100,4,1,0\n") != std::string::npos);
  CHECK(csv.find("2,0.1,10,100,4,,1\n") != std::string::npos);  // failed cell
  CHECK(csv.find("3,0.2,20,100,4,0.25,0\n") != std::string::npos);

  const std::string ppm = slurp(ppm_path);
  const std::string header = "P6\n3 2\n255\n";
  REQUIRE(ppm.rfind(header, 0) == 0);
  REQUIRE(ppm.size() == header.size() + 3u * 3u * 2u);
  const auto pixel = [&](int row, int col) {
    const std::size_t at = header.size() + 3 * (3 * row + col);
    return std::array<int, 3>{static_cast<unsigned char>(ppm[at]),
                              static_cast<unsigned char>(ppm[at + 1]),
                              static_cast<unsigned char>(ppm[at + 2])};
  };
  // Top image row is the larger kappa (k = 1). Theory pins red pixels at
  // gamma 1 (kappa 0.1 -> bottom row) and gamma 3 (kappa 0.2 -> top row).
  const std::array<int, 3> red = {255, 0, 0};
  const std::array<int, 3> grey = {127, 127, 127};
  const std::array<int, 3> bright = {253, 231, 37};
  CHECK((pixel(1, 0) == red));
  CHECK((pixel(0, 2) == red));
  // Failed cell is grey; proportion 1 is the bright end of the ramp.
  CHECK((pixel(1, 1) == grey));
  CHECK((pixel(0, 1) == bright));

  std::remove(csv_path.c_str());
  std::remove(ppm_path.c_str());
}

TEST_CASE("export_summary: optional fields stay empty") {
  PhaseGrid grid = synthetic_column({1.0, 1.0, 0.8, 0.4, 0.0, 0.0}, 10);
  TransitionSummary sum = summarize_transition(grid, {0.36});
  sum.columns.push_back(TransitionColumn{2.0, std::nullopt,
                                         std::nan(""), std::nan(""),
                                         std::nullopt});
  const std::string path = "sweep_test_summary.csv";
  export_summary(sum, path);
  const std::string csv = slurp(path);
  CHECK(csv.rfind("gamma0,h05,band_lo,band_hi,h_mle_theory\n", 0) == 0);
  CHECK(csv.find("1,0.375,0.25,0.475,0.36\n") != std::string::npos);
  CHECK(csv.find("2,,,,\n") != std::string::npos);
  std::remove(path.c_str());
}
