#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phaseglm/glm.hpp"
#include "phaseglm/radial.hpp"
#include "phaseglm/separability.hpp"

namespace phaseglm {

enum class MixKind { Identity, RandomFullRank };

// Arithmetic grid {lo, lo + step, ...} up to hi (inclusive within a relative
// step tolerance).
std::vector<double> grid_range(double lo, double hi, double step);

struct SweepConfig {
  int n = 1000;
  std::vector<double> gamma_grid = grid_range(0.01, 10.0, 0.01);
  std::vector<double> kappa_grid = grid_range(0.005, 0.6, 0.005);
  int replicates = 100;
  Link link = Link::Logit;
  RadialFamily family = RadialFamily::Gamma;
  double aux = 1.0;        // Gamma shape / Pareto tail index
  double alpha0 = 1.0;
  double beta0 = 0.0;
  MixKind mix = MixKind::Identity;
  std::uint64_t master_seed = 1;
  int threads = 1;
  LpTolerance tol;
};

// Existence proportions over the (gamma0, kappa) lattice. Rows index kappa,
// columns index gamma0. Cells whose replicates raised an error are flagged in
// `failed` and carry NaN proportions.
struct PhaseGrid {
  std::vector<double> gamma_grid, kappa_grid;
  std::vector<int> p_at_kappa;  // p = round(kappa * n)
  int n = 0;
  int replicates = 0;
  Eigen::MatrixXd proportion;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> failed;
};

// Per-replicate datasets at p = round(kappa n) run through mle_exists.
// Replicate streams are derived from (master_seed, gamma index, kappa index,
// replicate), so results are identical for any thread count. A cell whose
// replicates throw is marked failed and the sweep continues.
PhaseGrid run_sweep(const SweepConfig& config);

struct TransitionColumn {
  double gamma0 = 0.0;
  std::optional<double> h05;   // absent when the column never crosses 0.5
  double band_lo = 0.0;        // uncertainty interval endpoints
  double band_hi = 0.0;
  std::optional<double> theory;
};

struct TransitionSummary {
  std::vector<TransitionColumn> columns;
  double miw = 0.0;            // mean band width over columns with h05
  std::optional<double> md;    // mean |theory - h05| where both defined
};

// Per gamma0: proportions are isotonically smoothed (nonincreasing in kappa),
// h_{0.5} is the linearly interpolated first downward crossing of 0.5, and
// the uncertainty interval is the kappa range where the smoothed/interpolated
// proportion lies strictly inside (1/replicates, 1 - 1/replicates).
// `theory` (optional, one value per gamma0, NaN = absent) fills the theory
// column and the mean-discrepancy metric.
TransitionSummary summarize_transition(const PhaseGrid& grid,
                                       const std::vector<double>& theory = {});

// Pool-adjacent-violators projection onto nonincreasing sequences
// (least squares).
std::vector<double> isotonic_nonincreasing(const std::vector<double>& v);

// Writes the cell CSV (gamma0,kappa,p,n,replicates,proportion,failed; failed
// cells have an empty proportion) and a binary pixmap with one pixel per
// cell, kappa increasing upward, proportion colormapped, failed cells grey,
// and the theory curve marked in pure red at the nearest kappa row.
void export_heatmap(const PhaseGrid& grid, const std::vector<double>& theory,
                    const std::string& csv_path, const std::string& ppm_path);

// Summary CSV: gamma0,h05,band_lo,band_hi,h_mle_theory (absent -> empty).
void export_summary(const TransitionSummary& summary, const std::string& path);

}  // namespace phaseglm
