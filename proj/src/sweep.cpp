#include "phaseglm/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "phaseglm/rng.hpp"
#include "phaseglm/threading.hpp"

namespace phaseglm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_increasing(const std::vector<double>& g, const char* name) {
  if (g.empty())
    throw std::invalid_argument(std::string("run_sweep: empty ") + name);
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1]))
      throw std::invalid_argument(std::string("run_sweep: ") + name +
                                  " must be strictly increasing");
}

// Full-rank random mix: standard Gaussian entries stabilised by adding
// (|A|_2 / 10000) I.
Eigen::MatrixXd random_mix(int p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd A(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) A(i, j) = rng.normal();
  const double snorm = A.bdcSvd().singularValues()(0);
  A += (snorm / 10000.0) * Eigen::MatrixXd::Identity(p, p);
  return A;
}

struct File {
  std::FILE* f;
  std::string path;
  File(const std::string& p, const char* mode) : f(std::fopen(p.c_str(), mode)), path(p) {
    if (!f) throw std::runtime_error("cannot open for writing: " + p);
  }
  ~File() {
    if (f) std::fclose(f);
  }
  void close_checked() {
    const bool bad = std::ferror(f) != 0;
    const int rc = std::fclose(f);
    f = nullptr;
    if (bad || rc != 0) throw std::runtime_error("write failed: " + path);
  }
};

// First kappa (interpolated) where the nonincreasing piecewise-linear column
// crosses the level, or nullopt when it never does inside the grid.
std::optional<double> crossing(const std::vector<double>& kappa,
                               const std::vector<double>& prop, double level) {
  if (prop.empty() || prop.front() < level) return std::nullopt;
  for (std::size_t i = 0; i + 1 < prop.size(); ++i) {
    if (prop[i] >= level && prop[i + 1] <= level && prop[i] > prop[i + 1]) {
      const double t = (prop[i] - level) / (prop[i] - prop[i + 1]);
      return kappa[i] + t * (kappa[i + 1] - kappa[i]);
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> grid_range(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid_range: step <= 0");
  if (hi < lo) throw std::invalid_argument("grid_range: hi < lo");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + i * step;
  return g;
}

PhaseGrid run_sweep(const SweepConfig& config) {
  require_increasing(config.gamma_grid, "gamma0 grid");
  require_increasing(config.kappa_grid, "kappa grid");
  if (config.n < 1) throw std::invalid_argument("run_sweep: n < 1");
  if (config.replicates < 1)
    throw std::invalid_argument("run_sweep: replicates < 1");

  const int G = static_cast<int>(config.gamma_grid.size());
  const int K = static_cast<int>(config.kappa_grid.size());

  PhaseGrid grid;
  grid.gamma_grid = config.gamma_grid;
  grid.kappa_grid = config.kappa_grid;
  grid.n = config.n;
  grid.replicates = config.replicates;
  grid.p_at_kappa.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const int p = static_cast<int>(std::lround(config.kappa_grid[k] * config.n));
    if (p < 1)
      throw std::invalid_argument("run_sweep: kappa * n rounds below 1");
    grid.p_at_kappa[static_cast<std::size_t>(k)] = p;
  }
  grid.proportion.setConstant(K, G, kNaN);
  grid.failed.setZero(K, G);

  // One mix per kappa (p changes with kappa), shared by every cell in the row.
  std::vector<Eigen::MatrixXd> mixes(static_cast<std::size_t>(K));
  if (config.mix == MixKind::RandomFullRank)
    for (int k = 0; k < K; ++k)
      mixes[static_cast<std::size_t>(k)] = random_mix(
          grid.p_at_kappa[static_cast<std::size_t>(k)],
          derive_seed(config.master_seed,
                      {kMixStream, static_cast<std::uint64_t>(k)}));

  parallel_for(
      static_cast<std::size_t>(K) * static_cast<std::size_t>(G),
      config.threads, [&](std::size_t cell) {
        const int k = static_cast<int>(cell / static_cast<std::size_t>(G));
        const int g = static_cast<int>(cell % static_cast<std::size_t>(G));
        const int p = grid.p_at_kappa[static_cast<std::size_t>(k)];
        ModelParams params;
        params.alpha0 = config.alpha0;
        params.beta0 = config.beta0;
        params.gamma0 = config.gamma_grid[static_cast<std::size_t>(g)];
        try {
          const RadialSpec radial =
              calibrate_radial(config.family, p, config.alpha0, config.aux);
          int exists = 0;
          for (int r = 0; r < config.replicates; ++r) {
            const std::uint64_t seed = derive_seed(
                config.master_seed,
                {kSweepStream, static_cast<std::uint64_t>(g),
                 static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)});
            Rng rng(seed);
            // mixes[k] is empty (= identity) unless RandomFullRank.
            Dataset ds = generate_dataset(config.n, p, params, config.link,
                                          radial,
                                          mixes[static_cast<std::size_t>(k)],
                                          rng, seed);
            if (mle_exists(ds.X, ds.y, config.tol)) ++exists;
          }
          grid.proportion(k, g) =
              static_cast<double>(exists) / config.replicates;
        } catch (const std::exception&) {
          grid.failed(k, g) = 1;
        }
      });
  return grid;
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& v) {
  // PAVA on the reversed sequence (nondecreasing), then reverse back.
  struct Block {
    double sum;
    int count;
  };
  std::vector<Block> stack;
  stack.reserve(v.size());
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    Block b{*it, 1};
    while (!stack.empty() &&
           stack.back().sum * b.count > b.sum * stack.back().count) {
      b.sum += stack.back().sum;
      b.count += stack.back().count;
      stack.pop_back();
    }
    stack.push_back(b);
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const Block& block : stack)
    out.insert(out.end(), static_cast<std::size_t>(block.count),
               block.sum / block.count);
  std::reverse(out.begin(), out.end());
  return out;
}

TransitionSummary summarize_transition(const PhaseGrid& grid,
                                       const std::vector<double>& theory) {
  if (!theory.empty() && theory.size() != grid.gamma_grid.size())
    throw std::invalid_argument(
        "summarize_transition: theory length must match the gamma0 grid");
  const int G = static_cast<int>(grid.gamma_grid.size());
  const int K = static_cast<int>(grid.kappa_grid.size());
  const double lo_thr = 1.0 / grid.replicates;
  const double hi_thr = 1.0 - 1.0 / grid.replicates;

  TransitionSummary sum;
  sum.columns.resize(static_cast<std::size_t>(G));
  double width_total = 0.0;
  int width_count = 0;
  double md_total = 0.0;
  int md_count = 0;

  for (int g = 0; g < G; ++g) {
    TransitionColumn& col = sum.columns[static_cast<std::size_t>(g)];
    col.gamma0 = grid.gamma_grid[static_cast<std::size_t>(g)];
    col.band_lo = col.band_hi = kNaN;
    if (!theory.empty() && std::isfinite(theory[static_cast<std::size_t>(g)]))
      col.theory = theory[static_cast<std::size_t>(g)];

    std::vector<double> kappa, prop;
    kappa.reserve(static_cast<std::size_t>(K));
    prop.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      if (grid.failed(k, g)) continue;
      kappa.push_back(grid.kappa_grid[static_cast<std::size_t>(k)]);
      prop.push_back(grid.proportion(k, g));
    }
    if (kappa.size() < 2) continue;

    prop = isotonic_nonincreasing(prop);
    for (std::size_t i = 1; i < prop.size(); ++i)
      if (prop[i] > prop[i - 1] + 1e-15)
        throw std::logic_error("summarize_transition: smoothing not monotone");

    col.h05 = crossing(kappa, prop, 0.5);
    if (!col.h05) continue;

    if (lo_thr < 0.5 && hi_thr > 0.5) {
      col.band_lo = crossing(kappa, prop, hi_thr).value_or(kappa.front());
      col.band_hi = crossing(kappa, prop, lo_thr).value_or(kappa.back());
    } else {
      // Degenerate replicate count: no strictly-interior proportions exist.
      col.band_lo = col.band_hi = *col.h05;
    }
    width_total += col.band_hi - col.band_lo;
    ++width_count;
    if (col.theory) {
      md_total += std::abs(*col.theory - *col.h05);
      ++md_count;
    }
  }
  sum.miw = width_count > 0 ? width_total / width_count : kNaN;
  if (md_count > 0) sum.md = md_total / md_count;
  return sum;
}

void export_heatmap(const PhaseGrid& grid, const std::vector<double>& theory,
                    const std::string& csv_path, const std::string& ppm_path) {
  if (!theory.empty() && theory.size() != grid.gamma_grid.size())
    throw std::invalid_argument(
        "export_heatmap: theory length must match the gamma0 grid");
  const int G = static_cast<int>(grid.gamma_grid.size());
  const int K = static_cast<int>(grid.kappa_grid.size());

  {
    File csv(csv_path, "w");
    std::fprintf(csv.f, "gamma0,kappa,p,n,replicates,proportion,failed\n");
    for (int g = 0; g < G; ++g)
      for (int k = 0; k < K; ++k) {
        std::fprintf(csv.f, "%.10g,%.10g,%d,%d,%d,",
                     grid.gamma_grid[static_cast<std::size_t>(g)],
                     grid.kappa_grid[static_cast<std::size_t>(k)],
                     grid.p_at_kappa[static_cast<std::size_t>(k)], grid.n,
                     grid.replicates);
        if (grid.failed(k, g))
          std::fprintf(csv.f, ",1\n");
        else
          std::fprintf(csv.f, "%.10g,0\n", grid.proportion(k, g));
      }
    csv.close_checked();
  }

  // Pixmap: one pixel per cell, top row = largest kappa. Colormap runs dark
  // purple -> yellow so the pure-red theory overlay is unambiguous.
  const int lo_rgb[3] = {68, 1, 84};
  const int hi_rgb[3] = {253, 231, 37};
  std::vector<unsigned char> img(static_cast<std::size_t>(3) * G * K);
  auto put = [&](int row, int col, int r, int gch, int b) {
    const std::size_t at = 3 * (static_cast<std::size_t>(row) * G + col);
    img[at] = static_cast<unsigned char>(r);
    img[at + 1] = static_cast<unsigned char>(gch);
    img[at + 2] = static_cast<unsigned char>(b);
  };
  for (int k = 0; k < K; ++k) {
    const int row = K - 1 - k;
    for (int g = 0; g < G; ++g) {
      if (grid.failed(k, g)) {
        put(row, g, 127, 127, 127);
      } else {
        const double t = grid.proportion(k, g);
        put(row, g,
            static_cast<int>(std::lround(lo_rgb[0] + t * (hi_rgb[0] - lo_rgb[0]))),
            static_cast<int>(std::lround(lo_rgb[1] + t * (hi_rgb[1] - lo_rgb[1]))),
            static_cast<int>(std::lround(lo_rgb[2] + t * (hi_rgb[2] - lo_rgb[2]))));
      }
    }
  }
  if (!theory.empty()) {
    for (int g = 0; g < G; ++g) {
      const double h = theory[static_cast<std::size_t>(g)];
      if (!std::isfinite(h)) continue;
      int best = -1;
      double dist = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        const double d =
            std::abs(grid.kappa_grid[static_cast<std::size_t>(k)] - h);
        if (d < dist) {
          dist = d;
          best = k;
        }
      }
      if (best >= 0) put(K - 1 - best, g, 255, 0, 0);
    }
  }

  File ppm(ppm_path, "wb");
  std::fprintf(ppm.f, "P6\n%d %d\n255\n", G, K);
  std::fwrite(img.data(), 1, img.size(), ppm.f);
  ppm.close_checked();
}

void export_summary(const TransitionSummary& summary, const std::string& path) {
  File csv(path, "w");
  std::fprintf(csv.f, "gamma0,h05,band_lo,band_hi,h_mle_theory\n");
  for (const auto& col : summary.columns) {
    std::fprintf(csv.f, "%.10g,", col.gamma0);
    if (col.h05) std::fprintf(csv.f, "%.10g", *col.h05);
    std::fprintf(csv.f, ",");
    if (std::isfinite(col.band_lo)) std::fprintf(csv.f, "%.10g", col.band_lo);
    std::fprintf(csv.f, ",");
    if (std::isfinite(col.band_hi)) std::fprintf(csv.f, "%.10g", col.band_hi);
    std::fprintf(csv.f, ",");
    if (col.theory) std::fprintf(csv.f, "%.10g", *col.theory);
    std::fprintf(csv.f, "\n");
  }
  csv.close_checked();
}

}  // namespace phaseglm
