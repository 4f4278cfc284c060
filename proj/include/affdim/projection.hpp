#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affdim/cloud.hpp"
#include "affdim/ifs.hpp"
#include "affdim/measures.hpp"
#include "affdim/pressure.hpp"
#include "affdim/rng.hpp"
#include "affdim/sft.hpp"
#include "affdim/stats.hpp"

namespace affdim {

/// Uniform point of the closed ball B_rho in R^{md}, split into m d-vectors.
Translations sample_translation(double rho, int d, int m, Stream& stream);

/// n i.i.d. mu-distributed words pushed through the coding map at `depth`.
/// When `finest_radius` > 0 the truncation error alpha_+^depth R(a) must be
/// below finest_radius / 10, otherwise DepthInsufficientForGrid is thrown.
PointCloud project_cloud(const AffineIFS& ifs, const Translations& a, const TreeMeasure& mu,
                         std::size_t n_points, std::size_t depth, Stream& stream,
                         double finest_radius = 0.0);

/// Occupied cells of D_{r/sqrt(d)}, whose cells have diameter r: an upper
/// proxy for N_r (the minimal number of diameter-r sets), within a factor
/// depending only on d.
std::size_t box_count(const PointCloud& cloud, double r);

struct FitOptions {
  std::size_t window = 4;
  double expected_dim = 0.0;  // > 0 enables the GridTooFine check
};

DimensionReport box_dim_fit(const PointCloud& cloud, const ScaleGrid& grid, const FitOptions& options = {});

struct LocalDimEstimate {
  double lower = 0.0;
  double upper = 0.0;
  double slope = 0.0;
  std::vector<double> radii;
  std::vector<double> masses;
};

struct LocalDimOptions {
  std::size_t window = 0;  // 0: half the grid (at least 2)
};

LocalDimEstimate local_dim_estimate(const PointCloud& cloud, std::span<const double> center,
                                    const ScaleGrid& grid, const LocalDimOptions& options = {});

/// Same estimate from precomputed counters (one per grid radius), used when
/// many centres share a cloud.
LocalDimEstimate local_dim_from_counters(const std::vector<BallCounter>& counters,
                                         std::span<const double> center, const LocalDimOptions& options);

struct CoveringOptions {
  std::size_t max_nodes = 2'000'000;
  std::size_t cover_depth = 0;  // 0: chosen so that the cylinder radius is < side/20
  std::uint64_t max_cover_words = 1u << 22;
};

/// Check of N_r(pi^a(E)) <= (log r / log alpha_+ + 2) C' C_r(E),
/// C' = (2u)^d (d+1)^d, u = 2 max{1, diam}.
struct CoveringCertificate {
  double r = 0.0;
  std::size_t n_cells_lower = 0;  // cells hit by cylinder points
  std::size_t n_cells_upper = 0;  // cells hit by the cylinder bounding boxes (>= true count)
  double capacity = 0.0;
  double diameter_bound = 0.0;
  double u = 0.0;
  double c_prime = 0.0;
  double bound = 0.0;
  std::size_t depth = 0;
  bool pass = false;
};

/// C' = (2u)^d (d+1)^d with u = 2 max{1, diam}.
double covering_constant(int d, double diameter);

CoveringCertificate covering_check(const AffineIFS& ifs, const Translations& a, const SftSpec* set, double r,
                                   const CoveringOptions& options = {});

// --- sweep ----------------------------------------------------------------

struct SweepConfig {
  std::vector<Matrix> maps;
  TreeMeasure measure = TreeMeasure::bernoulli({1.0});
  std::optional<SftSpec> set;        // none: full shift
  std::vector<Translations> translations;  // explicit a-samples; if empty, draw n_translations
  std::size_t n_translations = 10;
  double rho = 1.0;
  std::uint64_t seed = 1;

  ScaleGrid box_grid{0.5, 4, 11, 1.0};
  ScaleGrid local_grid{0.5, 2, 16, 1.0};
  bool relative_grids = true;        // scale local grid by each cloud's diameter bound
  std::size_t n_points = 200'000;
  std::size_t depth = 0;             // 0: chosen from the finest radius
  std::size_t n_centers = 50;
  std::size_t n_paths = 20;          // symbolic paths for S/D traces
  std::size_t symbolic_depth = 200;
  ScaleGrid symbolic_grid{0.5, 1, 60, 1.0};

  double box_tol = 0.15;
  double local_tol = 0.1;
  double exact_tol = 0.1;
  double pass_fraction = 0.8;
  std::size_t box_window = 4;
};

struct SweepSample {
  std::size_t index = 0;
  Translations a;
  DimensionReport box;
  std::vector<double> lower_local;   // one per centre
  std::vector<double> upper_local;
  std::vector<double> lower_target;  // min{S(mu,x), d}
  std::vector<double> upper_target;  // D(mu,x)
  double median_lower = 0.0;
  double median_upper = 0.0;
  bool box_pass = false;
  bool local_pass = false;
};

enum class ExactDimVerdict { condition_i, condition_ii, neither };
const char* to_string(ExactDimVerdict v);

struct SweepReport {
  std::vector<SweepSample> samples;
  AffinityResult affinity;
  double box_target = 0.0;
  double box_pass_fraction = 0.0;
  double local_pass_fraction = 0.0;
  bool box_pass = false;
  bool local_pass = false;
  std::vector<double> box_slope_quantiles;  // 10/50/90 %
  // Symbolic traces behind the exact-dimensionality verdict.
  std::vector<double> s_liminf;
  std::vector<double> s_limsup;
  std::vector<double> d_limsup;
  ExactDimVerdict verdict = ExactDimVerdict::neither;
  double occupancy_fraction = 0.0;  // informational: share of finest cells occupied inside the bounding box

  /// One row per (a-index, r).
  std::string csv() const;
  std::string summary_csv() const;
};

SweepReport sweep_experiment(const SweepConfig& config);

/// Verdict of the two-condition criterion from per-path liminf S and
/// limsup D estimates.
ExactDimVerdict exact_dim_verdict(std::span<const double> s_liminf, std::span<const double> d_limsup, int d,
                                  double tol, double fraction);

}  // namespace affdim
