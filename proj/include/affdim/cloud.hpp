#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affdim/linalg.hpp"
#include "affdim/stats.hpp"

namespace affdim {

struct CloudMetadata {
  std::uint64_t ifs_hash = 0;
  std::vector<double> translation;  // flattened a, empty when not applicable
  std::size_t depth = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string source;
};

/// Finite weighted point set in R^d (flat row-major storage). Empty weights
/// mean uniform weights 1/n.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(int dim, std::vector<double> coords, std::vector<double> weights = {});

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ ? coords_.size() / dim_ : 0; }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)}; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 / static_cast<double>(size()) : weights_[i]; }
  bool uniform_weights() const noexcept { return weights_.empty(); }

  /// Upper bound on the diameter (bounding-box diagonal).
  double diameter_bound() const;
  double max_norm() const;

  CloudMetadata metadata;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Weighted mass of closed balls B(x, r), by spatial hashing into cells of
/// side r and an exact distance filter over the 3^d neighbouring cells.
class BallCounter {
 public:
  BallCounter(const PointCloud& cloud, double r);
  double mass(std::span<const double> center) const;
  double radius() const noexcept { return r_; }

 private:
  const PointCloud& cloud_;
  double r_;
  std::vector<std::int64_t> keys_;      // sorted cell keys
  std::vector<std::uint32_t> order_;    // point indices grouped by cell
  std::vector<std::uint32_t> starts_;   // start of each distinct cell in order_
};

/// Number of occupied cells of the half-open grid of side `side`.
std::size_t occupied_cells(const PointCloud& cloud, double side);

/// Fixed-width least-squares diagnostics for log-log data.
struct DimensionReport {
  std::vector<double> radii;
  std::vector<double> statistic;  // box counts or ball masses
  std::vector<double> log_x;      // -log r
  std::vector<double> log_y;
  double slope = 0.0;             // global least squares
  double lower = 0.0;             // min window slope
  double upper = 0.0;             // max window slope
  std::size_t window = 0;
  double finest_supported = 0.0;  // resolution heuristic, recorded
  double target = 0.0;
  double residual = 0.0;
};

}  // namespace affdim
