#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "affdim/cloud.hpp"
#include "affdim/rng.hpp"
#include "affdim/stats.hpp"

namespace affdim {

/// m-dimensional linear subspace of R^n with an orthonormal basis (rows).
struct Subspace {
  int ambient = 0;
  int dim = 0;
  std::vector<double> basis;  // dim x ambient, row-major

  std::span<const double> vector(int i) const { return {basis.data() + i * ambient, static_cast<std::size_t>(ambient)}; }
  /// Coordinates of P_V x in the basis.
  std::vector<double> coordinates(std::span<const double> x) const;
  double orthonormality_error() const;
};

/// Orthonormalised standard-normal frame: distributed by the invariant
/// measure on the Grassmannian. Throws DomainError unless 0 < m < n.
Subspace random_subspace(int n, int m, Stream& stream);

/// Pushforward of a cloud under P_V, in V-coordinates.
PointCloud project(const PointCloud& cloud, const Subspace& v);

/// F^m_mu(x, r) = sum_y w_y min{1, (r/|y-x|)^m}; y = x contributes w_y.
double f_mu_m(const PointCloud& cloud, std::span<const double> x, double r, int m);

/// F^m for every radius at once from sorted distances.
std::vector<double> f_mu_m_profile(const PointCloud& cloud, std::span<const double> x,
                                   std::span<const double> radii, int m);

struct CriterionOptions {
  std::size_t n_centers = 50;
  double tol = 0.1;
  double fraction = 0.9;
  std::size_t window = 0;  // local-dimension window, 0: half the grid
  std::uint64_t seed = 7;
};

struct CenterTrace {
  std::size_t index = 0;
  double lower_local = 0.0;
  double upper_local = 0.0;
  double f_slope = 0.0;  // least-squares slope of log F vs log r over the finer half
  std::vector<double> f_values;
};

struct ExactDimCriterion {
  std::vector<double> radii;
  std::vector<CenterTrace> centers;
  double lower_hausdorff = 0.0;  // (1 - fraction) quantile of lower local dims
  double median_lower = 0.0;
  bool condition_i = false;      // lower Hausdorff dimension >= m
  bool condition_ii = false;     // exact dimensional with dimension < m
  bool exact_dimensional_projections = false;
};

ExactDimCriterion exact_dim_criterion(const PointCloud& cloud, int m, const ScaleGrid& grid,
                                      const CriterionOptions& options = {});

}  // namespace affdim
