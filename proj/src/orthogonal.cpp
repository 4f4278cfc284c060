#include "affdim/orthogonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"
#include "affdim/projection.hpp"

namespace affdim {

std::vector<double> Subspace::coordinates(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != ambient) throw DomainError("point has wrong dimension");
  std::vector<double> c(dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < ambient; ++k) c[i] += basis[i * ambient + k] * x[k];
  return c;
}

double Subspace::orthonormality_error() const {
  double err = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double dot = 0.0;
      for (int k = 0; k < ambient; ++k) dot += basis[i * ambient + k] * basis[j * ambient + k];
      err = std::max(err, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

Subspace random_subspace(int n, int m, Stream& stream) {
  if (!(m > 0 && m < n)) throw DomainError("need 0 < m < n, got m=" + std::to_string(m) + ", n=" + std::to_string(n));
  Subspace v;
  v.ambient = n;
  v.dim = m;
  for (int attempt = 0; attempt < 100; ++attempt) {
    v.basis.assign(static_cast<std::size_t>(m) * n, 0.0);
    for (double& x : v.basis) x = stream.normal();
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      double* row = v.basis.data() + i * n;
      // Two passes of modified Gram-Schmidt.
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < i; ++j) {
          const double* prev = v.basis.data() + j * n;
          double dot = 0.0;
          for (int k = 0; k < n; ++k) dot += row[k] * prev[k];
          for (int k = 0; k < n; ++k) row[k] -= dot * prev[k];
        }
      }
      double norm = 0.0;
      for (int k = 0; k < n; ++k) norm += row[k] * row[k];
      norm = std::sqrt(norm);
      if (norm < 1e-10) {
        ok = false;
        break;
      }
      for (int k = 0; k < n; ++k) row[k] /= norm;
    }
    if (ok) return v;
  }
  throw DegenerateFrame("100 consecutive degenerate Gaussian frames");
}

PointCloud project(const PointCloud& cloud, const Subspace& v) {
  if (cloud.dim() != v.ambient) throw DomainError("cloud and subspace ambient dimensions differ");
  std::vector<double> coords;
  coords.reserve(cloud.size() * v.dim);
  std::vector<double> weights;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto c = v.coordinates(cloud.point(i));
    coords.insert(coords.end(), c.begin(), c.end());
    if (!cloud.uniform_weights()) weights.push_back(cloud.weight(i));
  }
  PointCloud out(v.dim, std::move(coords), std::move(weights));
  out.metadata = cloud.metadata;
  return out;
}

double f_mu_m(const PointCloud& cloud, std::span<const double> x, double r, int m) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (static_cast<int>(x.size()) != cloud.dim()) throw DomainError("point has wrong dimension");
  double acc = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    double d2 = 0.0;
    for (int k = 0; k < cloud.dim(); ++k) d2 += (p[k] - x[k]) * (p[k] - x[k]);
    const double dist = std::sqrt(d2);
    acc += cloud.weight(i) * (dist <= r ? 1.0 : std::pow(r / dist, m));
  }
  return acc;
}

std::vector<double> f_mu_m_profile(const PointCloud& cloud, std::span<const double> x, std::span<const double> radii,
                                   int m) {
  if (static_cast<int>(x.size()) != cloud.dim()) throw DomainError("point has wrong dimension");
  const std::size_t n = cloud.size();
  std::vector<std::pair<double, double>> dw(n);  // (distance, weight)
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    double d2 = 0.0;
    for (int k = 0; k < cloud.dim(); ++k) d2 += (p[k] - x[k]) * (p[k] - x[k]);
    dw[i] = {std::sqrt(d2), cloud.weight(i)};
  }
  std::sort(dw.begin(), dw.end());
  // prefix[i] = weight of the first i points; suffix[i] = sum_{j >= i} w_j / d_j^m.
  std::vector<double> prefix(n + 1, 0.0), suffix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + dw[i].second;
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = suffix[i + 1] + (dw[i].first > 0.0 ? dw[i].second / std::pow(dw[i].first, m) : 0.0);
  }
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    const std::size_t inside = static_cast<std::size_t>(
        std::upper_bound(dw.begin(), dw.end(), std::make_pair(r, std::numeric_limits<double>::infinity())) -
        dw.begin());
    out.push_back(prefix[inside] + std::pow(r, m) * suffix[inside]);
  }
  return out;
}

ExactDimCriterion exact_dim_criterion(const PointCloud& cloud, int m, const ScaleGrid& grid,
                                      const CriterionOptions& options) {
  if (cloud.size() < 2) throw DomainError("criterion needs a nontrivial cloud");
  if (m < 1) throw DomainError("m must be positive");
  if (options.n_centers == 0) throw DomainError("need at least one centre");
  ExactDimCriterion out;
  out.radii = grid.radii();

  // mu-distributed centres: cloud points drawn by weight.
  Stream stream(options.seed);
  std::vector<std::size_t> centers(options.n_centers);
  std::vector<double> cdf;
  if (!cloud.uniform_weights()) {
    cdf.resize(cloud.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) cdf[i] = acc += cloud.weight(i);
  }
  for (auto& c : centers) {
    if (cdf.empty()) {
      c = static_cast<std::size_t>(stream.below(cloud.size()));
    } else {
      const double u = stream.uniform() * cdf.back();
      c = std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                                cloud.size() - 1);
    }
  }

  std::vector<BallCounter> counters;
  for (double r : out.radii) counters.emplace_back(cloud, r);
  const std::size_t half = out.radii.size() / 2;
  std::vector<double> log_r;
  for (std::size_t i = half; i < out.radii.size(); ++i) log_r.push_back(std::log(out.radii[i]));

  out.centers.resize(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    CenterTrace& t = out.centers[i];
    t.index = centers[i];
    const auto x = cloud.point(centers[i]);
    const LocalDimEstimate est = local_dim_from_counters(counters, x, {options.window});
    t.lower_local = est.lower;
    t.upper_local = est.upper;
    t.f_values = f_mu_m_profile(cloud, x, out.radii, m);
    std::vector<double> log_f;
    for (std::size_t k = half; k < out.radii.size(); ++k) log_f.push_back(std::log(t.f_values[k]));
    t.f_slope = log_r.size() >= 2 ? least_squares(log_r, log_f).slope : 0.0;
  });

  std::vector<double> lower;
  for (const auto& t : out.centers) lower.push_back(t.lower_local);
  out.lower_hausdorff = quantile(lower, 1.0 - options.fraction);
  out.median_lower = median(lower);
  out.condition_i = out.lower_hausdorff >= m - options.tol;
  std::size_t agree = 0;
  for (const auto& t : out.centers) {
    agree += (std::abs(t.lower_local - out.median_lower) <= options.tol &&
              std::abs(t.f_slope - out.median_lower) <= options.tol)
                 ? 1
                 : 0;
  }
  out.condition_ii = out.median_lower < m - options.tol &&
                     static_cast<double>(agree) >= options.fraction * static_cast<double>(out.centers.size());
  out.exact_dimensional_projections = out.condition_i || out.condition_ii;
  return out;
}

}  // namespace affdim
