#include "affdim/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affdim/errors.hpp"
#include "affdim/rng.hpp"

namespace affdim {
namespace {

std::int64_t cell_index(double x, double side) { return static_cast<std::int64_t>(std::floor(x / side)); }

std::int64_t hash_cell(const std::int64_t* idx, int d) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int k = 0; k < d; ++k) h = mix64(h ^ static_cast<std::uint64_t>(idx[k]));
  return static_cast<std::int64_t>(h);
}

}  // namespace

PointCloud::PointCloud(int dim, std::vector<double> coords, std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("cloud dimension must be in 1..8");
  if (coords_.size() % static_cast<std::size_t>(dim) != 0) throw DomainError("coordinate count not a multiple of dim");
  for (double x : coords_)
    if (!std::isfinite(x)) throw DomainError("non-finite coordinate");
  if (!weights_.empty()) {
    if (weights_.size() != size()) throw DomainError("one weight per point required");
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw DomainError("negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw MassNotNormalized("weights sum to " + std::to_string(sum));
  }
}

double PointCloud::diameter_bound() const {
  if (size() == 0) return 0.0;
  double acc = 0.0;
  for (int k = 0; k < dim_; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < size(); ++i) {
      lo = std::min(lo, coords_[i * dim_ + k]);
      hi = std::max(hi, coords_[i * dim_ + k]);
    }
    acc += (hi - lo) * (hi - lo);
  }
  return std::sqrt(acc);
}

double PointCloud::max_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double n2 = 0.0;
    for (int k = 0; k < dim_; ++k) n2 += coords_[i * dim_ + k] * coords_[i * dim_ + k];
    best = std::max(best, n2);
  }
  return std::sqrt(best);
}

BallCounter::BallCounter(const PointCloud& cloud, double r) : cloud_(cloud), r_(r) {
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  const int d = cloud.dim();
  const std::size_t n = cloud.size();
  std::vector<std::int64_t> key(n);
  std::int64_t idx[kMaxDim];
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    for (int k = 0; k < d; ++k) idx[k] = cell_index(p[k], r);
    key[i] = hash_cell(idx, d);
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) { return key[a] < key[b]; });
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t k = key[order_[i]];
    if (keys_.empty() || keys_.back() != k) {
      keys_.push_back(k);
      starts_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  starts_.push_back(static_cast<std::uint32_t>(n));
}

double BallCounter::mass(std::span<const double> center) const {
  const int d = cloud_.dim();
  if (static_cast<int>(center.size()) != d) throw DomainError("centre has wrong dimension");
  std::int64_t base[kMaxDim], idx[kMaxDim];
  for (int k = 0; k < d; ++k) base[k] = cell_index(center[k], r_);
  // Distinct hashes of the 3^d neighbouring cells; a hash collision merges
  // buckets, which the exact distance test makes harmless.
  std::vector<std::int64_t> probe;
  int total = 1;
  for (int k = 0; k < d; ++k) total *= 3;
  probe.reserve(total);
  for (int c = 0; c < total; ++c) {
    int code = c;
    for (int k = 0; k < d; ++k) {
      idx[k] = base[k] + (code % 3) - 1;
      code /= 3;
    }
    probe.push_back(hash_cell(idx, d));
  }
  std::sort(probe.begin(), probe.end());
  probe.erase(std::unique(probe.begin(), probe.end()), probe.end());

  const double r2 = r_ * r_;
  std::size_t count = 0;
  double weighted = 0.0;
  for (std::int64_t h : probe) {
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), h);
    if (it == keys_.end() || *it != h) continue;
    const std::size_t b = static_cast<std::size_t>(it - keys_.begin());
    for (std::uint32_t j = starts_[b]; j < starts_[b + 1]; ++j) {
      const std::uint32_t i = order_[j];
      const auto p = cloud_.point(i);
      double dist2 = 0.0;
      for (int k = 0; k < d; ++k) dist2 += (p[k] - center[k]) * (p[k] - center[k]);
      if (dist2 <= r2) {
        ++count;
        if (!cloud_.uniform_weights()) weighted += cloud_.weight(i);
      }
    }
  }
  return cloud_.uniform_weights() ? static_cast<double>(count) / static_cast<double>(cloud_.size()) : weighted;
}

std::size_t occupied_cells(const PointCloud& cloud, double side) {
  if (!(side > 0.0)) throw DomainError("cell side must be positive");
  const int d = cloud.dim();
  const std::size_t n = cloud.size();
  if (n == 0) return 0;
  std::vector<std::int64_t> idx(n * d);
  std::vector<std::int64_t> lo(d, std::numeric_limits<std::int64_t>::max()), hi(d, std::numeric_limits<std::int64_t>::min());
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    for (int k = 0; k < d; ++k) {
      const std::int64_t c = cell_index(p[k], side);
      idx[i * d + k] = c;
      lo[k] = std::min(lo[k], c);
      hi[k] = std::max(hi[k], c);
    }
  }
  // Exact packing into one integer when the index box is small enough.
  double span_product = 1.0;
  for (int k = 0; k < d; ++k) span_product *= static_cast<double>(hi[k] - lo[k] + 1);
  if (span_product < 9.0e18) {
    std::vector<std::uint64_t> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t kk = 0;
      for (int k = 0; k < d; ++k) {
        kk = kk * static_cast<std::uint64_t>(hi[k] - lo[k] + 1) + static_cast<std::uint64_t>(idx[i * d + k] - lo[k]);
      }
      key[i] = kk;
    }
    std::sort(key.begin(), key.end());
    return static_cast<std::size_t>(std::unique(key.begin(), key.end()) - key.begin());
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    return std::lexicographical_compare(idx.begin() + a * d, idx.begin() + (a + 1) * d, idx.begin() + b * d,
                                        idx.begin() + (b + 1) * d);
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t count = 1;
  for (std::size_t i = 1; i < n; ++i) count += less(order[i - 1], order[i]) ? 1 : 0;
  return count;
}

}  // namespace affdim
