#include "affdim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affdim/errors.hpp"

namespace affdim {

void ScaleGrid::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("grid gamma must lie in (0,1)");
  if (n_max < n_min) throw DomainError("grid n_max < n_min");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("grid scale must be positive");
}

std::vector<double> ScaleGrid::radii() const {
  validate();
  std::vector<double> r;
  r.reserve(size());
  for (int n = n_min; n <= n_max; ++n) r.push_back(scale * std::pow(gamma, n));
  return r;
}

TailTrace make_tail_trace(std::vector<double> scale, std::vector<double> value, double tail_fraction) {
  TailTrace t;
  t.scale = std::move(scale);
  t.value = std::move(value);
  const std::size_t n = t.value.size();
  if (n == 0) return t;
  std::size_t tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  tail = std::clamp<std::size_t>(tail, 1, n);
  t.tail_begin = n - tail;
  t.tail_min = std::numeric_limits<double>::infinity();
  t.tail_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = t.tail_begin; i < n; ++i) {
    t.tail_min = std::min(t.tail_min, t.value[i]);
    t.tail_max = std::max(t.tail_max, t.value[i]);
  }
  return t;
}

double log_sum_exp(std::span<const double> x) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : x) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double v : x) {
    if (v != -std::numeric_limits<double>::infinity()) sum += std::exp(v - hi);
  }
  return hi + std::log(sum);
}

double log_diff_exp(double a, double b) {
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (b >= a) return -std::numeric_limits<double>::infinity();
  return a + std::log1p(-std::exp(b - a));
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw DomainError("least squares needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("least squares with constant abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

SlopeProfile slope_profile(std::span<const double> x, std::span<const double> y, std::size_t window) {
  const std::size_t n = std::min(x.size(), y.size());
  SlopeProfile p;
  p.global = least_squares(x, y).slope;
  p.window = std::clamp<std::size_t>(window, 2, n);
  for (std::size_t i = 0; i + p.window <= n; ++i) {
    p.window_slopes.push_back(least_squares(x.subspan(i, p.window), y.subspan(i, p.window)).slope);
  }
  p.window_min = *std::min_element(p.window_slopes.begin(), p.window_slopes.end());
  p.window_max = *std::max_element(p.window_slopes.begin(), p.window_slopes.end());
  return p;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace affdim
