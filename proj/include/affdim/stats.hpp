#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace affdim {

/// Geometric radii r_n = scale * gamma^n for n = n_min..n_max (decreasing).
struct ScaleGrid {
  double gamma = 0.5;
  int n_min = 1;
  int n_max = 20;
  double scale = 1.0;

  void validate() const;  // throws DomainError
  std::vector<double> radii() const;
  std::size_t size() const { return n_max >= n_min ? static_cast<std::size_t>(n_max - n_min + 1) : 0; }
};

/// A finite-scale rendering of a liminf/limsup: the full trace plus the
/// min/max over the trailing window (last `tail_fraction` of the entries).
struct TailTrace {
  std::vector<double> scale;  // radius or level at which each value was computed
  std::vector<double> value;
  double tail_min = 0.0;
  double tail_max = 0.0;
  std::size_t tail_begin = 0;
};

inline constexpr double kDefaultTailFraction = 0.25;

TailTrace make_tail_trace(std::vector<double> scale, std::vector<double> value,
                          double tail_fraction = kDefaultTailFraction);

/// Numerically stable log(sum(exp(x))) with a fixed summation order.
/// Entries equal to -inf are ignored; an all -inf input gives -inf.
double log_sum_exp(std::span<const double> x);

/// log(exp(a) - exp(b)) for a >= b; -inf when a == b.
double log_diff_exp(double a, double b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Least-squares slopes over every contiguous window of `window` points,
/// plus the global fit.
struct SlopeProfile {
  double global = 0.0;
  double window_min = 0.0;
  double window_max = 0.0;
  std::vector<double> window_slopes;
  std::size_t window = 0;
};

SlopeProfile slope_profile(std::span<const double> x, std::span<const double> y, std::size_t window);

/// Linear-interpolation quantile (type 7). `q` in [0, 1]; input need not be sorted.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

}  // namespace affdim
