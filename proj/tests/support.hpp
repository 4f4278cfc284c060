#pragma once

#include <cmath>
#include <vector>

#include "affdim/linalg.hpp"
#include "affdim/rng.hpp"

namespace testing {

// Random d x d matrix with entries in [-scale, scale], rejected until
// comfortably invertible.
inline affdim::Matrix random_matrix(affdim::Stream& s, int d, double scale = 1.0) {
  for (;;) {
    affdim::Matrix t(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) t(i, j) = s.uniform(-scale, scale);
    if (std::abs(t.determinant()) > 1e-3 * std::pow(scale, d)) return t;
  }
}

// Random contraction with operator norm roughly below `bound`.
inline affdim::Matrix random_contraction(affdim::Stream& s, int d, double bound) {
  return random_matrix(s, d, bound / d);
}

// Frobenius norm; crude upper bound on the operator norm.
inline double frobenius(const affdim::Matrix& t) {
  double f = 0.0;
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) f += t(i, j) * t(i, j);
  return std::sqrt(f);
}

inline affdim::Matrix diag2(double a, double b) { return affdim::Matrix::from_rows({{a, 0.0}, {0.0, b}}); }

}  // namespace testing
