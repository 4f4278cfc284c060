#include "affdim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "affdim/errors.hpp"

namespace affdim {
namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) throw DomainError("matrix dimension must be in 1..8, got " + std::to_string(d));
}

// Hestenes one-sided Jacobi: rotates column pairs of a copy of T until they
// are mutually orthogonal. Each rotation is the Jacobi rotation that would
// annihilate the (p, q) entry of T^T T, applied without forming T^T T.
std::array<double, kMaxDim> one_sided_jacobi(const Matrix& t) {
  const int d = t.dim();
  Matrix u = t;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < d; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tan = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, tan);
        const double s = c * tan;
        for (int i = 0; i < d; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }
  std::array<double, kMaxDim> sv{};
  for (int j = 0; j < d; ++j) {
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) norm2 += u(i, j) * u(i, j);
    sv[j] = std::sqrt(norm2);
  }
  std::sort(sv.begin(), sv.begin() + d, std::greater<>());
  return sv;
}

}  // namespace

Matrix::Matrix(int d) : d_(d) { check_dim(d); }

Matrix Matrix::identity(int d) {
  Matrix m(d);
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(static_cast<int>(diag.size()));
  for (int i = 0; i < m.dim(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<int>(rows.size()));
  for (int i = 0; i < m.dim(); ++i) {
    if (static_cast<int>(rows[i].size()) != m.dim()) throw DomainError("matrix rows must be square");
    for (int j = 0; j < m.dim(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  Matrix out(d_);
  for (int i = 0; i < d_; ++i) {
    for (int k = 0; k < d_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (int j = 0; j < d_; ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

Matrix Matrix::operator*(double c) const {
  Matrix out = *this;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) out(i, j) *= c;
  return out;
}

Vec Matrix::apply(std::span<const double> x) const {
  Vec y(d_, 0.0);
  for (int i = 0; i < d_; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d_; ++j) acc += (*this)(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

double Matrix::determinant() const {
  Matrix lu = *this;
  double det = 1.0;
  for (int c = 0; c < d_; ++c) {
    int pivot = c;
    for (int r = c + 1; r < d_; ++r)
      if (std::abs(lu(r, c)) > std::abs(lu(pivot, c))) pivot = r;
    if (lu(pivot, c) == 0.0) return 0.0;
    if (pivot != c) {
      for (int j = 0; j < d_; ++j) std::swap(lu(c, j), lu(pivot, j));
      det = -det;
    }
    det *= lu(c, c);
    for (int r = c + 1; r < d_; ++r) {
      const double f = lu(r, c) / lu(c, c);
      for (int j = c; j < d_; ++j) lu(r, j) -= f * lu(c, j);
    }
  }
  return det;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

bool Matrix::is_diagonal() const {
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      if (i != j && (*this)(i, j) != 0.0) return false;
  return true;
}

bool Matrix::all_finite() const {
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      if (!std::isfinite((*this)(i, j))) return false;
  return true;
}

std::string Matrix::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (int i = 0; i < d_; ++i) {
    os << (i ? ",[" : "[");
    for (int j = 0; j < d_; ++j) os << (j ? "," : "") << (*this)(i, j);
    os << ']';
  }
  os << ']';
  return os.str();
}

double SingularSpectrum::alpha(int k) const { return std::exp(log_alpha[k]); }

std::vector<double> SingularSpectrum::alphas() const {
  std::vector<double> a(d);
  for (int k = 0; k < d; ++k) a[k] = alpha(k);
  return a;
}

double SingularSpectrum::log_abs_det() const {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += log_alpha[k];
  return s;
}

namespace detail {

std::array<double, kMaxDim> raw_singular_values(const Matrix& t) {
  const int d = t.dim();
  std::array<double, kMaxDim> sv{};
  if (d == 1) {
    sv[0] = std::abs(t(0, 0));
  } else if (d == 2) {
    // sigma_{1,2} = (|(a+d, c-b)| +- |(a-d, c+b)|) / 2; the smaller one is
    // taken as |det| / sigma_1 to avoid cancellation.
    const double a = t(0, 0), b = t(0, 1), c = t(1, 0), e = t(1, 1);
    sv[0] = 0.5 * (std::hypot(a + e, c - b) + std::hypot(a - e, c + b));
    sv[1] = sv[0] > 0.0 ? std::abs(a * e - b * c) / sv[0] : 0.0;
  } else {
    sv = one_sided_jacobi(t);
  }
  return sv;
}

}  // namespace detail

SingularSpectrum singular_values(const Matrix& t) {
  if (!t.all_finite()) throw DomainError("matrix has non-finite entries");
  const double scale = t.max_abs();
  const double det = t.determinant();
  if (scale == 0.0 || std::abs(det) < 1e-14 * std::pow(scale, t.dim())) {
    throw SingularMatrix("|det| = " + std::to_string(std::abs(det)) + " for " + t.to_string());
  }
  const auto sv = detail::raw_singular_values(t);
  SingularSpectrum s;
  s.d = t.dim();
  for (int k = 0; k < s.d; ++k) s.log_alpha[k] = std::log(sv[k]);
  if (s.d > 2) {
    // Pin the smallest value to the determinant.
    double rest = 0.0;
    for (int k = 0; k + 1 < s.d; ++k) rest += s.log_alpha[k];
    s.log_alpha[s.d - 1] = std::min(std::log(std::abs(det)) - rest, s.log_alpha[s.d - 2]);
  }
  return s;
}

double log_phi(const SingularSpectrum& spec, double s) {
  if (!(s >= 0.0)) throw DomainError("phi^s needs s >= 0");
  const int d = spec.d;
  if (s >= d) return (s / d) * spec.log_abs_det();
  const int k = static_cast<int>(std::floor(s));
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += spec.log_alpha[i];
  const double frac = s - k;
  if (frac > 0.0) acc += frac * spec.log_alpha[k];
  return acc;
}

double phi(const SingularSpectrum& spec, double s) { return std::exp(log_phi(spec, s)); }

MatrixChain::MatrixChain(int d) : d_(d), normalized_(Matrix::identity(d)) {
  check_dim(d);
  sign_diag_.fill(1.0);
}

void MatrixChain::push_back(const Matrix& t) { push_back(t, std::log(std::abs(t.determinant()))); }

void MatrixChain::push_back(const Matrix& t, double log_abs_det_t) {
  if (t.dim() != d_) throw DomainError("matrix chain dimension mismatch");
  ++length_;
  log_abs_det_ += log_abs_det_t;
  if (diagonal_ && t.is_diagonal()) {
    for (int k = 0; k < d_; ++k) {
      log_diag_[k] += std::log(std::abs(t(k, k)));
      if (t(k, k) < 0.0) sign_diag_[k] = -sign_diag_[k];
    }
    return;
  }
  if (diagonal_) {
    // Leave the exact diagonal representation.
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < d_; ++k) hi = std::max(hi, log_diag_[k]);
    normalized_ = Matrix(d_);
    for (int k = 0; k < d_; ++k) normalized_(k, k) = sign_diag_[k] * std::exp(log_diag_[k] - hi);
    log_scale_ = hi;
    diagonal_ = false;
  }
  normalized_ = normalized_ * t;
  const double m = normalized_.max_abs();
  int e = 0;
  std::frexp(m, &e);
  if (e != 0) {
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) normalized_(i, j) = std::ldexp(normalized_(i, j), -e);
    log_scale_ += e * std::numbers::ln2;
  }
}

SingularSpectrum MatrixChain::spectrum() const {
  SingularSpectrum s;
  s.d = d_;
  if (diagonal_) {
    for (int k = 0; k < d_; ++k) s.log_alpha[k] = log_diag_[k];
    std::sort(s.log_alpha.begin(), s.log_alpha.begin() + d_, std::greater<>());
    return s;
  }
  const auto sv = detail::raw_singular_values(normalized_);
  for (int k = 0; k < d_; ++k) s.log_alpha[k] = std::log(sv[k]) + log_scale_;
  if (d_ >= 2) {
    double rest = 0.0;
    for (int k = 0; k + 1 < d_; ++k) rest += s.log_alpha[k];
    s.log_alpha[d_ - 1] = std::min(log_abs_det_ - rest, s.log_alpha[d_ - 2]);
  }
  return s;
}

Matrix MatrixChain::matrix() const {
  Matrix out(d_);
  if (diagonal_) {
    for (int k = 0; k < d_; ++k) out(k, k) = sign_diag_[k] * std::exp(log_diag_[k]);
    return out;
  }
  return normalized_ * std::exp(log_scale_);
}

}  // namespace affdim
