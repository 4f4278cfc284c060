#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace affdim {

inline constexpr int kMaxDim = 8;

using Vec = std::vector<double>;

/// Small dense square matrix, 1 <= d <= kMaxDim, row-major, stored inline.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int d);  // zero matrix

  static Matrix identity(int d);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  int dim() const noexcept { return d_; }
  double operator()(int i, int j) const noexcept { return a_[i * kMaxDim + j]; }
  double& operator()(int i, int j) noexcept { return a_[i * kMaxDim + j]; }

  Matrix operator*(const Matrix& rhs) const;
  Matrix operator*(double c) const;
  Vec apply(std::span<const double> x) const;

  double determinant() const;
  double max_abs() const;
  bool is_diagonal() const;
  bool all_finite() const;
  std::string to_string() const;

 private:
  int d_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

/// Singular values of a matrix, kept as natural logs so that long products
/// (whose singular values underflow a double) stay representable.
/// Invariant: log_alpha is non-increasing.
struct SingularSpectrum {
  int d = 0;
  std::array<double, kMaxDim> log_alpha{};

  double alpha(int k) const;  // 0-based; may underflow to 0
  std::vector<double> alphas() const;
  double log_abs_det() const;
  double log_norm() const { return log_alpha[0]; }
};

/// Throws SingularMatrix when |det T| < 1e-14.
SingularSpectrum singular_values(const Matrix& t);

/// log phi^s(T) for the singular value function; s >= 0.
double log_phi(const SingularSpectrum& spec, double s);
/// Linear-domain convenience; underflows to 0 for long products.
double phi(const SingularSpectrum& spec, double s);

/// Running product T_1 T_2 ... T_n. The stored matrix is renormalised by
/// exact powers of two, the exponent being carried in `log_scale`. When every
/// factor is diagonal the product is tracked exactly as per-axis log moduli.
/// The log |det| is accumulated separately and pins the smallest singular
/// value, which is what makes d = 2 chains accurate at any length.
class MatrixChain {
 public:
  explicit MatrixChain(int d);

  void push_back(const Matrix& t);
  void push_back(const Matrix& t, double log_abs_det_t);

  int dim() const noexcept { return d_; }
  std::size_t length() const noexcept { return length_; }
  SingularSpectrum spectrum() const;
  double log_abs_det() const noexcept { return log_abs_det_; }
  /// Product as a matrix; entries may underflow for long chains.
  Matrix matrix() const;

 private:
  int d_;
  std::size_t length_ = 0;
  bool diagonal_ = true;
  std::array<double, kMaxDim> log_diag_{};
  std::array<double, kMaxDim> sign_diag_{};
  Matrix normalized_;
  double log_scale_ = 0.0;
  double log_abs_det_ = 0.0;
};

namespace detail {
/// Singular values (descending, linear scale) of a matrix with moderate entries.
std::array<double, kMaxDim> raw_singular_values(const Matrix& t);
}  // namespace detail

}  // namespace affdim
