#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affdim/linalg.hpp"

namespace affdim {

/// Translation vector a = (a_1, ..., a_m), one d-vector per map.
using Translations = std::vector<Vec>;

struct ValidationRecord {
  int dim = 0;
  int maps = 0;
  double alpha_plus = 0.0;   // max_i ||T_i||
  double alpha_minus = 0.0;  // min_i alpha_d(T_i)
  bool transversal = false;  // every ||T_i|| < 1/2
  std::vector<std::string> warnings;
};

/// Checks a matrix tuple: throws SingularMatrix / NonContracting, and
/// records a warning when some 1/2 <= ||T_i|| < 1 (the almost-sure
/// projection results are then not guaranteed).
ValidationRecord validate_ifs(const std::vector<Matrix>& maps);

/// The affine IFS {T_i x + a_i}. Immutable; singular data cached.
class AffineIFS {
 public:
  /// Translations may be empty (all zero); otherwise one per map.
  AffineIFS(std::vector<Matrix> maps, Translations translations = {});

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(maps_.size()); }
  const Matrix& map(int i) const { return maps_[i]; }
  const std::vector<Matrix>& maps() const noexcept { return maps_; }
  const Translations& translations() const noexcept { return translations_; }
  const SingularSpectrum& spectrum(int i) const { return spectra_[i]; }
  double log_abs_det(int i) const { return log_dets_[i]; }

  double alpha_plus() const noexcept { return record_.alpha_plus; }
  double alpha_minus() const noexcept { return record_.alpha_minus; }
  bool transversal() const noexcept { return record_.transversal; }
  bool all_diagonal() const noexcept { return all_diagonal_; }
  const ValidationRecord& validation() const noexcept { return record_; }

  /// R(a) = max_i |a_i| / (1 - alpha_+): f_i(B(0,R)) lies in B(0,R) for all i,
  /// so the attractor does too.
  double radius_bound() const { return radius_bound(translations_); }
  double radius_bound(const Translations& a) const;

  AffineIFS with_translations(Translations a) const;

  /// Stable 64-bit fingerprint of matrices (and translations).
  std::uint64_t fingerprint() const;

 private:
  int dim_ = 0;
  std::vector<Matrix> maps_;
  Translations translations_;
  std::vector<SingularSpectrum> spectra_;
  std::vector<double> log_dets_;
  ValidationRecord record_;
  bool all_diagonal_ = false;
};

void check_translations(const AffineIFS& ifs, const Translations& a);

}  // namespace affdim
