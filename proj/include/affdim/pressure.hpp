#pragma once

#include <cstdint>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/sft.hpp"

namespace affdim {

struct PressureBudget {
  std::uint64_t max_terms = 1u << 20;  // words (or count classes) per level
  int max_levels_generic = 12;
  int max_levels_diagonal = 64;
};

enum class PartitionMethod { automatic, enumerate, diagonal };

/// The distinct products at one level with their log multiplicities.
/// Generic enumeration yields one entry per admissible word; the diagonal
/// path yields one entry per symbol-count vector.
struct LevelSpectra {
  int level = 0;
  std::vector<double> log_weight;
  std::vector<SingularSpectrum> spectra;
  bool diagonal = false;

  /// log sum_{|I| = n} phi^s(T_I).
  double log_partition(double s) const;
  /// p_n(s) = log_partition(s) / n.
  double pressure(double s) const { return log_partition(s) / level; }
};

LevelSpectra level_spectra(const AffineIFS& ifs, int n, const SftSpec* sft = nullptr,
                           PartitionMethod method = PartitionMethod::automatic,
                           const PressureBudget& budget = {});

/// log sum_{|I|=n, I admissible} phi^s(T_I). Throws BudgetExceeded.
double log_partition_sum(const AffineIFS& ifs, double s, int n, const SftSpec* sft = nullptr,
                         PartitionMethod method = PartitionMethod::automatic,
                         const PressureBudget& budget = {});

struct PressureSample {
  double s = 0.0;
  int n = 0;
  double value = 0.0;  // p_n(s)
  bool bracketing = false;
};

struct LevelRoot {
  int n = 0;
  double root = 0.0;  // zero of p_n
};

struct AffinityResult {
  double estimate = 0.0;  // root at the deepest affordable level (capped by hi)
  double lo = 0.0;
  double hi = 0.0;        // min over levels; rigorous upper bound by subadditivity
  double rigorous_lo = 0.0;
  int deepest_level = 0;
  bool diagonal_fast_path = false;
  std::vector<LevelRoot> levels;

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Root of s -> p_n(s) by bisection to width < tol.
double pressure_root(const LevelSpectra& level, double tol, int dim);

/// Affinity dimension (or, with an SFT, the root of its pressure, which is
/// dim_M of the subshift). Levels 1..n_levels are computed, capped by the
/// budget; n_levels <= 0 means "as deep as the budget allows".
AffinityResult affinity_dim(const AffineIFS& ifs, const SftSpec* sft = nullptr, int n_levels = 0,
                            double tol = 1e-9, const PressureBudget& budget = {});

/// tau = min_i log alpha_1(T_i) / log alpha_d(T_i), in (0, 1]; 1 for conformal maps.
double anisotropy_tau(const AffineIFS& ifs);

/// max{dm - delta/(1-tau), dm + dim_M E - d - delta}, the first term dropped
/// when tau = 1. Throws DomainError.
double exceptional_bound(int d, int m, double delta, double dim_m_e, double tau);
/// The generic bound dm - delta.
double generic_exceptional_bound(int d, int m, double delta);

}  // namespace affdim
