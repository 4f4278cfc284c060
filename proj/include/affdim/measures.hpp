#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/rational.hpp"
#include "affdim/rng.hpp"
#include "affdim/sft.hpp"
#include "affdim/stats.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

enum class MeasureKind { bernoulli, markov, variable_product, sft_uniform };
const char* to_string(MeasureKind kind);

/// The product measure built from per-level alphabets B_j in {A_1, A_2, A_3}
/// with A_1 = {1..3^k}, A_2 = {1..3^{2k}}, A_3 = {1}, blocks scheduled by
/// M_i = 8^i:
///   B_j = A_2 on [M_i + 1, 9/8 M_i], A_3 on [9/8 M_i + 1, 5/4 M_i], else A_1.
/// The alphabet has m = 3^{2k} symbols and each level is uniform on B_j.
class ExampleOneSchedule {
 public:
  ExampleOneSchedule(int d, int k);  // 1 <= k < d

  int dim() const noexcept { return d_; }
  int k() const noexcept { return k_; }
  int alphabet_size() const noexcept { return m_; }

  /// 1, 2 or 3 for the alphabet used at level j >= 1.
  int block(std::int64_t j) const;
  /// #B_j.
  int block_size(std::int64_t j) const;
  /// Exponent e with mu([x|j]) = 3^{-e} for every x in the support.
  std::int64_t log3_mass_exponent(std::int64_t j) const;

  /// The diagonal IFS diag(1/3 (k times), 1/9 (d-k times)) repeated m times.
  AffineIFS ifs() const;

  /// S_n(mu, x) for x in the support, in exact rational arithmetic:
  /// singular values of T_{x|n} are 3^{-n} (k times) and 3^{-2n}.
  Rational exact_s_n(std::int64_t n) const;

 private:
  int d_;
  int k_;
  int m_;
};

/// A Borel probability measure on the full shift, represented by its
/// cylinder masses. Immutable after construction.
class TreeMeasure {
 public:
  static TreeMeasure bernoulli(std::vector<double> probs);
  /// Initial distribution and row-stochastic transition matrix.
  static TreeMeasure markov(std::vector<double> initial, std::vector<std::vector<double>> transition);
  /// Uniform successor measure on an SFT: the first symbol is uniform over
  /// extendable symbols, each later symbol uniform over extendable successors.
  static TreeMeasure sft_uniform(const SftSpec& sft);
  static TreeMeasure example_one(int d, int k);

  MeasureKind kind() const noexcept { return kind_; }
  int alphabet_size() const noexcept { return m_; }

  /// log mu([I]); -inf for a null cylinder.
  double log_mass(const Word& w) const;
  double mass(const Word& w) const;
  /// log mu([x|j]) for j = 0..n (entry 0 is the empty word, log 1 = 0).
  std::vector<double> prefix_log_masses(const Word& x, std::size_t n) const;

  /// Draws x|depth with x ~ mu. Null cylinders are never entered.
  Word sample(Stream& stream, std::size_t depth) const;

  const ExampleOneSchedule* example_one() const noexcept { return example_one_ ? &*example_one_ : nullptr; }

 private:
  TreeMeasure() = default;
  /// log of the conditional probability of `next` after the prefix `w`
  /// (whose last symbol and length are what matter for every kind here).
  double log_step(const Word& w, std::size_t pos, Symbol next) const;

  MeasureKind kind_ = MeasureKind::bernoulli;
  int m_ = 0;
  std::vector<double> initial_;                 // bernoulli probs / markov initial
  std::vector<std::vector<double>> transition_;  // markov / sft_uniform
  std::optional<ExampleOneSchedule> example_one_;
};

// --- per-point quantities -------------------------------------------------

/// S_n: the t in [0, inf] with phi^t(T) = mass, by piecewise log-linear
/// inversion. log_mass = -inf gives +inf.
double s_from_spectrum(const SingularSpectrum& spec, double log_mass);

/// Transversality kernel Z_I(r) = prod_k min{r, alpha_k}/alpha_k, in logs.
double log_z_kernel(const SingularSpectrum& spec, double r);
/// Same value via min_k r^k / phi^k(T).
double log_z_min_formula(const SingularSpectrum& spec, double r);
/// Same value via 1/Z = prod_k max{r, alpha_k}/r.
double log_z_reciprocal(const SingularSpectrum& spec, double r);
double z_kernel(const AffineIFS& ifs, const Word& word, double r);

/// Smallest l with alpha_+^l <= r, i.e. ceil(log r / log alpha_+); 0 for r >= 1.
std::size_t required_depth(double r, double alpha_plus);

/// Prefix spectra and cylinder masses along one word, computed once; every
/// per-point quantity at any radius is then a linear pass.
class PathProfile {
 public:
  PathProfile(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, std::size_t depth);

  std::size_t depth() const noexcept { return log_mass_.size() - 1; }
  const Word& word() const noexcept { return word_; }
  const SingularSpectrum& spectrum(std::size_t j) const { return spectra_.at(j); }
  double log_mass(std::size_t j) const { return log_mass_.at(j); }
  double alpha_plus() const noexcept { return alpha_plus_; }

  double s_n(std::size_t n) const;
  /// log G_mu(x, r) as the finite sum over the first l(r) levels; throws
  /// WordTooShort when l(r) exceeds the profile depth.
  double log_g(double r) const;

 private:
  Word word_;
  std::vector<SingularSpectrum> spectra_;
  std::vector<double> log_mass_;
  double alpha_plus_;
};

double s_n(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, std::size_t n);
double g_mu(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, double r);
double log_g_mu(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, double r);

/// Trace of log G(x, r_n)/log r_n over the grid; the limsup estimate is the
/// tail maximum.
TailTrace d_mu_estimate(const PathProfile& path, const ScaleGrid& grid);
TailTrace d_mu_estimate(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, const ScaleGrid& grid);

struct SEstimate {
  double liminf = 0.0;
  double limsup = 0.0;
  TailTrace trace;  // S_n for n = 1..n_max
};

SEstimate s_liminf_estimate(const PathProfile& path, std::size_t n_max);
SEstimate s_liminf_estimate(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, std::size_t n_max);

struct EssentialBounds {
  double s_lower = 0.0;  // essinf S(mu, x)
  double s_upper = 0.0;  // esssup S(mu, x)
  double d_lower = 0.0;  // essinf D(mu, x)
  double d_upper = 0.0;  // esssup D(mu, x)
  double s_q01 = 0.0, s_q99 = 0.0, d_q01 = 0.0, d_q99 = 0.0;
  std::vector<double> s_paths;
  std::vector<double> d_paths;
};

/// Monte-Carlo essential bounds over `n_paths` words drawn from mu.
EssentialBounds essential_bounds(const TreeMeasure& mu, const AffineIFS& ifs, Stream& stream,
                                 std::size_t n_paths, std::size_t n_max, const ScaleGrid& grid);

}  // namespace affdim
