#include "affdim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"

namespace affdim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNormTol = 1e-9;
const double kLog3 = std::log(3.0);

void check_distribution(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw DomainError(std::string(what) + " is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTol) {
    throw MassNotNormalized(std::string(what) + " sums to " + std::to_string(sum));
  }
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : -kInf; }

// Draws an index from p by inversion, never returning a zero entry.
Symbol draw(Stream& stream, const std::vector<double>& p) {
  const double u = stream.uniform();
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += p[i];
    if (u < acc) return static_cast<Symbol>(i);
  }
  return static_cast<Symbol>(last_positive);
}

std::int64_t pow_int(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::bernoulli: return "bernoulli";
    case MeasureKind::markov: return "markov";
    case MeasureKind::variable_product: return "variable_product";
    case MeasureKind::sft_uniform: return "sft_uniform";
  }
  return "unknown";
}

// --- ExampleOneSchedule ----------------------------------------------------

ExampleOneSchedule::ExampleOneSchedule(int d, int k) : d_(d), k_(k) {
  if (d < 2 || d > kMaxDim) throw DomainError("example system needs 2 <= d <= 8");
  if (k < 1 || k >= d) throw DomainError("example system needs 1 <= k < d");
  if (2 * k > 8) throw DomainError("alphabet 3^(2k) too large for k > 4");
  m_ = static_cast<int>(pow_int(3, 2 * k));
}

int ExampleOneSchedule::block(std::int64_t j) const {
  if (j < 1) throw DomainError("levels start at 1");
  // M_i = 8^i for i >= 1; the special ranges [M_i+1, 5/4 M_i] are disjoint.
  for (std::int64_t mi = 8; mi < j; mi *= 8) {
    if (j <= mi * 9 / 8) return 2;
    if (j <= mi * 5 / 4) return 3;
    if (mi > (std::int64_t{1} << 58)) break;
  }
  return 1;
}

int ExampleOneSchedule::block_size(std::int64_t j) const {
  switch (block(j)) {
    case 2: return m_;
    case 3: return 1;
    default: return static_cast<int>(pow_int(3, k_));
  }
}

std::int64_t ExampleOneSchedule::log3_mass_exponent(std::int64_t j) const {
  if (j < 0) throw DomainError("negative level");
  // k per level, plus k per A_2 level, minus k per A_3 level, up to j.
  std::int64_t extra = 0;
  for (std::int64_t mi = 8; mi < j; mi *= 8) {
    const std::int64_t a2_end = mi * 9 / 8;
    const std::int64_t a3_end = mi * 5 / 4;
    extra += std::min(j, a2_end) - mi;
    if (j > a2_end) extra -= std::min(j, a3_end) - a2_end;
    if (mi > (std::int64_t{1} << 58)) break;
  }
  return k_ * (j + extra);
}

AffineIFS ExampleOneSchedule::ifs() const {
  std::vector<double> diag(d_, 1.0 / 9.0);
  for (int i = 0; i < k_; ++i) diag[i] = 1.0 / 3.0;
  return AffineIFS(std::vector<Matrix>(m_, Matrix::diagonal(diag)));
}

Rational ExampleOneSchedule::exact_s_n(std::int64_t n) const {
  if (n < 1) throw DomainError("S_n needs n >= 1");
  // In base-3 exponents: phi^s(T_{x|n}) = 3^{-ns} on [0, k] and
  // 3^{-nk - 2n(s-k)} on [k, d]; the mass is 3^{-e}.
  const std::int64_t e = log3_mass_exponent(n);
  if (e <= n * k_) return Rational(e, n);
  const std::int64_t full = n * k_ + 2 * n * (d_ - k_);
  if (e <= full) return Rational(k_) + Rational(e - n * k_, 2 * n);
  return Rational(e * d_, full);
}

// --- TreeMeasure -----------------------------------------------------------

TreeMeasure TreeMeasure::bernoulli(std::vector<double> probs) {
  check_distribution(probs, "bernoulli weights");
  TreeMeasure mu;
  mu.kind_ = MeasureKind::bernoulli;
  mu.m_ = static_cast<int>(probs.size());
  mu.initial_ = std::move(probs);
  return mu;
}

TreeMeasure TreeMeasure::markov(std::vector<double> initial, std::vector<std::vector<double>> transition) {
  check_distribution(initial, "initial distribution");
  if (transition.size() != initial.size()) throw DomainError("transition matrix size does not match initial vector");
  for (const auto& row : transition) {
    if (row.size() != initial.size()) throw DomainError("transition matrix must be square");
    check_distribution(row, "transition row");
  }
  TreeMeasure mu;
  mu.kind_ = MeasureKind::markov;
  mu.m_ = static_cast<int>(initial.size());
  mu.initial_ = std::move(initial);
  mu.transition_ = std::move(transition);
  return mu;
}

TreeMeasure TreeMeasure::sft_uniform(const SftSpec& sft) {
  const int m = sft.alphabet_size();
  const auto ext = sft.extendable();
  TreeMeasure mu;
  mu.kind_ = MeasureKind::sft_uniform;
  mu.m_ = m;
  mu.initial_.assign(m, 0.0);
  int n_ext = 0;
  for (bool b : ext) n_ext += b ? 1 : 0;
  for (int i = 0; i < m; ++i)
    if (ext[i]) mu.initial_[i] = 1.0 / n_ext;
  mu.transition_.assign(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) {
    const auto succ = sft.successors(i);
    if (succ.empty()) {
      mu.transition_[i][i] = 1.0;  // unreachable row; keeps the matrix stochastic
      continue;
    }
    for (int j : succ) mu.transition_[i][j] = 1.0 / static_cast<double>(succ.size());
  }
  return mu;
}

TreeMeasure TreeMeasure::example_one(int d, int k) {
  TreeMeasure mu;
  mu.kind_ = MeasureKind::variable_product;
  mu.example_one_.emplace(d, k);
  mu.m_ = mu.example_one_->alphabet_size();
  return mu;
}

double TreeMeasure::log_step(const Word& w, std::size_t pos, Symbol next) const {
  if (next >= m_) return -kInf;
  if (example_one_) {
    const int size = example_one_->block_size(static_cast<std::int64_t>(pos) + 1);
    return next < size ? -std::log(static_cast<double>(size)) : -kInf;
  }
  if (kind_ == MeasureKind::bernoulli || pos == 0) return safe_log(initial_[next]);
  return safe_log(transition_[w[pos - 1]][next]);
}

double TreeMeasure::log_mass(const Word& w) const {
  if (example_one_) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] >= example_one_->block_size(static_cast<std::int64_t>(j) + 1)) return -kInf;
    }
    return -kLog3 * static_cast<double>(example_one_->log3_mass_exponent(static_cast<std::int64_t>(w.size())));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size() && acc > -kInf; ++j) acc += log_step(w, j, w[j]);
  return acc;
}

double TreeMeasure::mass(const Word& w) const { return std::exp(log_mass(w)); }

std::vector<double> TreeMeasure::prefix_log_masses(const Word& x, std::size_t n) const {
  if (n > x.size()) throw DepthExceedsWord("depth " + std::to_string(n) + " > word length " + std::to_string(x.size()));
  std::vector<double> out(n + 1, 0.0);
  if (example_one_) {
    bool in_support = true;
    for (std::size_t j = 1; j <= n; ++j) {
      in_support = in_support && x[j - 1] < example_one_->block_size(static_cast<std::int64_t>(j));
      out[j] = in_support ? -kLog3 * static_cast<double>(example_one_->log3_mass_exponent(static_cast<std::int64_t>(j)))
                          : -kInf;
    }
    return out;
  }
  for (std::size_t j = 1; j <= n; ++j) {
    out[j] = out[j - 1] == -kInf ? -kInf : out[j - 1] + log_step(x, j - 1, x[j - 1]);
  }
  return out;
}

Word TreeMeasure::sample(Stream& stream, std::size_t depth) const {
  std::vector<Symbol> s(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    if (example_one_) {
      s[j] = static_cast<Symbol>(stream.below(static_cast<std::uint64_t>(
          example_one_->block_size(static_cast<std::int64_t>(j) + 1))));
    } else if (kind_ == MeasureKind::bernoulli || j == 0) {
      s[j] = draw(stream, initial_);
    } else {
      s[j] = draw(stream, transition_[s[j - 1]]);
    }
  }
  return Word(std::move(s));
}

// --- per-point quantities ----------------------------------------------------

double s_from_spectrum(const SingularSpectrum& spec, double log_mass) {
  if (log_mass == -kInf) return kInf;
  if (log_mass >= 0.0) return 0.0;
  double log_phi_k = 0.0;
  for (int k = 0; k < spec.d; ++k) {
    const double la = spec.log_alpha[k];
    const double log_phi_next = log_phi_k + la;
    if (la < 0.0 && log_mass >= log_phi_next) return k + (log_mass - log_phi_k) / la;
    log_phi_k = log_phi_next;
  }
  // Beyond d: phi^s = |det|^{s/d}.
  if (log_phi_k >= 0.0) return kInf;
  return spec.d * log_mass / log_phi_k;
}

double log_z_kernel(const SingularSpectrum& spec, double r) {
  if (!(r > 0.0)) throw DomainError("kernel radius must be positive");
  const double lr = std::log(r);
  double acc = 0.0;
  for (int k = 0; k < spec.d; ++k) acc += std::min(0.0, lr - spec.log_alpha[k]);
  return acc;
}

double log_z_min_formula(const SingularSpectrum& spec, double r) {
  if (!(r > 0.0)) throw DomainError("kernel radius must be positive");
  const double lr = std::log(r);
  double best = 0.0;  // k = 0 term
  double log_phi_k = 0.0;
  for (int k = 1; k <= spec.d; ++k) {
    log_phi_k += spec.log_alpha[k - 1];
    best = std::min(best, k * lr - log_phi_k);
  }
  return best;
}

double log_z_reciprocal(const SingularSpectrum& spec, double r) {
  if (!(r > 0.0)) throw DomainError("kernel radius must be positive");
  const double lr = std::log(r);
  double inv = 0.0;
  for (int k = 0; k < spec.d; ++k) inv += std::max(lr, spec.log_alpha[k]) - lr;
  return -inv;
}

double z_kernel(const AffineIFS& ifs, const Word& word, double r) {
  check_symbols(word, ifs.size());
  return std::exp(log_z_kernel(word_spectrum(ifs, word), r));
}

std::size_t required_depth(double r, double alpha_plus) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (!(alpha_plus > 0.0 && alpha_plus < 1.0)) throw DomainError("alpha_+ must lie in (0, 1)");
  if (r >= 1.0) return 0;
  const double ratio = std::log(r) / std::log(alpha_plus);
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

PathProfile::PathProfile(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, std::size_t depth)
    : word_(x.prefix(depth)), alpha_plus_(ifs.alpha_plus()) {
  if (mu.alphabet_size() != ifs.size()) throw DomainError("measure and IFS alphabets differ");
  spectra_ = prefix_spectra(ifs, word_, depth);
  log_mass_ = mu.prefix_log_masses(word_, depth);
}

double PathProfile::s_n(std::size_t n) const { return s_from_spectrum(spectrum(n), log_mass(n)); }

double PathProfile::log_g(double r) const {
  const std::size_t ell = required_depth(r, alpha_plus_);
  if (ell > depth()) {
    throw WordTooShort("radius " + std::to_string(r) + " needs depth " + std::to_string(ell) + ", have " +
                       std::to_string(depth()));
  }
  std::vector<double> terms;
  terms.reserve(ell + 1);
  for (std::size_t j = 0; j < ell; ++j) {
    const double drop = log_diff_exp(log_mass_[j], log_mass_[j + 1]);
    if (drop == -kInf) continue;
    terms.push_back(log_z_kernel(spectra_[j], r) + drop);
  }
  terms.push_back(log_z_kernel(spectra_[ell], r) + log_mass_[ell]);
  return log_sum_exp(terms);
}

double s_n(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, std::size_t n) {
  return PathProfile(mu, ifs, x, n).s_n(n);
}

double log_g_mu(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, double r) {
  const std::size_t ell = required_depth(r, ifs.alpha_plus());
  if (ell > x.size()) {
    throw WordTooShort("radius " + std::to_string(r) + " needs a word of length " + std::to_string(ell));
  }
  return PathProfile(mu, ifs, x, ell).log_g(r);
}

double g_mu(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, double r) {
  return std::exp(log_g_mu(mu, ifs, x, r));
}

TailTrace d_mu_estimate(const PathProfile& path, const ScaleGrid& grid) {
  grid.validate();
  std::vector<double> radii = grid.radii();
  std::vector<double> values;
  values.reserve(radii.size());
  for (double r : radii) {
    if (!(r < 1.0)) throw DomainError("D estimate needs radii below 1");
    values.push_back(path.log_g(r) / std::log(r));
  }
  return make_tail_trace(std::move(radii), std::move(values));
}

TailTrace d_mu_estimate(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, const ScaleGrid& grid) {
  grid.validate();
  const double finest = grid.radii().back();
  const std::size_t ell = required_depth(finest, ifs.alpha_plus());
  if (ell > x.size()) throw WordTooShort("finest radius needs a word of length " + std::to_string(ell));
  return d_mu_estimate(PathProfile(mu, ifs, x, ell), grid);
}

SEstimate s_liminf_estimate(const PathProfile& path, std::size_t n_max) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  if (n_max > path.depth()) {
    throw DepthExceedsWord("n_max " + std::to_string(n_max) + " > profile depth " + std::to_string(path.depth()));
  }
  std::vector<double> level(n_max), value(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    level[n - 1] = static_cast<double>(n);
    value[n - 1] = path.s_n(n);
  }
  SEstimate est;
  est.trace = make_tail_trace(std::move(level), std::move(value));
  est.liminf = est.trace.tail_min;
  est.limsup = est.trace.tail_max;
  return est;
}

SEstimate s_liminf_estimate(const TreeMeasure& mu, const AffineIFS& ifs, const Word& x, std::size_t n_max) {
  return s_liminf_estimate(PathProfile(mu, ifs, x, n_max), n_max);
}

EssentialBounds essential_bounds(const TreeMeasure& mu, const AffineIFS& ifs, Stream& stream, std::size_t n_paths,
                                 std::size_t n_max, const ScaleGrid& grid) {
  if (n_paths == 0) throw DomainError("need at least one path");
  grid.validate();
  const std::size_t depth = std::max(n_max, required_depth(grid.radii().back(), ifs.alpha_plus()));
  const Stream root(stream.next_u64());
  std::vector<double> s_vals(n_paths), d_vals(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    Stream local = root.child(i);
    const PathProfile path(mu, ifs, mu.sample(local, depth), depth);
    s_vals[i] = s_liminf_estimate(path, n_max).liminf;
    d_vals[i] = d_mu_estimate(path, grid).tail_max;
  });
  EssentialBounds out;
  out.s_lower = *std::min_element(s_vals.begin(), s_vals.end());
  out.s_upper = *std::max_element(s_vals.begin(), s_vals.end());
  out.d_lower = *std::min_element(d_vals.begin(), d_vals.end());
  out.d_upper = *std::max_element(d_vals.begin(), d_vals.end());
  out.s_q01 = quantile(s_vals, 0.01);
  out.s_q99 = quantile(s_vals, 0.99);
  out.d_q01 = quantile(d_vals, 0.01);
  out.d_q99 = quantile(d_vals, 0.99);
  out.s_paths = std::move(s_vals);
  out.d_paths = std::move(d_vals);
  return out;
}

}  // namespace affdim
