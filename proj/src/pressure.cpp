#include "affdim/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "affdim/errors.hpp"
#include "affdim/parallel.hpp"
#include "affdim/stats.hpp"

namespace affdim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Spectrum of the diagonal product with symbol counts c: the sorted per-axis
// log moduli.
SingularSpectrum diagonal_spectrum(const std::vector<std::array<double, kMaxDim>>& log_diag, int d,
                                   const std::vector<int>& counts) {
  SingularSpectrum s;
  s.d = d;
  for (int k = 0; k < d; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (counts[i]) acc += counts[i] * log_diag[i][k];
    s.log_alpha[k] = acc;
  }
  std::sort(s.log_alpha.begin(), s.log_alpha.begin() + d, std::greater<>());
  return s;
}

std::array<double, kMaxDim> log_abs_diagonal(const Matrix& t) {
  std::array<double, kMaxDim> out{};
  for (int k = 0; k < t.dim(); ++k) out[k] = std::log(std::abs(t(k, k)));
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

LevelSpectra enumerate_level(const AffineIFS& ifs, int n, const SftSpec* sft, const PressureBudget& budget) {
  const int m = ifs.size();
  const double words = sft ? sft->count_words(n) : std::pow(static_cast<double>(m), n);
  if (words > static_cast<double>(budget.max_terms)) {
    throw BudgetExceeded("level " + std::to_string(n) + " has " + std::to_string(words) + " words, budget " +
                         std::to_string(budget.max_terms));
  }
  std::vector<bool> ext(m, true);
  if (sft) ext = sft->extendable();

  std::vector<std::vector<SingularSpectrum>> per_lead(m);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t lead) {
    if (!ext[lead]) return;
    auto& out = per_lead[lead];
    std::function<void(const MatrixChain&, int, int)> dfs = [&](const MatrixChain& chain, int last, int len) {
      if (len == n) {
        out.push_back(chain.spectrum());
        return;
      }
      for (int j = 0; j < m; ++j) {
        if (sft && (!ext[j] || !sft->allowed(last, j))) continue;
        MatrixChain next = chain;
        next.push_back(ifs.map(j), ifs.log_abs_det(j));
        dfs(next, j, len + 1);
      }
    };
    MatrixChain first(ifs.dim());
    first.push_back(ifs.map(static_cast<int>(lead)), ifs.log_abs_det(static_cast<int>(lead)));
    dfs(first, static_cast<int>(lead), 1);
  });

  LevelSpectra level;
  level.level = n;
  for (auto& v : per_lead) {
    for (auto& s : v) {
      level.spectra.push_back(s);
      level.log_weight.push_back(0.0);
    }
  }
  return level;
}

// Full shift, diagonal maps: identical maps are merged into classes, then
// products are grouped by class-count vector with multinomial weights.
LevelSpectra diagonal_full_level(const AffineIFS& ifs, int n, const PressureBudget& budget) {
  std::vector<Matrix> reps;
  std::vector<int> mult;
  for (const auto& t : ifs.maps()) {
    bool merged = false;
    for (std::size_t c = 0; c < reps.size() && !merged; ++c) {
      bool same = true;
      for (int k = 0; k < t.dim() && same; ++k) same = std::abs(t(k, k)) == std::abs(reps[c](k, k));
      if (same) {
        ++mult[c];
        merged = true;
      }
    }
    if (!merged) {
      reps.push_back(t);
      mult.push_back(1);
    }
  }
  const int classes = static_cast<int>(reps.size());
  const double count = binomial(n + classes - 1, classes - 1);
  if (count > static_cast<double>(budget.max_terms)) {
    throw BudgetExceeded("level " + std::to_string(n) + " has " + std::to_string(count) + " count classes");
  }
  std::vector<std::array<double, kMaxDim>> log_diag;
  for (const auto& t : reps) log_diag.push_back(log_abs_diagonal(t));

  LevelSpectra level;
  level.level = n;
  level.diagonal = true;
  std::vector<int> counts(classes, 0);
  const double log_n_fact = std::lgamma(n + 1.0);
  std::function<void(int, int)> rec = [&](int c, int left) {
    if (c == classes - 1) {
      counts[c] = left;
      double lw = log_n_fact;
      for (int i = 0; i < classes; ++i) lw += counts[i] * std::log(static_cast<double>(mult[i])) - std::lgamma(counts[i] + 1.0);
      level.log_weight.push_back(lw);
      level.spectra.push_back(diagonal_spectrum(log_diag, ifs.dim(), counts));
      return;
    }
    for (int k = left; k >= 0; --k) {
      counts[c] = k;
      rec(c + 1, left - k);
    }
  };
  rec(0, n);
  return level;
}

// SFT, diagonal maps: dynamic programme over (count vector, last symbol).
LevelSpectra diagonal_sft_level(const AffineIFS& ifs, int n, const SftSpec& sft, const PressureBudget& budget) {
  const int m = ifs.size();
  const auto ext = sft.extendable();
  using Key = std::vector<int>;
  std::map<Key, std::vector<double>> states;
  for (int i = 0; i < m; ++i) {
    if (!ext[i]) continue;
    Key k(m, 0);
    k[i] = 1;
    states[k].assign(m, 0.0);
    states[k][i] = 1.0;
  }
  for (int len = 1; len < n; ++len) {
    std::map<Key, std::vector<double>> next;
    for (const auto& [key, ending] : states) {
      for (int i = 0; i < m; ++i) {
        if (ending[i] == 0.0) continue;
        for (int j = 0; j < m; ++j) {
          if (!ext[j] || !sft.allowed(i, j)) continue;
          Key k2 = key;
          ++k2[j];
          auto& slot = next[k2];
          if (slot.empty()) slot.assign(m, 0.0);
          slot[j] += ending[i];
        }
      }
    }
    if (next.size() > budget.max_terms) {
      throw BudgetExceeded("level " + std::to_string(len + 1) + " has " + std::to_string(next.size()) + " DP states");
    }
    states = std::move(next);
  }
  std::vector<std::array<double, kMaxDim>> log_diag;
  for (const auto& t : ifs.maps()) log_diag.push_back(log_abs_diagonal(t));
  LevelSpectra level;
  level.level = n;
  level.diagonal = true;
  for (const auto& [key, ending] : states) {
    double total = 0.0;
    for (double v : ending) total += v;
    if (total <= 0.0) continue;
    level.log_weight.push_back(std::log(total));
    level.spectra.push_back(diagonal_spectrum(log_diag, ifs.dim(), key));
  }
  return level;
}

void check_sft(const AffineIFS& ifs, const SftSpec* sft) {
  if (sft && sft->alphabet_size() != ifs.size()) throw DomainError("subshift alphabet differs from the number of maps");
}

// Root of s -> f(s) for a decreasing f with f(0) >= 0.
template <class F>
double bisect_decreasing(F f, double hi_start, double tol) {
  if (f(0.0) <= 0.0) return 0.0;
  double lo = 0.0, hi = std::max(hi_start, 1.0);
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw DomainError("pressure root not bracketed");
  }
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double LevelSpectra::log_partition(double s) const {
  std::vector<double> terms(spectra.size());
  for (std::size_t i = 0; i < spectra.size(); ++i) terms[i] = log_weight[i] + log_phi(spectra[i], s);
  return log_sum_exp(terms);
}

LevelSpectra level_spectra(const AffineIFS& ifs, int n, const SftSpec* sft, PartitionMethod method,
                           const PressureBudget& budget) {
  if (n < 1) throw DomainError("level must be at least 1");
  check_sft(ifs, sft);
  const bool full = !sft || sft->is_full();
  if (method == PartitionMethod::automatic) {
    method = ifs.all_diagonal() ? PartitionMethod::diagonal : PartitionMethod::enumerate;
  }
  if (method == PartitionMethod::diagonal) {
    if (!ifs.all_diagonal()) throw DomainError("diagonal partition method needs diagonal maps");
    return full ? diagonal_full_level(ifs, n, budget) : diagonal_sft_level(ifs, n, *sft, budget);
  }
  return enumerate_level(ifs, n, full ? nullptr : sft, budget);
}

double log_partition_sum(const AffineIFS& ifs, double s, int n, const SftSpec* sft, PartitionMethod method,
                         const PressureBudget& budget) {
  if (!(s >= 0.0)) throw DomainError("s must be non-negative");
  return level_spectra(ifs, n, sft, method, budget).log_partition(s);
}

double pressure_root(const LevelSpectra& level, double tol, int dim) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  return bisect_decreasing([&](double s) { return level.log_partition(s); }, static_cast<double>(dim), tol);
}

AffinityResult affinity_dim(const AffineIFS& ifs, const SftSpec* sft, int n_levels, double tol,
                            const PressureBudget& budget) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  check_sft(ifs, sft);
  AffinityResult res;
  res.diagonal_fast_path = ifs.all_diagonal();
  const int cap = res.diagonal_fast_path ? budget.max_levels_diagonal : budget.max_levels_generic;
  const bool automatic = n_levels <= 0;
  const int target = automatic ? cap : n_levels;

  for (int n = 1; n <= target; ++n) {
    LevelSpectra level;
    try {
      level = level_spectra(ifs, n, sft, PartitionMethod::automatic, budget);
    } catch (const BudgetExceeded&) {
      if (!automatic || n == 1) throw;
      break;
    }
    res.levels.push_back({n, pressure_root(level, tol, ifs.dim())});
  }
  res.deepest_level = res.levels.back().n;
  res.hi = kInf;
  for (const auto& l : res.levels) res.hi = std::min(res.hi, l.root);
  res.estimate = std::min(res.levels.back().root, res.hi);

  const bool full = !sft || sft->is_full();
  if (full) {
    // alpha_k(T_I) >= prod alpha_d(T_{i_j}) gives phi^s(T_I) >= prod alpha_d(T_{i_j})^s.
    res.rigorous_lo = bisect_decreasing(
        [&](double s) {
          std::vector<double> terms;
          for (int i = 0; i < ifs.size(); ++i) terms.push_back(s * ifs.spectrum(i).log_alpha[ifs.dim() - 1]);
          return log_sum_exp(terms);
        },
        static_cast<double>(ifs.dim()), tol);
  }
  res.lo = res.rigorous_lo;
  if (res.levels.size() >= 2) {
    const auto& a = res.levels[res.levels.size() - 2];
    const auto& b = res.levels.back();
    const double extrapolated = b.n * b.root - a.n * a.root;
    res.lo = std::max(res.rigorous_lo, std::min(extrapolated, res.estimate));
  }
  res.lo = std::min(res.lo, res.estimate);
  return res;
}

double anisotropy_tau(const AffineIFS& ifs) {
  double tau = kInf;
  for (int i = 0; i < ifs.size(); ++i) {
    const auto& s = ifs.spectrum(i);
    tau = std::min(tau, s.log_alpha[0] / s.log_alpha[s.d - 1]);
  }
  return tau;
}

double exceptional_bound(int d, int m, double delta, double dim_m_e, double tau) {
  if (d < 1 || m < 1) throw DomainError("d and m must be positive");
  if (!(delta > 0.0 && delta < d)) throw DomainError("delta must lie in (0, d)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau must lie in [0, 1]");
  if (!(dim_m_e >= 0.0 && dim_m_e < d)) throw DomainError("dim_M E must lie in [0, d)");
  const double dm = static_cast<double>(d) * m;
  const double set_branch = dm + dim_m_e - d - delta;
  if (tau == 1.0) return set_branch;  // conformal maps: delta / (1 - tau) is infinite
  return std::max(dm - delta / (1.0 - tau), set_branch);
}

double generic_exceptional_bound(int d, int m, double delta) {
  if (d < 1 || m < 1) throw DomainError("d and m must be positive");
  if (!(delta > 0.0 && delta < d)) throw DomainError("delta must lie in (0, d)");
  return static_cast<double>(d) * m - delta;
}

}  // namespace affdim
