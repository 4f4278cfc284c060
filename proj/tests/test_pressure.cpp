#include <doctest.h>

#include <cmath>
#include <functional>

#include "affdim/errors.hpp"
#include "affdim/pressure.hpp"
#include "affdim/stats.hpp"
#include "support.hpp"

using namespace affdim;
using testing::diag2;

namespace {

// log sum over all admissible words of length n of phi^s(T_I), by explicit
// recursion with direct matrix products.
double brute_log_partition(const AffineIFS& ifs, double s, int n, const SftSpec* sft) {
  std::vector<double> terms;
  std::function<void(int, int, Matrix)> rec = [&](int depth, int last, Matrix prod) {
    if (depth == n) {
      terms.push_back(log_phi(singular_values(prod), s));
      return;
    }
    for (int i = 0; i < ifs.size(); ++i) {
      if (sft && last >= 0 && !sft->allowed(last, i)) continue;
      if (sft && !sft->extendable()[i]) continue;
      rec(depth + 1, i, prod * ifs.map(i));
    }
  };
  rec(0, -1, Matrix::identity(ifs.dim()));
  return log_sum_exp(terms);
}

AffineIFS rotations() {
  const double c = 1.0 / 3;
  std::vector<Matrix> maps;
  for (int i = 0; i < 4; ++i) {
    const double th = 0.7 * i + 0.2;
    maps.push_back(Matrix::from_rows({{c * std::cos(th), -c * std::sin(th)}, {c * std::sin(th), c * std::cos(th)}}));
  }
  return AffineIFS(maps);
}

}  // namespace

TEST_CASE("conformal partition sums") {
  const AffineIFS ifs = rotations();
  for (int n : {1, 3, 5}) {
    for (double s : {0.0, 0.7, 1.3, 2.0}) {
      CHECK(log_partition_sum(ifs, s, n) == doctest::Approx(n * std::log(4 * std::pow(3.0, -s))).epsilon(1e-12));
    }
  }
  const AffineIFS pair({diag2(0.4, 0.2), diag2(0.4, 0.2)});
  for (double s : {0.0, 0.5, 1.0}) {
    CHECK(log_partition_sum(pair, s, 7) == doctest::Approx(7 * std::log(2.0) + 7 * s * std::log(0.4)).epsilon(1e-12));
  }
}

TEST_CASE("diagonal fast path equals enumeration at n = 8") {
  const AffineIFS ifs({diag2(0.3, 0.2), diag2(0.25, 0.1)});
  for (double s : {0.4, 1.0, 1.3, 1.9, 2.5}) {
    const double fast = log_partition_sum(ifs, s, 8, nullptr, PartitionMethod::diagonal);
    const double slow = log_partition_sum(ifs, s, 8, nullptr, PartitionMethod::enumerate);
    CHECK(std::abs(fast - slow) <= 1e-10);
    CHECK(std::abs(fast - brute_log_partition(ifs, s, 8, nullptr)) <= 1e-10);
  }
  const SftSpec golden({{1, 1}, {1, 0}});
  for (double s : {0.5, 1.3}) {
    const double fast = log_partition_sum(ifs, s, 8, &golden, PartitionMethod::diagonal);
    CHECK(std::abs(fast - brute_log_partition(ifs, s, 8, &golden)) <= 1e-10);
  }
}

TEST_CASE("generic enumeration against brute force") {
  Stream st(2);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Matrix> maps;
    for (int i = 0; i < 3; ++i) maps.push_back(testing::random_contraction(st, 2, 0.8));
    const AffineIFS ifs(maps);
    const SftSpec sft({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}});
    for (double s : {0.3, 1.1, 1.8}) {
      CHECK(log_partition_sum(ifs, s, 5) == doctest::Approx(brute_log_partition(ifs, s, 5, nullptr)).epsilon(1e-12));
      CHECK(log_partition_sum(ifs, s, 5, &sft) == doctest::Approx(brute_log_partition(ifs, s, 5, &sft)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pressure is decreasing, subadditive and dominated by the full shift") {
  Stream st(3);
  std::vector<Matrix> maps;
  for (int i = 0; i < 3; ++i) maps.push_back(testing::random_contraction(st, 2, 0.8));
  const AffineIFS ifs(maps);
  const SftSpec sft({{1, 1, 0}, {1, 0, 1}, {1, 1, 1}});
  std::vector<LevelSpectra> levels, sft_levels;
  for (int n = 1; n <= 6; ++n) {
    levels.push_back(level_spectra(ifs, n));
    sft_levels.push_back(level_spectra(ifs, n, &sft));
  }
  for (double s = 0.0; s <= 3.0; s += 0.1) {
    for (int n = 1; n <= 6; ++n) {
      const auto& lv = levels[n - 1];
      CHECK(lv.log_partition(s + 0.1) < lv.log_partition(s));
      CHECK(sft_levels[n - 1].log_partition(s) <= lv.log_partition(s) + 1e-12);
      for (int m = 1; m + n <= 6; ++m) {
        CHECK(levels[n + m - 1].log_partition(s) <= lv.log_partition(s) + levels[m - 1].log_partition(s) + 1e-10);
      }
    }
  }
}

TEST_CASE("affinity dimension closed forms") {
  const auto rot = affinity_dim(rotations());
  CHECK(std::abs(rot.estimate - std::log(4.0) / std::log(3.0)) < 1e-5);
  const auto pair = affinity_dim(AffineIFS({diag2(0.4, 0.2), diag2(0.4, 0.2)}));
  CHECK(std::abs(pair.estimate - std::log(2.0) / std::log(2.5)) < 1e-5);
  CHECK(pair.diagonal_fast_path);
  // Conformal systems above the ambient dimension.
  const auto many = affinity_dim(AffineIFS(std::vector<Matrix>(7, Matrix::identity(1) * 0.5)));
  CHECK(many.estimate == doctest::Approx(std::log(7.0) / std::log(2.0)).epsilon(1e-8));
  // Each level root is the log-log closed form for a single-symbol class.
  const AffineIFS one({diag2(0.5, 0.5)});
  CHECK(affinity_dim(one).estimate == doctest::Approx(0.0));
}

TEST_CASE("affinity bracket on an anisotropic system") {
  const AffineIFS ifs({diag2(0.3, 0.2), diag2(0.3, 0.2), diag2(0.3, 0.2)});
  const auto r = affinity_dim(ifs, nullptr, 12);
  CHECK(r.lo <= r.estimate);
  CHECK(r.estimate <= r.hi);
  CHECK(r.rigorous_lo <= r.lo + 1e-12);
  CHECK(r.levels.size() == 12);
  // Identical maps: every level has the same root log 3 / log(1/0.3).
  for (const auto& lv : r.levels) CHECK(lv.root == doctest::Approx(std::log(3.0) / std::log(1 / 0.3)).epsilon(1e-8));

  const AffineIFS mixed({diag2(0.3, 0.2), diag2(0.2, 0.3), Matrix::from_rows({{0.25, 0.1}, {0.0, 0.2}})});
  const auto g = affinity_dim(mixed, nullptr, 7);
  CHECK(g.width() >= 0.0);
  CHECK(g.lo <= g.hi);
  double mn = 1e9;
  for (const auto& lv : g.levels) mn = std::min(mn, lv.root);
  CHECK(g.hi == doctest::Approx(mn));
  CHECK_THROWS_AS(affinity_dim(mixed, nullptr, 30, 1e-9, PressureBudget{1000, 30, 64}), BudgetExceeded);
}

TEST_CASE("SFT root is the subshift dimension") {
  // Golden-mean shift under two equal similarities of ratio c: log(phi)/log(1/c).
  const AffineIFS ifs(std::vector<Matrix>(2, Matrix::identity(1) * 0.25));
  const SftSpec golden({{1, 1}, {1, 0}});
  const auto r = affinity_dim(ifs, &golden);
  const double golden_ratio = 0.5 * (1 + std::sqrt(5.0));
  CHECK(r.hi >= std::log(golden_ratio) / std::log(4.0) - 1e-9);
  CHECK(r.estimate == doctest::Approx(std::log(golden_ratio) / std::log(4.0)).epsilon(2e-2));
}

TEST_CASE("exceptional bound calculators") {
  const AffineIFS ifs({diag2(0.4, 0.2), diag2(0.4, 0.2)});
  const double tau = anisotropy_tau(ifs);
  CHECK(std::abs(tau - std::log(0.4) / std::log(0.2)) < 1e-12);
  CHECK(exceptional_bound(2, 2, 0.5, 1.5, tau) == 3.0);
  CHECK(4.0 - 0.5 / (1.0 - tau) == doctest::Approx(2.8391).epsilon(1e-4));
  CHECK(exceptional_bound(2, 1, 0.5, 1.0, 0.0) == std::max(2.0 - 0.5, 2.0 + 1.0 - 2.0 - 0.5));
  // Conformal maps have tau = 1 and only the set branch remains.
  CHECK(anisotropy_tau(AffineIFS({diag2(0.3, 0.3)})) == doctest::Approx(1.0));
  CHECK(exceptional_bound(2, 1, 0.5, 1.0, 1.0) == 2.0 + 1.0 - 2.0 - 0.5);
  CHECK(generic_exceptional_bound(2, 2, 0.5) == 3.5);
  CHECK_THROWS_AS(exceptional_bound(2, 1, 0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(exceptional_bound(2, 1, 0.5, 1.0, 1.5), DomainError);
  CHECK_THROWS_AS(exceptional_bound(2, 1, 0.5, 2.0, 0.0), DomainError);
}
