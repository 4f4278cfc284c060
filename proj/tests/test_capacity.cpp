#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affdim/capacity.hpp"
#include "affdim/errors.hpp"
#include "affdim/measures.hpp"
#include "support.hpp"

using namespace affdim;
using testing::diag2;

namespace {

// Dense kernel from wedge words, independent of the tree's potentials.
std::vector<std::vector<double>> dense_kernel(const AffineIFS& ifs, const DepthTree& tree) {
  const auto words = tree.leaf_words();
  const std::size_t n = words.size();
  std::vector<std::vector<double>> k(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) k[i][j] = z_kernel(ifs, wedge(words[i], words[j]), tree.radius());
  return k;
}

double quad(const std::vector<std::vector<double>>& k, const std::vector<double>& p) {
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) e += k[i][j] * p[i] * p[j];
  return e;
}

// min x'Kx - 2 sum x over x >= 0 by projected coordinate descent; the
// simplex minimiser is x / sum x and its energy 1 / sum x.
std::vector<double> qp_oracle(const std::vector<std::vector<double>>& k) {
  const std::size_t n = k.size();
  std::vector<double> x(n, 1.0 / n);
  for (int sweep = 0; sweep < 200000; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double g = -1.0;
      for (std::size_t j = 0; j < n; ++j) g += k[i][j] * x[j];
      const double nx = std::max(0.0, x[i] - g / k[i][i]);
      change = std::max(change, std::abs(nx - x[i]));
      x[i] = nx;
    }
    if (change < 1e-15) break;
  }
  const double s = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= s;
  return x;
}

}  // namespace

TEST_CASE("tree shape") {
  const AffineIFS ifs({diag2(0.3, 0.2), diag2(0.3, 0.2), diag2(0.3, 0.2)});
  const DepthTree tree(ifs, 0.05);
  CHECK(tree.depth() == 3);
  CHECK(tree.leaf_count() == 27);
  CHECK(tree.node_count() == 1 + 3 + 9 + 27);
  const SftSpec golden({{1, 1}, {1, 0}});
  const DepthTree g(AffineIFS({diag2(0.3, 0.2), diag2(0.3, 0.2)}), 0.05, &golden);
  CHECK(g.leaf_count() == 5);
  for (const auto& w : g.leaf_words()) CHECK(golden.admits(w));
  CHECK_THROWS_AS(DepthTree(ifs, 1e-9, nullptr, 1000), BudgetExceeded);
}

TEST_CASE("energy against the dense double sum") {
  Stream s(1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Matrix> maps;
    for (int i = 0; i < 2 + trial % 2; ++i) maps.push_back(testing::random_contraction(s, 2, 0.8));
    const AffineIFS ifs(maps);
    const double r = std::exp(s.uniform(std::log(1e-3), std::log(0.5)));
    const std::size_t depth = std::min<std::size_t>(required_depth(r, ifs.alpha_plus()), 6);
    const DepthTree tree(ifs, r, depth, nullptr);
    const auto k = dense_kernel(ifs, tree);
    std::vector<double> p(tree.leaf_count());
    for (double& v : p) v = s.uniform();
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= sum;
    const double e = quad(k, p);
    CHECK(energy(tree, p) == doctest::Approx(e).epsilon(1e-10));
    CHECK(energy_brute_force(tree, p) == doctest::Approx(e).epsilon(1e-10));
    const auto phi = tree.potentials(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) row += k[i][j] * p[j];
      CHECK(phi[i] == doctest::Approx(row).epsilon(1e-10));
    }
  }
}

TEST_CASE("energy special cases") {
  const AffineIFS ifs({diag2(0.3, 0.2), diag2(0.25, 0.1)});
  // r = 1: the kernel is identically 1.
  const DepthTree flat(ifs, 1.0, 3, nullptr);
  std::vector<double> p(flat.leaf_count(), 0.0);
  p[0] = 0.3;
  p[5] = 0.7;
  CHECK(energy(flat, p) == doctest::Approx(1.0));
  const DepthTree tree(ifs, 0.01);
  std::vector<double> point(tree.leaf_count(), 0.0);
  point[2] = 1.0;
  CHECK(energy(tree, point) == doctest::Approx(1.0));
  CHECK(min_energy(flat).capacity == doctest::Approx(1.0));
  point[2] = 0.9;
  CHECK_THROWS_AS(energy(tree, point), MassNotNormalized);
}

TEST_CASE("symmetric system has the uniform minimiser") {
  const AffineIFS ifs({diag2(0.3, 0.2), diag2(0.3, 0.2), diag2(0.3, 0.2)});
  const DepthTree tree(ifs, 0.05);
  const auto sol = min_energy(tree, {CapacityMethod::frank_wolfe, 1e-10});
  const double u = 1.0 / tree.leaf_count();
  for (double v : sol.masses) CHECK(std::abs(v - u) <= 1e-6);
  CHECK(sol.gap < 1e-8);
  CHECK(sol.support_residual < 1e-6);
  CHECK(sol.converged);
}

TEST_CASE("solvers agree with the QP oracle") {
  const SftSpec golden({{1, 1}, {1, 0}});
  const AffineIFS gifs({diag2(0.3, 0.2), diag2(0.3, 0.2)});
  for (double r : {0.05, 0.01, 0.002}) {
    const DepthTree tree(gifs, r, &golden);
    REQUIRE(tree.leaf_count() <= 64);
    const auto k = dense_kernel(gifs, tree);
    const double oracle = quad(k, qp_oracle(k));
    const auto fw = min_energy(tree, {CapacityMethod::frank_wolfe, 1e-10});
    const auto um = min_energy(tree, {CapacityMethod::ultrametric});
    CHECK(std::abs(fw.energy - oracle) <= 1e-8);
    CHECK(std::abs(um.energy - oracle) <= 1e-8);
  }
  Stream s(2);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<Matrix> maps;
    for (int i = 0; i < 3; ++i) maps.push_back(testing::random_contraction(s, 2, 0.8));
    const AffineIFS ifs(maps);
    const DepthTree tree(ifs, 0.3 * std::pow(ifs.alpha_plus(), 2), 3, nullptr);
    const auto k = dense_kernel(ifs, tree);
    const double oracle = quad(k, qp_oracle(k));
    const auto fw = min_energy(tree, {CapacityMethod::frank_wolfe, 1e-10});
    const auto um = min_energy(tree, {CapacityMethod::ultrametric});
    CHECK(std::abs(fw.energy - oracle) <= 1e-8);
    CHECK(std::abs(um.energy - oracle) <= 1e-8);
  }
}

TEST_CASE("optimality certificate and capacity range") {
  Stream s(3);
  const double tol = 1e-9;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Matrix> maps;
    for (int i = 0; i < 3; ++i) maps.push_back(testing::random_contraction(s, 2, 0.7));
    const AffineIFS ifs(maps);
    const DepthTree tree(ifs, s.uniform(0.005, 0.2));
    for (auto method : {CapacityMethod::frank_wolfe, CapacityMethod::ultrametric}) {
      const auto sol = min_energy(tree, {method, tol});
      const auto phi = tree.potentials(sol.masses);
      for (std::size_t i = 0; i < phi.size(); ++i) {
        if (sol.masses[i] > 0.0) CHECK(std::abs(phi[i] - sol.energy) <= 10 * tol);
        CHECK(phi[i] >= sol.energy - 10 * tol);
      }
      CHECK(sol.capacity >= 1.0 - 1e-12);
      CHECK(sol.capacity <= tree.leaf_count() + 1e-9);
    }
  }
}

TEST_CASE("minimum is invariant under relabelling the maps") {
  const Matrix a = diag2(0.3, 0.2), b = Matrix::from_rows({{0.2, 0.1}, {0.0, 0.25}}), c = diag2(0.1, 0.3);
  const double r = 0.01;
  const auto e1 = min_energy(DepthTree(AffineIFS({a, b, c}), r)).energy;
  const auto e2 = min_energy(DepthTree(AffineIFS({c, a, b}), r)).energy;
  CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
}

TEST_CASE("capacity dimensions") {
  const AffineIFS single({diag2(0.5, 0.5)});
  const auto one = capacity_dims(single, nullptr, ScaleGrid{0.5, 1, 12, 1.0});
  CHECK(one.upper == doctest::Approx(0.0));
  const AffineIFS ifs({diag2(0.3, 0.2), diag2(0.3, 0.2), diag2(0.3, 0.2)});
  const auto big = capacity_dims(ifs, nullptr, ScaleGrid{0.5, 0, 2, 4.0});
  CHECK(big.log_capacity.front() == doctest::Approx(0.0));
  CHECK(big.trace.value.front() == 0.0);
  const auto capped = capacity_dims(ifs, nullptr, ScaleGrid{0.5, 1, 14, 1.0}, {CapacityMethod::ultrametric}, 5000);
  CHECK_FALSE(capped.skipped_radii.empty());
  CHECK(capped.radii.size() + capped.skipped_radii.size() == 14);
  CHECK_THROWS_AS(capacity_dims(ifs, nullptr, ScaleGrid{0.5, 20, 22, 1.0}, {CapacityMethod::ultrametric}, 100),
                  BudgetExceeded);
}

TEST_CASE("conformal capacity dimension") {
  // Two maps of ratio 1/3 on the line: min{1, log 2 / log 3}.
  const AffineIFS ifs(std::vector<Matrix>(2, Matrix::identity(1) * (1.0 / 3)));
  const auto cd = capacity_dims(ifs, nullptr, ScaleGrid{1.0 / 3, 8, 16, 1.0});
  const double target = std::log(2.0) / std::log(3.0);
  CHECK(std::abs(cd.lower - target) <= 0.05);
  CHECK(std::abs(cd.upper - target) <= 0.05);
}
