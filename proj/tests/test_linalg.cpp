#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "affdim/errors.hpp"
#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"
#include "support.hpp"

using namespace affdim;
using testing::random_matrix;

namespace {

// Singular values of a 2x2 matrix from the eigenvalues of its Gram matrix.
std::pair<double, double> gram_oracle(double a, double b, double c, double d) {
  const double p = a * a + c * c, q = a * b + c * d, r = b * b + d * d;
  const double mean = 0.5 * (p + r);
  const double rad = std::sqrt(0.25 * (p - r) * (p - r) + q * q);
  return {std::sqrt(mean + rad), std::sqrt(mean - rad)};
}

}  // namespace

TEST_CASE("identity and diagonal spectra") {
  const auto id = singular_values(Matrix::identity(2));
  CHECK(id.alpha(0) == doctest::Approx(1.0));
  CHECK(id.alpha(1) == doctest::Approx(1.0));
  const auto dg = singular_values(testing::diag2(1.0 / 9, 1.0 / 3));
  CHECK(dg.alpha(0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(dg.alpha(1) == doctest::Approx(1.0 / 9).epsilon(1e-15));
}

TEST_CASE("2x2 spectrum against the Gram closed form") {
  const auto sp = singular_values(Matrix::from_rows({{0.3, 0.1}, {0.0, 0.2}}));
  const auto [s1, s2] = gram_oracle(0.3, 0.1, 0.0, 0.2);
  CHECK(sp.alpha(0) == doctest::Approx(s1).epsilon(1e-14));
  CHECK(sp.alpha(1) == doctest::Approx(s2).epsilon(1e-14));
  CHECK(sp.alpha(0) * sp.alpha(1) == doctest::Approx(0.06).epsilon(1e-14));

  Stream s(3);
  for (int i = 0; i < 500; ++i) {
    const Matrix t = random_matrix(s, 2);
    const auto g = gram_oracle(t(0, 0), t(0, 1), t(1, 0), t(1, 1));
    const auto sp2 = singular_values(t);
    CHECK(sp2.alpha(0) == doctest::Approx(g.first).epsilon(1e-12));
    CHECK(sp2.alpha(1) == doctest::Approx(g.second).epsilon(1e-9));
  }
}

TEST_CASE("spectrum product equals |det| and is sorted") {
  Stream s(5);
  for (int d = 1; d <= kMaxDim; ++d) {
    for (int i = 0; i < 100; ++i) {
      const Matrix t = random_matrix(s, d);
      const auto sp = singular_values(t);
      CHECK(sp.log_abs_det() == doctest::Approx(std::log(std::abs(t.determinant()))).epsilon(1e-12));
      for (int k = 1; k < d; ++k) CHECK(sp.log_alpha[k] <= sp.log_alpha[k - 1]);
    }
  }
}

TEST_CASE("phi values") {
  const auto dg = singular_values(testing::diag2(1.0 / 3, 1.0 / 9));
  CHECK(phi(dg, 0.0) == 1.0);
  CHECK(phi(dg, 1.5) == doctest::Approx(1.0 / 9).epsilon(1e-14));
  CHECK(phi(dg, 1.0) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(phi(dg, 2.0) == doctest::Approx(1.0 / 27).epsilon(1e-14));
  // s >= d: |det|^{s/d}
  CHECK(phi(dg, 3.0) == doctest::Approx(std::pow(1.0 / 27, 1.5)).epsilon(1e-14));
}

TEST_CASE("phi is submultiplicative") {
  Stream s(11);
  for (int i = 0; i < 1000; ++i) {
    const int d = 2 + static_cast<int>(s.below(3));
    const Matrix a = random_matrix(s, d), b = random_matrix(s, d);
    const auto sa = singular_values(a), sb = singular_values(b), sab = singular_values(a * b);
    for (double t = 0.0; t <= d; t += 0.25) {
      CHECK(log_phi(sab, t) <= log_phi(sa, t) + log_phi(sb, t) + 1e-10);
    }
  }
}

TEST_CASE("log phi agrees with direct evaluation") {
  Stream s(12);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(s.below(4));
    const auto sp = singular_values(random_matrix(s, d));
    for (double t = 0.0; t <= d + 1; t += 0.3) {
      const int k = static_cast<int>(std::floor(t));
      double direct = 1.0;
      if (t >= d) {
        direct = std::pow(std::exp(sp.log_abs_det()), t / d);
      } else {
        for (int j = 0; j < k; ++j) direct *= sp.alpha(j);
        direct *= std::pow(sp.alpha(k), t - k);
      }
      CHECK(phi(sp, t) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("long chains keep the spectrum representable") {
  const Matrix t = Matrix::from_rows({{0.3, 0.1}, {-0.05, 0.2}});
  MatrixChain chain(2);
  for (int i = 0; i < 2000; ++i) chain.push_back(t);
  const auto sp = chain.spectrum();
  CHECK(std::isfinite(sp.log_alpha[1]));
  CHECK(sp.log_abs_det() == doctest::Approx(2000 * std::log(std::abs(t.determinant()))).epsilon(1e-12));
  // Top singular value grows like the spectral radius; the eigenvalues are a
  // complex pair here, so that radius is sqrt(det).
  const double rho = std::sqrt(t.determinant());
  CHECK(sp.log_alpha[0] / 2000 == doctest::Approx(std::log(rho)).epsilon(1e-3));
}

TEST_CASE("chain spectrum matches direct product on short words") {
  Stream s(21);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + static_cast<int>(s.below(4));
    MatrixChain chain(d);
    Matrix prod = Matrix::identity(d);
    for (int j = 0; j < 6; ++j) {
      const Matrix t = random_matrix(s, d);
      chain.push_back(t);
      prod = prod * t;
    }
    const auto a = chain.spectrum(), b = singular_values(prod);
    for (int k = 0; k < d; ++k) CHECK(a.log_alpha[k] == doctest::Approx(b.log_alpha[k]).epsilon(1e-9));
  }
}

TEST_CASE("singular-value ratio bounds along random words") {
  Stream s(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(s.below(2));
    std::vector<Matrix> maps;
    for (int i = 0; i < 3; ++i) maps.push_back(testing::random_contraction(s, d, 0.8));
    const AffineIFS ifs(maps);
    MatrixChain chain(d);
    auto prev = chain.spectrum();
    for (int n = 0; n < 20; ++n) {
      chain.push_back(maps[s.below(3)]);
      const auto cur = chain.spectrum();
      for (int k = 0; k < d; ++k) {
        const double ratio = cur.log_alpha[k] - prev.log_alpha[k];
        CHECK(ratio >= std::log(ifs.alpha_minus()) - 1e-10);
        CHECK(ratio <= std::log(ifs.alpha_plus()) + 1e-10);
      }
      prev = cur;
    }
  }
}

TEST_CASE("ifs validation") {
  const AffineIFS ok({testing::diag2(0.3, 0.3), testing::diag2(0.3, 0.2)});
  CHECK(ok.transversal());
  CHECK(ok.validation().warnings.empty());
  const AffineIFS wide({testing::diag2(0.7, 0.2)});
  CHECK_FALSE(wide.transversal());
  CHECK(wide.validation().warnings.size() == 1);
  CHECK_THROWS_AS(AffineIFS({Matrix::from_rows({{0.3, 0.6}, {0.1, 0.2}})}), SingularMatrix);
  CHECK_THROWS_AS(AffineIFS({testing::diag2(1.0, 0.2)}), NonContracting);
  CHECK_THROWS_AS(AffineIFS(std::vector<Matrix>{}), DomainError);
  CHECK_THROWS_AS(AffineIFS({testing::diag2(0.3, 0.2), Matrix::identity(3) * 0.2}), DomainError);
}

TEST_CASE("radius bound contains the attractor") {
  const AffineIFS ifs({testing::diag2(0.5, 0.25), testing::diag2(0.25, 0.5)}, {{1.0, 0.0}, {0.0, -2.0}});
  CHECK(ifs.radius_bound() == doctest::Approx(4.0));
  CHECK(ifs.fingerprint() == AffineIFS(ifs.maps(), ifs.translations()).fingerprint());
  CHECK(ifs.fingerprint() != ifs.with_translations({{1.0, 0.0}, {0.0, -1.0}}).fingerprint());
}
