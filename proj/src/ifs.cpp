#include "affdim/ifs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "affdim/errors.hpp"

namespace affdim {
namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
};

}  // namespace

ValidationRecord validate_ifs(const std::vector<Matrix>& maps) {
  if (maps.empty()) throw DomainError("an IFS needs at least one map");
  ValidationRecord rec;
  rec.dim = maps.front().dim();
  rec.maps = static_cast<int>(maps.size());
  rec.alpha_plus = 0.0;
  rec.alpha_minus = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].dim() != rec.dim) throw DomainError("maps have different dimensions");
    const SingularSpectrum s = singular_values(maps[i]);  // throws SingularMatrix
    const double norm = s.alpha(0);
    if (!(norm < 1.0)) {
      throw NonContracting("map " + std::to_string(i + 1) + " has operator norm " + std::to_string(norm));
    }
    if (norm >= 0.5) {
      rec.warnings.push_back("map " + std::to_string(i + 1) + " has norm " + std::to_string(norm) +
                             " >= 1/2; almost-sure projection formulas are not guaranteed");
    }
    rec.alpha_plus = std::max(rec.alpha_plus, norm);
    rec.alpha_minus = std::min(rec.alpha_minus, s.alpha(s.d - 1));
  }
  rec.transversal = rec.alpha_plus < 0.5;
  return rec;
}

void check_translations(const AffineIFS& ifs, const Translations& a) {
  if (static_cast<int>(a.size()) != ifs.size()) throw DomainError("need one translation per map");
  for (const auto& v : a) {
    if (static_cast<int>(v.size()) != ifs.dim()) throw DomainError("translation has wrong dimension");
    for (double x : v)
      if (!std::isfinite(x)) throw DomainError("non-finite translation");
  }
}

AffineIFS::AffineIFS(std::vector<Matrix> maps, Translations translations)
    : maps_(std::move(maps)), translations_(std::move(translations)) {
  record_ = validate_ifs(maps_);
  dim_ = record_.dim;
  if (translations_.empty()) translations_.assign(maps_.size(), Vec(dim_, 0.0));
  check_translations(*this, translations_);
  all_diagonal_ = true;
  for (const auto& t : maps_) {
    spectra_.push_back(singular_values(t));
    log_dets_.push_back(std::log(std::abs(t.determinant())));
    all_diagonal_ = all_diagonal_ && t.is_diagonal();
  }
}

double AffineIFS::radius_bound(const Translations& a) const {
  double r = 0.0;
  for (const auto& v : a) {
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    r = std::max(r, std::sqrt(n2));
  }
  return r / (1.0 - alpha_plus());
}

AffineIFS AffineIFS::with_translations(Translations a) const {
  check_translations(*this, a);
  AffineIFS copy = *this;
  copy.translations_ = std::move(a);
  return copy;
}

std::uint64_t AffineIFS::fingerprint() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(dim_));
  h.add(static_cast<std::uint64_t>(maps_.size()));
  for (const auto& t : maps_)
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) h.add(t(i, j));
  for (const auto& v : translations_)
    for (double x : v) h.add(x);
  return h.h;
}

}  // namespace affdim
