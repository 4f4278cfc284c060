#include "affdim/symbolic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "affdim/errors.hpp"

namespace affdim {

Word Word::parse(std::string_view text) {
  std::vector<Symbol> s;
  if (text.find('.') != std::string_view::npos) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t dot = std::min(text.find('.', pos), text.size());
      int v = 0;
      const auto part = text.substr(pos, dot - pos);
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc{} || ptr != part.data() + part.size() || v < 1) {
        throw DomainError("bad symbol '" + std::string(part) + "' in word");
      }
      s.push_back(static_cast<Symbol>(v - 1));
      pos = dot + 1;
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > '9') throw DomainError(std::string("bad symbol '") + c + "' in word");
      s.push_back(static_cast<Symbol>(c - '1'));
    }
  }
  return Word(std::move(s));
}

Word Word::prefix(std::size_t n) const {
  if (n > s_.size()) throw DepthExceedsWord("prefix of length " + std::to_string(n) + " of a word of length " +
                                            std::to_string(s_.size()));
  return Word(std::vector<Symbol>(s_.begin(), s_.begin() + static_cast<std::ptrdiff_t>(n)));
}

std::string Word::to_string() const {
  const bool compact = std::all_of(s_.begin(), s_.end(), [](Symbol c) { return c < 9; });
  std::string out;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    if (compact) {
      out.push_back(static_cast<char>('1' + s_[i]));
    } else {
      if (i) out.push_back('.');
      out += std::to_string(s_[i] + 1);
    }
  }
  return out;
}

Word wedge(const Word& x, const Word& y) {
  const std::size_t n = std::min(x.size(), y.size());
  std::size_t k = 0;
  while (k < n && x[k] == y[k]) ++k;
  return x.prefix(k);
}

Word take(const SequenceGenerator& gen, std::size_t n) {
  std::vector<Symbol> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = gen(i);
  return Word(std::move(s));
}

SequenceGenerator periodic(Word period) {
  if (period.empty()) throw DomainError("empty period");
  return [p = std::move(period)](std::size_t i) { return p[i % p.size()]; };
}

void check_symbols(const Word& x, int m) {
  for (Symbol s : x.symbols())
    if (s >= m) throw DomainError("symbol " + std::to_string(s + 1) + " outside alphabet of size " + std::to_string(m));
}

SingularSpectrum word_spectrum(const AffineIFS& ifs, const Word& x, std::size_t n) {
  if (n > x.size()) throw DepthExceedsWord("depth " + std::to_string(n) + " > word length " + std::to_string(x.size()));
  MatrixChain chain(ifs.dim());
  for (std::size_t j = 0; j < n; ++j) chain.push_back(ifs.map(x[j]), ifs.log_abs_det(x[j]));
  return chain.spectrum();
}

SingularSpectrum word_spectrum(const AffineIFS& ifs, const Word& x) { return word_spectrum(ifs, x, x.size()); }

std::vector<SingularSpectrum> prefix_spectra(const AffineIFS& ifs, const Word& x, std::size_t n) {
  if (n > x.size()) throw DepthExceedsWord("depth " + std::to_string(n) + " > word length " + std::to_string(x.size()));
  check_symbols(x.prefix(n), ifs.size());
  std::vector<SingularSpectrum> out;
  out.reserve(n + 1);
  MatrixChain chain(ifs.dim());
  out.push_back(chain.spectrum());
  for (std::size_t j = 0; j < n; ++j) {
    chain.push_back(ifs.map(x[j]), ifs.log_abs_det(x[j]));
    out.push_back(chain.spectrum());
  }
  return out;
}

CodedPoint coding_point(const AffineIFS& ifs, const Word& x, std::size_t depth) {
  return coding_point(ifs, ifs.translations(), x, depth);
}

CodedPoint coding_point(const AffineIFS& ifs, const Translations& a, const Word& x, std::size_t depth) {
  if (depth > x.size()) {
    throw DepthExceedsWord("depth " + std::to_string(depth) + " > word length " + std::to_string(x.size()));
  }
  check_translations(ifs, a);
  const int d = ifs.dim();
  Vec p(d, 0.0);
  for (std::size_t j = depth; j-- > 0;) {
    const Symbol s = x[j];
    if (s >= ifs.size()) throw DomainError("symbol outside alphabet");
    Vec q = ifs.map(s).apply(p);
    for (int i = 0; i < d; ++i) q[i] += a[s][i];
    p = std::move(q);
  }
  CodedPoint cp;
  cp.point = std::move(p);
  cp.depth = depth;
  cp.error_bound = std::pow(ifs.alpha_plus(), static_cast<double>(depth)) * ifs.radius_bound(a);
  return cp;
}

}  // namespace affdim
