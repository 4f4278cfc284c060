#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/linalg.hpp"

namespace affdim {

using Symbol = std::uint16_t;

/// Finite word over the alphabet {0, ..., m-1}. Printed 1-based, matching the
/// usual {1..m} convention. The empty word addresses the whole space and maps
/// to the identity matrix.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> s) : s_(s) {}
  explicit Word(std::vector<Symbol> s) : s_(std::move(s)) {}

  /// Parses a 1-based digit string such as "1213" (alphabets up to 9) or a
  /// dot-separated list such as "12.3.81".
  static Word parse(std::string_view text);

  std::size_t size() const noexcept { return s_.size(); }
  bool empty() const noexcept { return s_.empty(); }
  Symbol operator[](std::size_t i) const { return s_[i]; }
  const std::vector<Symbol>& symbols() const noexcept { return s_; }

  void push_back(Symbol s) { s_.push_back(s); }
  Word prefix(std::size_t n) const;
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> s_;
};

/// Longest common prefix x ^ y.
Word wedge(const Word& x, const Word& y);

/// An infinite sequence seen through its generator; words are finite prefixes.
using SequenceGenerator = std::function<Symbol(std::size_t)>;
Word take(const SequenceGenerator& gen, std::size_t n);
/// The periodic sequence (period)^infinity.
SequenceGenerator periodic(Word period);

/// T_{x|n} = T_{x_1} ... T_{x_n}; throws DepthExceedsWord if n > |x|.
SingularSpectrum word_spectrum(const AffineIFS& ifs, const Word& x, std::size_t n);
SingularSpectrum word_spectrum(const AffineIFS& ifs, const Word& x);

/// Spectra of T_{x|0}, T_{x|1}, ..., T_{x|n}.
std::vector<SingularSpectrum> prefix_spectra(const AffineIFS& ifs, const Word& x, std::size_t n);

struct CodedPoint {
  Vec point;
  std::size_t depth = 0;
  double error_bound = 0.0;  // alpha_+^depth * R(a)
};

/// f_{x_1} o ... o f_{x_n}(0), an approximation of pi^a(x) with explicit error.
CodedPoint coding_point(const AffineIFS& ifs, const Word& x, std::size_t depth);
CodedPoint coding_point(const AffineIFS& ifs, const Translations& a, const Word& x, std::size_t depth);

void check_symbols(const Word& x, int m);

}  // namespace affdim
