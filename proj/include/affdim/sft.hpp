#pragma once

#include <vector>

#include "affdim/symbolic.hpp"

namespace affdim {

/// Subshift of finite type given by a 0/1 transition matrix:
/// allowed(i, j) means symbol j may follow symbol i.
class SftSpec {
 public:
  SftSpec() = default;
  explicit SftSpec(std::vector<std::vector<int>> allowed);  // throws DomainError
  static SftSpec full(int m);

  int alphabet_size() const noexcept { return static_cast<int>(allowed_.size()); }
  bool allowed(int i, int j) const { return allowed_[i][j] != 0; }
  const std::vector<std::vector<int>>& matrix() const noexcept { return allowed_; }

  bool is_full() const;
  /// Strongly connected transition graph. Reported, not required.
  bool irreducible() const;
  /// Symbols lying on some infinite admissible path.
  std::vector<bool> extendable() const;
  std::vector<int> successors(int i) const;

  bool admits(const Word& w) const;
  /// Number of admissible words of length n that extend to infinite sequences.
  double count_words(int n) const;

 private:
  std::vector<std::vector<int>> allowed_;
};

}  // namespace affdim
