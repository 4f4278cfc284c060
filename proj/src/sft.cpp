#include "affdim/sft.hpp"

#include "affdim/errors.hpp"

namespace affdim {

SftSpec::SftSpec(std::vector<std::vector<int>> allowed) : allowed_(std::move(allowed)) {
  const std::size_t m = allowed_.size();
  if (m == 0) throw DomainError("empty transition matrix");
  for (const auto& row : allowed_) {
    if (row.size() != m) throw DomainError("transition matrix must be square");
    for (int v : row)
      if (v != 0 && v != 1) throw DomainError("transition matrix entries must be 0 or 1");
  }
  const auto ext = extendable();
  bool any = false;
  for (bool b : ext) any = any || b;
  if (!any) throw DomainError("subshift is empty: no infinite admissible sequence");
}

SftSpec SftSpec::full(int m) {
  if (m < 1) throw DomainError("alphabet size must be positive");
  return SftSpec(std::vector<std::vector<int>>(m, std::vector<int>(m, 1)));
}

bool SftSpec::is_full() const {
  for (const auto& row : allowed_)
    for (int v : row)
      if (!v) return false;
  return true;
}

bool SftSpec::irreducible() const {
  const int m = alphabet_size();
  for (int start = 0; start < m; ++start) {
    std::vector<bool> seen(m, false);
    std::vector<int> stack{start};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < m; ++j) {
        if (allowed_[i][j] && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    for (bool b : seen)
      if (!b) return false;
  }
  return true;
}

std::vector<bool> SftSpec::extendable() const {
  const int m = alphabet_size();
  std::vector<bool> alive(m, true);
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      bool has_next = false;
      for (int j = 0; j < m && !has_next; ++j) has_next = allowed_[i][j] && alive[j];
      if (!has_next) {
        alive[i] = false;
        changed = true;
      }
    }
  }
  return alive;
}

std::vector<int> SftSpec::successors(int i) const {
  const auto ext = extendable();
  std::vector<int> out;
  for (int j = 0; j < alphabet_size(); ++j)
    if (allowed_[i][j] && ext[j]) out.push_back(j);
  return out;
}

bool SftSpec::admits(const Word& w) const {
  const auto ext = extendable();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= alphabet_size() || !ext[w[i]]) return false;
    if (i > 0 && !allowed_[w[i - 1]][w[i]]) return false;
  }
  return true;
}

double SftSpec::count_words(int n) const {
  if (n <= 0) return 1.0;
  const int m = alphabet_size();
  const auto ext = extendable();
  std::vector<double> ending(m);
  for (int i = 0; i < m; ++i) ending[i] = ext[i] ? 1.0 : 0.0;
  for (int len = 1; len < n; ++len) {
    std::vector<double> next(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (allowed_[i][j] && ext[j]) next[j] += ending[i];
    ending = std::move(next);
  }
  double total = 0.0;
  for (double c : ending) total += c;
  return total;
}

}  // namespace affdim
