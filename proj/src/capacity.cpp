#include "affdim/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affdim/errors.hpp"
#include "affdim/measures.hpp"
#include "affdim/parallel.hpp"

namespace affdim {
namespace {

constexpr double kNormTol = 1e-9;

void check_masses(const DepthTree& tree, std::span<const double> p) {
  if (p.size() != tree.leaf_count()) {
    throw DomainError("mass vector has " + std::to_string(p.size()) + " entries, tree has " +
                      std::to_string(tree.leaf_count()) + " leaves");
  }
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw MassNotNormalized("negative or NaN mass");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTol) throw MassNotNormalized("masses sum to " + std::to_string(sum));
}

}  // namespace

DepthTree::DepthTree(const AffineIFS& ifs, double r, const SftSpec* sft, std::size_t max_nodes)
    : DepthTree(ifs, r, required_depth(r, ifs.alpha_plus()), sft, max_nodes) {}

DepthTree::DepthTree(const AffineIFS& ifs, double r, std::size_t depth, const SftSpec* sft, std::size_t max_nodes)
    : r_(r), depth_(depth) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (sft && sft->alphabet_size() != ifs.size()) throw DomainError("subshift alphabet differs from the number of maps");
  if (depth > 255) throw BudgetExceeded("tree depth " + std::to_string(depth) + " exceeds 255");
  const double estimate = node_estimate(ifs.size(), depth, sft);
  if (estimate > static_cast<double>(max_nodes)) {
    throw BudgetExceeded("depth " + std::to_string(depth) + " tree needs " + std::to_string(estimate) +
                         " nodes, cap " + std::to_string(max_nodes));
  }
  build(ifs, sft, max_nodes);
}

double DepthTree::node_estimate(int m, std::size_t depth, const SftSpec* sft) {
  double total = 0.0;
  for (std::size_t j = 0; j <= depth; ++j) {
    total += sft ? sft->count_words(static_cast<int>(j)) : std::pow(static_cast<double>(m), static_cast<double>(j));
  }
  return total;
}

void DepthTree::build(const AffineIFS& ifs, const SftSpec* sft, std::size_t max_nodes) {
  const int m = ifs.size();
  std::vector<bool> ext(m, true);
  if (sft) ext = sft->extendable();

  // Breadth-first layout; children of a node are contiguous and in symbol
  // order, so each level is in lexicographic order.
  parent_.assign(1, 0);
  symbol_.assign(1, 0);
  level_.assign(1, 0);
  std::vector<std::uint32_t> child_begin;
  std::size_t level_start = 0;
  for (std::size_t j = 0; j < depth_; ++j) {
    const std::size_t level_end = parent_.size();
    for (std::size_t v = level_start; v < level_end; ++v) {
      child_begin.push_back(static_cast<std::uint32_t>(parent_.size()));
      for (int s = 0; s < m; ++s) {
        if (!ext[s]) continue;
        if (sft && j > 0 && !sft->allowed(symbol_[v], s)) continue;
        parent_.push_back(static_cast<std::uint32_t>(v));
        symbol_.push_back(static_cast<Symbol>(s));
        level_.push_back(static_cast<std::uint8_t>(j + 1));
      }
      if (parent_.size() > max_nodes) throw BudgetExceeded("tree exceeds the node cap");
    }
    level_start = level_end;
  }
  leaf_begin_ = level_start;
  child_begin.push_back(static_cast<std::uint32_t>(parent_.size()));
  // Internal nodes are exactly [0, leaf_begin_); child ranges are
  // [child_begin[v], child_begin[v + 1]).

  log_z_.assign(parent_.size(), 0.0);
  std::vector<MatrixChain> stack(depth_ + 1, MatrixChain(ifs.dim()));
  log_z_[0] = log_z_kernel(stack[0].spectrum(), r_);
  // Iterative depth-first pass over the breadth-first layout.
  std::vector<std::pair<std::size_t, std::size_t>> todo;  // (node, depth)
  if (leaf_begin_ > 0) {
    for (std::size_t c = child_begin[1]; c-- > child_begin[0];) todo.emplace_back(c, 1);
  }
  while (!todo.empty()) {
    const auto [v, lev] = todo.back();
    todo.pop_back();
    stack[lev] = stack[lev - 1];
    stack[lev].push_back(ifs.map(symbol_[v]), ifs.log_abs_det(symbol_[v]));
    log_z_[v] = log_z_kernel(stack[lev].spectrum(), r_);
    if (v < leaf_begin_) {
      for (std::size_t c = child_begin[v + 1]; c-- > child_begin[v];) todo.emplace_back(c, lev + 1);
    }
  }
}

std::vector<Word> DepthTree::leaf_words() const {
  std::vector<Word> out;
  out.reserve(leaf_count());
  for (std::size_t leaf = leaf_begin_; leaf < node_count(); ++leaf) {
    std::vector<Symbol> s(depth_);
    std::size_t v = leaf;
    for (std::size_t j = depth_; j-- > 0;) {
      s[j] = symbol_[v];
      v = parent_[v];
    }
    out.emplace_back(std::move(s));
  }
  return out;
}

std::vector<double> DepthTree::potentials(std::span<const double> v) const {
  if (v.size() != leaf_count()) throw DomainError("vector size does not match leaf count");
  const std::size_t n = node_count();
  std::vector<double> subtree(n, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) subtree[leaf_begin_ + i] = v[i];
  for (std::size_t u = n; u-- > 1;) subtree[parent_[u]] += subtree[u];
  // acc(child) = acc(parent) + Z_parent (M_parent - M_child)
  std::vector<double> acc(n, 0.0);
  for (std::size_t u = 1; u < n; ++u) {
    const std::size_t p = parent_[u];
    acc[u] = acc[p] + std::exp(log_z_[p]) * (subtree[p] - subtree[u]);
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = acc[leaf_begin_ + i] + v[i];
  return out;
}

std::vector<double> DepthTree::kernel_column(std::size_t leaf) const {
  std::vector<double> e(leaf_count(), 0.0);
  e.at(leaf) = 1.0;
  return potentials(e);
}

double DepthTree::kernel(std::size_t leaf_i, std::size_t leaf_j) const {
  if (leaf_i >= leaf_count() || leaf_j >= leaf_count()) throw DomainError("leaf index out of range");
  if (leaf_i == leaf_j) return 1.0;
  std::size_t a = leaf_begin_ + leaf_i, b = leaf_begin_ + leaf_j;
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return std::exp(log_z_[a]);
}

double energy(const DepthTree& tree, std::span<const double> p) {
  check_masses(tree, p);
  const auto phi = tree.potentials(p);
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) e += p[i] * phi[i];
  return e;
}

double energy_brute_force(const DepthTree& tree, std::span<const double> p) {
  check_masses(tree, p);
  double e = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.size(); ++j) e += tree.kernel(i, j) * p[i] * p[j];
  return e;
}

CapacitySolution certify(const DepthTree& tree, std::vector<double> masses) {
  check_masses(tree, masses);
  CapacitySolution sol;
  sol.potentials = tree.potentials(masses);
  double e = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) e += masses[i] * sol.potentials[i];
  sol.energy = e;
  sol.capacity = 1.0 / e;
  const double min_phi = *std::min_element(sol.potentials.begin(), sol.potentials.end());
  sol.gap = e - min_phi;
  sol.min_excess = min_phi - e;
  sol.support_residual = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] > 0.0) sol.support_residual = std::max(sol.support_residual, std::abs(sol.potentials[i] - e));
  }
  sol.masses = std::move(masses);
  return sol;
}

namespace {

CapacitySolution frank_wolfe(const DepthTree& tree, const CapacityOptions& options) {
  const std::size_t n = tree.leaf_count();
  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> phi = tree.potentials(p);
  std::size_t it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += p[i] * phi[i];
    std::size_t s = 0, a = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (phi[i] < phi[s]) s = i;
      if (p[i] > 0.0 && (a == n || phi[i] > phi[a])) a = i;
    }
    const double fw_gap = e - phi[s];
    const double away_gap = phi[a] - e;
    if (std::max(fw_gap, away_gap) < options.tol) {
      converged = true;
      break;
    }
    // f(p + g d) = e + 2 g <d, phi> + g^2 <d, K d>; K_ii = 1.
    if (fw_gap >= away_gap) {
      const double slope = phi[s] - e;
      const double curv = 1.0 - 2.0 * phi[s] + e;
      const double g = curv > 0.0 ? std::clamp(-slope / curv, 0.0, 1.0) : 1.0;
      for (double& v : p) v *= 1.0 - g;
      p[s] += g;
    } else {
      const double g_max = p[a] < 1.0 ? p[a] / (1.0 - p[a]) : std::numeric_limits<double>::infinity();
      const double slope = e - phi[a];
      const double curv = e - 2.0 * phi[a] + 1.0;
      double g = curv > 0.0 ? -slope / curv : g_max;
      g = std::clamp(g, 0.0, g_max);
      for (double& v : p) v *= 1.0 + g;
      p[a] -= g;
      if (g == g_max) p[a] = 0.0;  // drop step
    }
    for (double& v : p) v = std::max(v, 0.0);
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
    phi = tree.potentials(p);
  }
  CapacitySolution sol = certify(tree, std::move(p));
  sol.iterations = it;
  sol.converged = converged;
  return sol;
}

// Across distinct children of a node v the kernel is the constant Z_v, so
// with child weights w_c and normalised child energies E_c the energy at v
// is Z_v + sum_c w_c^2 (E_c - Z_v). Minimising over the simplex gives
// w_c proportional to 1 / (E_c - Z_v).
CapacitySolution ultrametric(const DepthTree& tree) {
  const std::size_t n = tree.node_count();
  const auto& parent = tree.parents();
  std::vector<double> best(n, 1.0);  // leaves: energy 1
  std::vector<double> inv_sum(n, 0.0);
  std::vector<int> zero_children(n, 0);
  for (std::size_t u = n; u-- > 1;) {
    const std::size_t v = parent[u];
    // Descendants of u have larger indices, so best[u] is final here.
    const double a = best[u] - std::exp(tree.log_z(v));
    if (a <= 0.0) {
      ++zero_children[v];
    } else {
      inv_sum[v] += 1.0 / a;
    }
    const bool last_child = (u - 1 == 0) || parent[u - 1] != v;
    if (last_child) {
      const double z = std::exp(tree.log_z(v));
      best[v] = zero_children[v] > 0 ? z : z + 1.0 / inv_sum[v];
    }
  }
  std::vector<double> weight(n, 1.0);
  for (std::size_t u = 1; u < n; ++u) {
    const std::size_t v = parent[u];
    const double a = best[u] - std::exp(tree.log_z(v));
    double w;
    if (zero_children[v] > 0) {
      w = a <= 0.0 ? 1.0 / zero_children[v] : 0.0;
    } else {
      w = (1.0 / a) / inv_sum[v];
    }
    weight[u] = weight[v] * w;
  }
  std::vector<double> masses(weight.begin() + static_cast<std::ptrdiff_t>(tree.leaf_begin()), weight.end());
  double sum = 0.0;
  for (double v : masses) sum += v;
  for (double& v : masses) v /= sum;
  return certify(tree, std::move(masses));
}

}  // namespace

CapacitySolution min_energy(const DepthTree& tree, const CapacityOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (options.method == CapacityMethod::ultrametric) {
    CapacitySolution sol = ultrametric(tree);
    sol.converged = true;
    return sol;
  }
  return frank_wolfe(tree, options);
}

CapacityDims capacity_dims(const AffineIFS& ifs, const SftSpec* sft, const ScaleGrid& grid,
                           const CapacityOptions& options, std::size_t max_nodes) {
  grid.validate();
  const auto radii = grid.radii();
  struct Slot {
    bool done = false;
    std::size_t depth = 0;
    double log_c = 0.0;
    double gap = 0.0;
  };
  std::vector<Slot> slots(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    const std::size_t depth = required_depth(radii[i], ifs.alpha_plus());
    if (DepthTree::node_estimate(ifs.size(), depth, sft) > static_cast<double>(max_nodes)) return;
    const DepthTree tree(ifs, radii[i], depth, sft, max_nodes);
    const CapacitySolution sol = min_energy(tree, options);
    slots[i] = {true, depth, std::log(sol.capacity), sol.gap};
  });
  CapacityDims out;
  std::vector<double> scale, value;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!slots[i].done) {
      out.skipped_radii.push_back(radii[i]);
      continue;
    }
    out.radii.push_back(radii[i]);
    out.depths.push_back(slots[i].depth);
    out.log_capacity.push_back(slots[i].log_c);
    out.gaps.push_back(slots[i].gap);
    scale.push_back(radii[i]);
    value.push_back(radii[i] < 1.0 ? slots[i].log_c / -std::log(radii[i]) : 0.0);
  }
  if (out.radii.empty()) throw BudgetExceeded("every radius of the grid exceeds the node cap");
  out.trace = make_tail_trace(std::move(scale), std::move(value));
  out.lower = out.trace.tail_min;
  out.upper = out.trace.tail_max;
  return out;
}

}  // namespace affdim
