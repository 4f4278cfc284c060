#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "affdim/ifs.hpp"
#include "affdim/sft.hpp"
#include "affdim/stats.hpp"
#include "affdim/symbolic.hpp"

namespace affdim {

/// Finite-depth reduction of the r-capacity.
///
/// Z_{x^y}(r) only depends on x^y through T_{x^y}, and Z_{x|j}(r) = 1 once
/// alpha_+^j <= r. Hence for l = ceil(log r / log alpha_+) the kernel is a
/// function of the depth-l cylinders containing x and y (equal to 1 when they
/// coincide), and the infimum over P(E) equals the minimum of the quadratic
/// form sum_{I,J} Z_{I^J}(r) p_I p_J over probability vectors on the
/// admissible depth-l words of E. The tree is that finite problem.
class DepthTree {
 public:
  static inline constexpr std::size_t kDefaultMaxNodes = 2'000'000;

  /// Depth chosen from r. `sft` may be null (full shift).
  DepthTree(const AffineIFS& ifs, double r, const SftSpec* sft = nullptr,
            std::size_t max_nodes = kDefaultMaxNodes);
  /// Explicit depth.
  DepthTree(const AffineIFS& ifs, double r, std::size_t depth, const SftSpec* sft,
            std::size_t max_nodes = kDefaultMaxNodes);

  double radius() const noexcept { return r_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t node_count() const noexcept { return parent_.size(); }
  std::size_t leaf_count() const noexcept { return node_count() - leaf_begin_; }
  std::vector<Word> leaf_words() const;

  /// log Z of the word at `node`.
  double log_z(std::size_t node) const { return log_z_[node]; }

  /// Potentials Phi_I = sum_J Z_{I^J} v_J for every leaf, in O(#nodes).
  /// Works for any real vector v (not only probability vectors).
  std::vector<double> potentials(std::span<const double> v) const;
  /// Column I of the kernel matrix.
  std::vector<double> kernel_column(std::size_t leaf) const;
  /// Z_{I^J} by walking to the common ancestor.
  double kernel(std::size_t leaf_i, std::size_t leaf_j) const;

  // Tree layout (breadth-first): parent[0] is the root (empty word).
  const std::vector<std::uint32_t>& parents() const noexcept { return parent_; }
  std::size_t leaf_begin() const noexcept { return leaf_begin_; }

  /// Upper bound on the node count of a depth-`depth` tree.
  static double node_estimate(int m, std::size_t depth, const SftSpec* sft);

 private:
  void build(const AffineIFS& ifs, const SftSpec* sft, std::size_t max_nodes);

  double r_;
  std::size_t depth_;
  std::vector<std::uint32_t> parent_;
  std::vector<Symbol> symbol_;
  std::vector<std::uint8_t> level_;
  std::vector<double> log_z_;
  std::size_t leaf_begin_ = 0;
};

/// sum_{I,J} Z_{I^J}(r) p_I p_J with Z_{I^I} = 1. Throws MassNotNormalized.
double energy(const DepthTree& tree, std::span<const double> p);
/// Reference O(n^2) double sum (test oracle).
double energy_brute_force(const DepthTree& tree, std::span<const double> p);

struct CapacitySolution {
  std::vector<double> masses;
  std::vector<double> potentials;
  double energy = 0.0;
  double capacity = 0.0;          // 1 / energy
  double gap = 0.0;               // energy - min_I potential_I
  double support_residual = 0.0;  // max over support |potential_I - energy|
  double min_excess = 0.0;        // min_I potential_I - energy
  std::size_t iterations = 0;
  bool converged = false;
};

enum class CapacityMethod { frank_wolfe, ultrametric };

struct CapacityOptions {
  CapacityMethod method = CapacityMethod::frank_wolfe;
  double tol = 1e-8;
  std::size_t max_iterations = 100'000;
};

/// Minimises the energy over the simplex. Frank-Wolfe with away steps starts
/// from the uniform vector and stops once both the Frank-Wolfe gap and the
/// away gap are below tol; when the iteration cap is hit the best iterate is
/// returned with converged = false. The ultrametric method solves the
/// problem exactly by recursion over the tree (kernel constant across
/// children of a node); its certificate is still computed from potentials.
CapacitySolution min_energy(const DepthTree& tree, const CapacityOptions& options = {});

/// Fills potentials, gap and residuals for a given mass vector.
CapacitySolution certify(const DepthTree& tree, std::vector<double> masses);

struct CapacityDims {
  std::vector<double> radii;
  std::vector<std::size_t> depths;
  std::vector<double> log_capacity;
  std::vector<double> gaps;
  std::vector<double> skipped_radii;  // depth over the node cap
  TailTrace trace;                    // log C_r / -log r
  double lower = 0.0;
  double upper = 0.0;
};

CapacityDims capacity_dims(const AffineIFS& ifs, const SftSpec* sft, const ScaleGrid& grid,
                           const CapacityOptions& options = {CapacityMethod::ultrametric},
                           std::size_t max_nodes = DepthTree::kDefaultMaxNodes);

}  // namespace affdim
