#pragma once

// Unsupervised randomer trees and forests, leaf routing and the forest
// proximity matrix.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "urerf/matrix.hpp"
#include "urerf/projection.hpp"
#include "urerf/rng.hpp"
#include "urerf/split.hpp"

namespace urerf {

enum class ProximityMode { AllPoints, InBagOnly };

std::string_view proximity_mode_name(ProximityMode mode);
/// "all" | "inbag".
ProximityMode parse_proximity_mode(std::string_view name);

struct ForestConfig {
  std::size_t num_trees = 100;
  /// Points per tree. 0 selects ceil(subsample_fraction * N).
  std::size_t subsample_size = 0;
  double subsample_fraction = 0.632;
  /// Candidate projected dimensions per node. 0 selects ceil(sqrt(p)).
  std::size_t mtry = 0;
  double lambda = 1.0 / 20.0;
  std::size_t min_parent = 100;
  Criterion criterion = Criterion::FastBic;
  /// Smallest cluster a split may create. 0 selects default_min_leaf().
  std::size_t min_leaf = 0;
  std::uint64_t seed = 0;
  ProximityMode proximity_mode = ProximityMode::AllPoints;
  EmConfig em;
  /// Worker threads for tree building and proximity. 0 = hardware.
  std::size_t threads = 0;

  std::size_t resolved_subsample(std::size_t n_points) const;
  std::size_t resolved_mtry(std::size_t n_features) const;
  std::size_t resolved_min_leaf() const;
  /// Throws std::invalid_argument when the configuration cannot be used on
  /// an n_points x n_features matrix.
  void validate(std::size_t n_points, std::size_t n_features) const;

  bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
  std::int32_t left = -1;
  std::int32_t right = -1;
  SparseWeights weights;  // internal nodes
  double threshold = 0.0;
  std::vector<std::uint32_t> members;  // leaves: in-bag training ids

  bool is_leaf() const noexcept { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary tree stored as a node array; node 0 is the root. Points whose
/// projected value is strictly below the threshold descend left.
struct Tree {
  std::size_t input_dims = 0;
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> in_bag;  // sorted

  std::size_t leaf_count() const;
  bool operator==(const Tree&) const = default;
};

/// Index of the leaf node reached by x.
std::size_t route_to_leaf(const Tree& tree, std::span<const double> x);

/// Grows one tree on the rows `sample_ids` of x.
Tree build_tree(const DataMatrix& x, std::span<const std::uint32_t> sample_ids,
                const ForestConfig& config, Rng& rng);

struct Forest {
  ForestConfig config;
  std::size_t input_dims = 0;
  std::size_t num_points = 0;
  std::vector<Tree> trees;

  bool operator==(const Forest&) const = default;
};

/// Random stream of tree t: depends only on (seed, t).
Rng tree_rng(std::uint64_t seed, std::size_t tree_index);

struct BuildStats {
  std::vector<double> tree_seconds;
};

Forest build_forest(const DataMatrix& x, const ForestConfig& config,
                    BuildStats* stats = nullptr);

/// Forest-induced similarity S_ij = L_ij / T_ij, where L counts trees in
/// which i and j share a leaf and T counts trees that support the pair
/// (every tree in AllPoints mode, trees holding both in-bag in InBagOnly
/// mode). Counts are kept so that partial matrices merge exactly.
class ProximityMatrix {
 public:
  ProximityMatrix() = default;
  ProximityMatrix(std::size_t n, ProximityMode mode);

  std::size_t size() const noexcept { return n_; }
  ProximityMode mode() const noexcept { return mode_; }

  std::uint32_t co_leaf(std::size_t i, std::size_t j) const { return counts_[index(i, j)]; }
  std::uint32_t support(std::size_t i, std::size_t j) const;
  /// True when no tree supports the pair; its similarity reads as 0.
  bool unsupported(std::size_t i, std::size_t j) const { return support(i, j) == 0; }
  std::size_t unsupported_pairs() const;
  double operator()(std::size_t i, std::size_t j) const;

  std::uint32_t trees() const noexcept { return trees_; }
  DataMatrix dense() const;

  /// Adds another group of trees' counts: the result is sum(L) / sum(T).
  void merge(const ProximityMatrix& other);

  /// Accumulates one tree given each point's leaf (AllPoints) or the tree's
  /// leaf membership and in-bag set (InBagOnly).
  void add_tree(const Tree& tree, std::span<const std::size_t> leaf_of_point);

  bool operator==(const ProximityMatrix&) const = default;

 private:
  static std::size_t index(std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t n_ = 0;
  ProximityMode mode_ = ProximityMode::AllPoints;
  std::uint32_t trees_ = 0;
  std::vector<std::uint32_t> counts_;   // lower triangle incl. diagonal
  std::vector<std::uint32_t> support_;  // InBagOnly only
};

ProximityMatrix compute_proximity(const Forest& forest, const DataMatrix& x);

// Persistence ---------------------------------------------------------------

/// Versioned JSON document holding the configuration and every tree's node
/// arrays (child indices, thresholds, projection triplets, leaf members).
void save_forest(const Forest& forest, std::ostream& out);
Forest load_forest(std::istream& in);

/// Dense N x N CSV with header s0..s{N-1}.
void write_proximity_csv(const ProximityMatrix& s, std::ostream& out);
/// Triplet CSV `i,j,s` over i <= j with nonzero similarity.
void write_proximity_triplets(const ProximityMatrix& s, std::ostream& out);

}  // namespace urerf
