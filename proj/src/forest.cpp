#include "urerf/forest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "urerf/parallel.hpp"

namespace urerf {

std::string_view proximity_mode_name(ProximityMode mode) {
  return mode == ProximityMode::AllPoints ? "all" : "inbag";
}

ProximityMode parse_proximity_mode(std::string_view name) {
  if (name == "all") return ProximityMode::AllPoints;
  if (name == "inbag") return ProximityMode::InBagOnly;
  throw std::invalid_argument("unknown proximity mode '" + std::string(name) +
                              "' (expected all or inbag)");
}

// ---------------------------------------------------------------------------
// ForestConfig

std::size_t ForestConfig::resolved_subsample(std::size_t n_points) const {
  if (subsample_size != 0) return subsample_size;
  return static_cast<std::size_t>(std::ceil(subsample_fraction * static_cast<double>(n_points)));
}

std::size_t ForestConfig::resolved_mtry(std::size_t n_features) const {
  if (mtry != 0) return mtry;
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
}

std::size_t ForestConfig::resolved_min_leaf() const {
  return min_leaf != 0 ? min_leaf : default_min_leaf(criterion);
}

void ForestConfig::validate(std::size_t n_points, std::size_t n_features) const {
  if (num_trees == 0) throw std::invalid_argument("forest: number of trees must be >= 1");
  if (n_points < 2) throw std::invalid_argument("forest: need at least 2 points");
  if (n_features == 0) throw std::invalid_argument("forest: need at least 1 feature");
  if (subsample_size == 0 && !(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw std::invalid_argument("forest: subsample fraction must lie in (0, 1]");
  }
  const std::size_t m = resolved_subsample(n_points);
  if (m > n_points) {
    throw std::invalid_argument("forest: subsample size " + std::to_string(m) +
                                " exceeds the number of points " + std::to_string(n_points));
  }
  if (m < 2) throw std::invalid_argument("forest: subsample size must be >= 2");
  if (resolved_mtry(n_features) == 0) throw std::invalid_argument("forest: mtry must be >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("forest: lambda must lie in (0, 1]");
  }
  if (min_parent < 2) throw std::invalid_argument("forest: minparent must be >= 2");
}

// ---------------------------------------------------------------------------
// Trees

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t route_to_leaf(const Tree& tree, std::span<const double> x) {
  if (x.size() != tree.input_dims) {
    throw std::invalid_argument("route_to_leaf: point has " + std::to_string(x.size()) +
                                " features, tree expects " + std::to_string(tree.input_dims));
  }
  std::size_t node = 0;
  while (!tree.nodes[node].is_leaf()) {
    const auto& n = tree.nodes[node];
    node = static_cast<std::size_t>(n.weights.apply(x) < n.threshold ? n.left : n.right);
  }
  return node;
}

namespace {

// Grows one tree. Every node owns a contiguous slice [lo, hi) of order_,
// which partitioning permutes in place.
class TreeBuilder {
 public:
  TreeBuilder(const DataMatrix& x, std::span<const std::uint32_t> ids,
              const ForestConfig& config, Rng& rng, Tree& tree)
      : x_(x),
        config_(config),
        rng_(rng),
        tree_(tree),
        mtry_(config.resolved_mtry(x.cols())),
        min_leaf_(config.resolved_min_leaf()),
        order_(ids.begin(), ids.end()) {}

  std::size_t grow(std::size_t lo, std::size_t hi) {
    const std::size_t node = tree_.nodes.size();
    tree_.nodes.emplace_back();
    const std::size_t n = hi - lo;
    if (n < config_.min_parent || n < 2 * min_leaf_) return make_leaf(node, lo, hi);

    const auto a = sample_projection(x_.cols(), mtry_, config_.lambda, rng_);
    project(a, lo, n);

    std::optional<SplitCandidate> best;
    std::size_t best_col = 0;
    std::vector<double> sorted(n);
    for (std::size_t c = 0; c < mtry_; ++c) {
      const double* v = proj_.data() + c * n;
      std::copy(v, v + n, sorted.begin());
      std::sort(sorted.begin(), sorted.end());
      const auto cand = best_split_sorted(config_.criterion, sorted, min_leaf_, config_.em);
      if (cand && (!best || cand->score < best->score)) {
        best = cand;
        best_col = c;
      }
    }
    if (!best) return make_leaf(node, lo, hi);

    const std::size_t mid = partition(lo, hi, proj_.data() + best_col * n, best->split_point);
    if (mid == lo || mid == hi) throw std::logic_error("build_tree: split produced an empty child");

    auto weights = a.column(best_col);
    const double threshold = best->split_point;
    const std::size_t l = grow(lo, mid);
    const std::size_t r = grow(mid, hi);
    auto& self = tree_.nodes[node];
    self.left = static_cast<std::int32_t>(l);
    self.right = static_cast<std::int32_t>(r);
    self.weights = std::move(weights);
    self.threshold = threshold;
    return node;
  }

 private:
  static constexpr std::size_t kLanes = 8;

  std::size_t make_leaf(std::size_t node, std::size_t lo, std::size_t hi) {
    auto& members = tree_.nodes[node].members;
    members.assign(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                   order_.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(members.begin(), members.end());
    return node;
  }

  // proj_[c * n + k] = projected value of column c for the point in slot
  // lo + k. Points are processed kLanes rows at a time against a compact
  // copy of the nonzeros. Multiplying by the +-1 sign is exact, so every
  // sum matches SparseWeights::apply bit for bit.
  void project(const SparseProjection& a, std::size_t lo, std::size_t n) {
    const auto entries = a.entries();
    feat_.resize(entries.size());
    sign_.resize(entries.size());
    for (std::size_t q = 0; q < entries.size(); ++q) {
      feat_[q] = entries[q].row;
      sign_[q] = entries[q].sign;
    }
    std::vector<std::size_t> start(mtry_ + 1, 0);
    for (std::size_t c = 0; c < mtry_; ++c) start[c + 1] = start[c] + a.column_entries(c).size();

    proj_.resize(mtry_ * n);
    for (std::size_t b = 0; b < n; b += kLanes) {
      const std::size_t len = std::min(kLanes, n - b);
      const double* rows[kLanes];
      for (std::size_t j = 0; j < kLanes; ++j) {
        rows[j] = x_.row(order_[lo + b + std::min(j, len - 1)]).data();
      }
      for (std::size_t c = 0; c < mtry_; ++c) {
        double acc[kLanes] = {};
        for (std::size_t q = start[c]; q < start[c + 1]; ++q) {
          const double sign = sign_[q];
          const std::uint32_t f = feat_[q];
          for (std::size_t j = 0; j < kLanes; ++j) acc[j] += sign * rows[j][f];
        }
        std::copy(acc, acc + len, proj_.begin() + static_cast<std::ptrdiff_t>(c * n + b));
      }
    }
  }

  // Moves slots with value < split to the front of [lo, hi); returns the
  // first slot of the right child. Only misplaced slots are swapped.
  std::size_t partition(std::size_t lo, std::size_t hi, const double* value, double split) {
    std::vector<double> v(value, value + (hi - lo));
    std::size_t i = 0, j = hi - lo;
    while (true) {
      while (i < j && v[i] < split) ++i;
      while (i < j && !(v[j - 1] < split)) --j;
      if (i >= j) break;
      --j;
      swap_slots(lo + i, lo + j);
      std::swap(v[i], v[j]);
      ++i;
    }
    return lo + i;
  }

  void swap_slots(std::size_t a, std::size_t b) { std::swap(order_[a], order_[b]); }

  const DataMatrix& x_;
  const ForestConfig& config_;
  Rng& rng_;
  Tree& tree_;
  std::size_t mtry_;
  std::size_t min_leaf_;
  std::vector<std::uint32_t> order_;  // slot -> point id
  std::vector<double> proj_;
  std::vector<std::uint32_t> feat_;
  std::vector<double> sign_;
};

}  // namespace

Tree build_tree(const DataMatrix& x, std::span<const std::uint32_t> sample_ids,
                const ForestConfig& config, Rng& rng) {
  if (sample_ids.empty()) throw std::invalid_argument("build_tree: empty sample");
  for (auto id : sample_ids) {
    if (id >= x.rows()) throw std::invalid_argument("build_tree: sample id out of range");
  }
  Tree tree;
  tree.input_dims = x.cols();
  tree.in_bag.assign(sample_ids.begin(), sample_ids.end());
  std::sort(tree.in_bag.begin(), tree.in_bag.end());
  TreeBuilder(x, tree.in_bag, config, rng, tree).grow(0, tree.in_bag.size());
  return tree;
}

Rng tree_rng(std::uint64_t seed, std::size_t tree_index) {
  return Rng(hash_combine(derive_seed(seed, "tree"), tree_index));
}

Forest build_forest(const DataMatrix& x, const ForestConfig& config, BuildStats* stats) {
  config.validate(x.rows(), x.cols());
  Forest forest;
  forest.config = config;
  forest.input_dims = x.cols();
  forest.num_points = x.rows();
  forest.trees.resize(config.num_trees);
  const std::size_t n = x.rows();
  const std::size_t m = config.resolved_subsample(n);
  if (stats) stats->tree_seconds.assign(config.num_trees, 0.0);

  parallel_for(config.num_trees, config.threads, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = tree_rng(config.seed, t);
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t pick = k + rng.below(n - k);
      std::swap(perm[k], perm[pick]);
    }
    perm.resize(m);
    forest.trees[t] = build_tree(x, perm, config, rng);
    if (stats) {
      stats->tree_seconds[t] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });
  return forest;
}

// ---------------------------------------------------------------------------
// Proximity

ProximityMatrix::ProximityMatrix(std::size_t n, ProximityMode mode)
    : n_(n), mode_(mode), counts_(n * (n + 1) / 2, 0) {
  if (mode == ProximityMode::InBagOnly) support_.assign(counts_.size(), 0);
}

std::uint32_t ProximityMatrix::support(std::size_t i, std::size_t j) const {
  return mode_ == ProximityMode::AllPoints ? trees_ : support_[index(i, j)];
}

std::size_t ProximityMatrix::unsupported_pairs() const {
  if (mode_ == ProximityMode::AllPoints) return trees_ == 0 ? counts_.size() : 0;
  return static_cast<std::size_t>(std::count(support_.begin(), support_.end(), 0u));
}

double ProximityMatrix::operator()(std::size_t i, std::size_t j) const {
  const std::uint32_t t = support(i, j);
  return t == 0 ? 0.0 : static_cast<double>(co_leaf(i, j)) / static_cast<double>(t);
}

DataMatrix ProximityMatrix::dense() const {
  DataMatrix s(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = (*this)(i, j);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

void ProximityMatrix::merge(const ProximityMatrix& other) {
  if (other.n_ != n_ || other.mode_ != mode_) {
    throw std::invalid_argument("ProximityMatrix::merge: size or mode mismatch");
  }
  trees_ += other.trees_;
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  for (std::size_t k = 0; k < support_.size(); ++k) support_[k] += other.support_[k];
}

void ProximityMatrix::add_tree(const Tree& tree, std::span<const std::size_t> leaf_of_point) {
  ++trees_;
  if (mode_ == ProximityMode::InBagOnly) {
    for (const auto& node : tree.nodes) {
      const auto& m = node.members;
      for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) ++counts_[index(m[a], m[b])];
      }
    }
    const auto& bag = tree.in_bag;
    for (std::size_t a = 0; a < bag.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) ++support_[index(bag[a], bag[b])];
    }
    return;
  }

  if (leaf_of_point.size() != n_) {
    throw std::invalid_argument("ProximityMatrix::add_tree: need a leaf for every point");
  }
  std::vector<std::vector<std::uint32_t>> by_leaf(tree.nodes.size());
  for (std::size_t i = 0; i < n_; ++i) {
    by_leaf[leaf_of_point[i]].push_back(static_cast<std::uint32_t>(i));
  }
  for (const auto& m : by_leaf) {
    for (std::size_t a = 0; a < m.size(); ++a) {
      const std::size_t row = static_cast<std::size_t>(m[a]) * (m[a] + 1) / 2;
      for (std::size_t b = 0; b <= a; ++b) ++counts_[row + m[b]];
    }
  }
}

ProximityMatrix compute_proximity(const Forest& forest, const DataMatrix& x) {
  if (x.rows() != forest.num_points || x.cols() != forest.input_dims) {
    throw std::invalid_argument("compute_proximity: data shape does not match the forest");
  }
  const ProximityMode mode = forest.config.proximity_mode;
  const std::size_t n = x.rows();
  const std::size_t workers = resolve_threads(forest.config.threads, forest.trees.size());

  // Each worker accumulates a contiguous block of trees; blocks merge by
  // integer addition, so the result does not depend on the schedule.
  std::vector<ProximityMatrix> partial(workers, ProximityMatrix(n, mode));
  const std::size_t per = (forest.trees.size() + workers - 1) / workers;
  parallel_for(workers, workers, [&](std::size_t w) {
    std::vector<std::size_t> leaf(n);
    const std::size_t lo = w * per;
    const std::size_t hi = std::min(forest.trees.size(), lo + per);
    for (std::size_t t = lo; t < hi; ++t) {
      const auto& tree = forest.trees[t];
      if (mode == ProximityMode::AllPoints) {
        for (std::size_t i = 0; i < n; ++i) leaf[i] = route_to_leaf(tree, x.row(i));
      }
      partial[w].add_tree(tree, leaf);
    }
  });
  ProximityMatrix total = std::move(partial.front());
  for (std::size_t w = 1; w < partial.size(); ++w) total.merge(partial[w]);
  return total;
}

}  // namespace urerf
