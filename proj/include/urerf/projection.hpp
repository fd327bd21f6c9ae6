#pragma once

// Sparse +-1 random projections defining each node's candidate split axes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "urerf/matrix.hpp"
#include "urerf/rng.hpp"

namespace urerf {

struct ProjectionEntry {
  std::uint32_t row;  // input feature
  std::uint32_t col;  // output dimension
  std::int8_t sign;   // -1 or +1

  bool operator==(const ProjectionEntry&) const = default;
};

/// One projected feature: a signed sum of input features, sorted by feature.
struct SparseWeights {
  std::vector<std::uint32_t> features;
  std::vector<std::int8_t> signs;

  std::size_t size() const noexcept { return features.size(); }
  /// Sum of +-x[feature] in ascending feature order.
  double apply(std::span<const double> x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < features.size(); ++k) {
      if (signs[k] > 0) {
        acc += x[features[k]];
      } else {
        acc -= x[features[k]];
      }
    }
    return acc;
  }

  bool operator==(const SparseWeights&) const = default;
};

/// A p x d matrix with +-1 entries at distinct positions; every column has
/// at least one nonzero. Entries are kept sorted by (col, row).
class SparseProjection {
 public:
  SparseProjection(std::size_t p, std::size_t d, std::vector<ProjectionEntry> entries);

  std::size_t input_dims() const noexcept { return p_; }
  std::size_t output_dims() const noexcept { return d_; }
  const std::vector<ProjectionEntry>& entries() const noexcept { return entries_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }

  /// Column i as a weight list over input features.
  SparseWeights column(std::size_t i) const;
  /// Entries of column i, ascending by row.
  std::span<const ProjectionEntry> column_entries(std::size_t i) const {
    return {entries_.data() + col_start_.at(i), col_start_.at(i + 1) - col_start_.at(i)};
  }

 private:
  std::size_t p_;
  std::size_t d_;
  std::vector<ProjectionEntry> entries_;
  std::vector<std::size_t> col_start_;
};

/// Number of nonzeros a sampled p x d projection carries:
/// max(ceil(lambda * p * d), d), the d floor coming from nonempty columns.
std::size_t projection_nonzeros(std::size_t p, std::size_t d, double lambda);

SparseProjection sample_projection(std::size_t p, std::size_t d, double lambda, Rng& rng);

/// N x d matrix of projected values; column i sums its nonzeros in
/// ascending row order.
DataMatrix project(const SparseProjection& a, const DataMatrix& x);

}  // namespace urerf
