#include "urerf/projection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace urerf {

SparseProjection::SparseProjection(std::size_t p, std::size_t d,
                                   std::vector<ProjectionEntry> entries)
    : p_(p), d_(d), entries_(std::move(entries)) {
  if (p == 0 || d == 0) throw std::invalid_argument("projection: p and d must be >= 1");
  for (const auto& e : entries_) {
    if (e.row >= p_ || e.col >= d_) throw std::invalid_argument("projection: entry out of range");
  }
  const auto before = [](const ProjectionEntry& a, const ProjectionEntry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  };
  // Two stable counting passes: by row, then by column.
  const auto bucket_sort = [this](auto key, std::size_t buckets) {
    std::vector<std::size_t> start(buckets + 1, 0);
    for (const auto& e : entries_) ++start[key(e) + 1];
    for (std::size_t b = 0; b < buckets; ++b) start[b + 1] += start[b];
    std::vector<ProjectionEntry> out(entries_.size());
    for (const auto& e : entries_) out[start[key(e)]++] = e;
    entries_ = std::move(out);
  };
  if (!std::is_sorted(entries_.begin(), entries_.end(), before)) {
    bucket_sort([](const ProjectionEntry& e) { return e.row; }, p_);
    bucket_sort([](const ProjectionEntry& e) { return e.col; }, d_);
  }
  col_start_.assign(d_ + 1, 0);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& e = entries_[k];
    if (e.sign != 1 && e.sign != -1) throw std::invalid_argument("projection: entry must be +-1");
    if (k > 0 && entries_[k - 1].row == e.row && entries_[k - 1].col == e.col) {
      throw std::invalid_argument("projection: duplicate entry position");
    }
    ++col_start_[e.col + 1];
  }
  for (std::size_t c = 0; c < d_; ++c) {
    if (col_start_[c + 1] == 0) throw std::invalid_argument("projection: empty column");
    col_start_[c + 1] += col_start_[c];
  }
}

SparseWeights SparseProjection::column(std::size_t i) const {
  SparseWeights w;
  const std::size_t lo = col_start_.at(i);
  const std::size_t hi = col_start_.at(i + 1);
  w.features.reserve(hi - lo);
  w.signs.reserve(hi - lo);
  for (std::size_t k = lo; k < hi; ++k) {
    w.features.push_back(entries_[k].row);
    w.signs.push_back(entries_[k].sign);
  }
  return w;
}

std::size_t projection_nonzeros(std::size_t p, std::size_t d, double lambda) {
  if (p == 0 || d == 0) throw std::invalid_argument("projection: p and d must be >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("projection: lambda must lie in (0, 1]");
  }
  const double cells = static_cast<double>(p) * static_cast<double>(d);
  auto k = static_cast<std::size_t>(std::ceil(lambda * cells));
  k = std::min<std::size_t>(std::max<std::size_t>(k, 1), p * d);
  return std::max(k, d);
}

SparseProjection sample_projection(std::size_t p, std::size_t d, double lambda, Rng& rng) {
  const std::size_t total = projection_nonzeros(p, d, lambda);
  const std::uint64_t cells = static_cast<std::uint64_t>(p) * d;

  // Cell index = col * p + row. One guaranteed entry per column, the rest
  // uniformly among the remaining cells without replacement.
  const auto entry = [p](std::uint64_t cell, bool positive) {
    return ProjectionEntry{static_cast<std::uint32_t>(cell % p),
                           static_cast<std::uint32_t>(cell / p),
                           static_cast<std::int8_t>(positive ? 1 : -1)};
  };
  std::vector<ProjectionEntry> entries;
  entries.reserve(total);
  if (2 * total <= cells && total < cells) {
    // Rejection sampling against a bitmap of taken cells. Signs are drawn
    // in selection order, then entries are read off the bitmap in cell order.
    std::vector<std::uint64_t> taken((cells + 63) / 64, 0);
    std::vector<std::uint64_t> chosen;
    chosen.reserve(total);
    const auto take = [&](std::uint64_t cell) {
      const std::uint64_t bit = std::uint64_t{1} << (cell % 64);
      if (taken[cell / 64] & bit) return false;
      taken[cell / 64] |= bit;
      return true;
    };
    for (std::size_t col = 0; col < d; ++col) {
      const std::uint64_t cell = col * p + rng.below(p);
      take(cell);
      chosen.push_back(cell);
    }
    while (chosen.size() < total) {
      const std::uint64_t cell = rng.below(cells);
      if (take(cell)) chosen.push_back(cell);
    }
    std::vector<std::uint64_t> positive(taken.size(), 0);
    for (std::uint64_t cell : chosen) {
      if (rng.coin()) positive[cell / 64] |= std::uint64_t{1} << (cell % 64);
    }
    for (std::size_t w = 0; w < taken.size(); ++w) {
      for (std::uint64_t bits = taken[w]; bits != 0; bits &= bits - 1) {
        const int b = std::countr_zero(bits);
        entries.push_back(entry(w * 64 + b, (positive[w] >> b) & 1));
      }
    }
  } else {
    std::vector<std::uint64_t> chosen;
    chosen.reserve(total);
    if (total == cells) {
      for (std::uint64_t c = 0; c < cells; ++c) chosen.push_back(c);
    } else {
      // Dense regime: pick the cells to leave empty instead.
      std::vector<char> keep(cells, 1);
      std::vector<std::size_t> free_in_col(d, p);
      std::uint64_t dropped = 0;
      while (dropped < cells - total) {
        const std::uint64_t cell = rng.below(cells);
        const std::size_t col = cell / p;
        if (!keep[cell] || free_in_col[col] == 1) continue;
        keep[cell] = 0;
        --free_in_col[col];
        ++dropped;
      }
      for (std::uint64_t c = 0; c < cells; ++c) {
        if (keep[c]) chosen.push_back(c);
      }
    }
    for (std::uint64_t cell : chosen) entries.push_back(entry(cell, rng.coin()));
  }
  return SparseProjection(p, d, std::move(entries));
}

DataMatrix project(const SparseProjection& a, const DataMatrix& x) {
  if (x.cols() != a.input_dims()) {
    throw std::invalid_argument("project: data has " + std::to_string(x.cols()) +
                                " columns, projection expects " +
                                std::to_string(a.input_dims()));
  }
  const std::size_t d = a.output_dims();
  std::vector<SparseWeights> cols;
  cols.reserve(d);
  for (std::size_t c = 0; c < d; ++c) cols.push_back(a.column(c));
  DataMatrix out(x.rows(), d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    for (std::size_t c = 0; c < d; ++c) out(i, c) = cols[c].apply(row);
  }
  return out;
}

}  // namespace urerf
