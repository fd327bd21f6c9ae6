#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "urerf/matrix.hpp"
#include "urerf/projection.hpp"
#include "urerf/rng.hpp"
#include "urerf/split.hpp"

namespace oracle {

struct BruteSplit {
  std::size_t left_count;
  double split_point;
  double score;
  urerf::SplitModel model;
};

// Per-split recomputation from scratch: every admissible split rebuilds both
// clusters' sums (left cluster left to right, right cluster right to left,
// about the median element) and evaluates the scores with no carried state.
struct ClusterSums {
  double sum = 0.0;
  double sq = 0.0;
};

inline ClusterSums left_cluster(const std::vector<double>& sorted, std::size_t s, double ref) {
  ClusterSums c;
  for (std::size_t k = 0; k < s; ++k) {
    const double y = sorted[k] - ref;
    c.sum = c.sum + y;
    c.sq = c.sq + y * y;
  }
  return c;
}

inline ClusterSums right_cluster(const std::vector<double>& sorted, std::size_t s, double ref) {
  ClusterSums c;
  for (std::size_t k = sorted.size(); k-- > s;) {
    const double y = sorted[k] - ref;
    c.sum = c.sum + y;
    c.sq = c.sq + y * y;
  }
  return c;
}

inline double scatter(const ClusterSums& c, double count) {
  return std::max(0.0, c.sq - c.sum * c.sum / count);
}

inline std::optional<BruteSplit> brute_two_means(std::vector<double> z, std::size_t min_leaf) {
  std::sort(z.begin(), z.end());
  const std::size_t n = z.size();
  const double ref = z[n / 2];
  std::optional<BruteSplit> best;
  for (std::size_t s = min_leaf; s + min_leaf <= n; ++s) {
    if (z[s - 1] == z[s]) continue;
    const double score = scatter(left_cluster(z, s, ref), static_cast<double>(s)) +
                         scatter(right_cluster(z, s, ref), static_cast<double>(n - s));
    if (!best || score < best->score) {
      best = BruteSplit{s, urerf::split_midpoint(z[s - 1], z[s]), score,
                        urerf::SplitModel::TwoMeans};
    }
  }
  return best;
}

inline std::optional<BruteSplit> brute_fast_bic(
    std::vector<double> z, std::size_t min_leaf,
    urerf::VarianceModels models = urerf::VarianceModels::Both) {
  std::sort(z.begin(), z.end());
  const std::size_t n = z.size();
  const double ref = z[n / 2];
  const double range = z.back() - z.front();
  const double floor = 1e-12 * range * range + 1e-300;
  const double nd = static_cast<double>(n);
  const double two_pi = 2.0 * std::numbers::pi;
  std::optional<BruteSplit> best;
  for (std::size_t s = min_leaf; s + min_leaf <= n; ++s) {
    if (z[s - 1] == z[s]) continue;
    const double n1 = static_cast<double>(s);
    const double n2 = static_cast<double>(n - s);
    const double ss1 = scatter(left_cluster(z, s, ref), n1);
    const double ss2 = scatter(right_cluster(z, s, ref), n2);
    const double mix = n1 * std::log(n1 / nd) + n2 * std::log(n2 / nd);

    double score = std::numeric_limits<double>::infinity();
    auto model = urerf::SplitModel::FastBicSameVariance;
    if (models != urerf::VarianceModels::DifferentOnly) {
      const double pooled = std::max((ss1 + ss2) / nd, floor);
      const double ll =
          mix - 0.5 * n1 * std::log(two_pi * pooled) - 0.5 * n2 * std::log(two_pi * pooled);
      score = -2.0 * ll + std::log(nd) * 4.0;
    }
    if (models != urerf::VarianceModels::SameOnly) {
      const double v1 = std::max(ss1 / n1, floor);
      const double v2 = std::max(ss2 / n2, floor);
      const double ll = mix - 0.5 * n1 * std::log(two_pi * v1) - 0.5 * n2 * std::log(two_pi * v2);
      const double diff = -2.0 * ll + std::log(nd) * 5.0;
      if (diff < score) {
        score = diff;
        model = urerf::SplitModel::FastBicDifferentVariance;
      }
    }
    if (!best || score < best->score) {
      best = BruteSplit{s, urerf::split_midpoint(z[s - 1], z[s]), score, model};
    }
  }
  return best;
}

/// Two-pass textbook objective sum (x - mean)^2 for the first s sorted values
/// and the rest.
inline double two_pass_objective(std::vector<double> z, std::size_t s) {
  std::sort(z.begin(), z.end());
  auto ss = [](auto first, auto last) {
    double mean = 0.0;
    for (auto it = first; it != last; ++it) mean += *it;
    mean /= static_cast<double>(last - first);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) acc += (*it - mean) * (*it - mean);
    return acc;
  };
  return ss(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(s)) +
         ss(z.begin() + static_cast<std::ptrdiff_t>(s), z.end());
}

/// Random 1-D instance with n <= 64 and frequent duplicates.
inline std::vector<double> random_instance(urerf::Rng& rng) {
  const std::size_t n = 2 + rng.below(63);
  std::vector<double> z(n);
  switch (rng.below(4)) {
    case 0:  // small integer alphabet, many ties
      for (auto& v : z) v = static_cast<double>(rng.below(6));
      break;
    case 1:  // two clusters
      for (auto& v : z) v = (rng.coin() ? 5.0 : -5.0) + rng.normal();
      break;
    case 2:  // rounded normals
      for (auto& v : z) v = std::round(10.0 * rng.normal()) / 10.0;
      break;
    default:  // wide-scale continuous with offset
      for (auto& v : z) v = 1e3 + 50.0 * rng.normal();
      break;
  }
  return z;
}

/// Dense A^T x^T product: out(i, c) = sum_r A[r][c] * x(i, r), r ascending.
inline urerf::DataMatrix dense_project(const urerf::SparseProjection& a,
                                       const urerf::DataMatrix& x) {
  const std::size_t p = a.input_dims(), d = a.output_dims();
  std::vector<double> dense(p * d, 0.0);
  for (const auto& e : a.entries()) dense[e.row * d + e.col] = e.sign;
  urerf::DataMatrix out(x.rows(), d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < p; ++r) {
        const double w = dense[r * d + c];
        if (w != 0.0) acc += w * x(i, r);
      }
      out(i, c) = acc;
    }
  }
  return out;
}

/// Adaptive Simpson quadrature.
template <class F>
double adaptive_simpson(F f, double a, double b, double tol, int depth = 40) {
  const auto simpson = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  };
  struct Rec {
    F& f;
    decltype(simpson)& s;
    double go(double lo, double hi, double whole, double eps, int d) {
      const double mid = 0.5 * (lo + hi);
      const double left = s(lo, mid), right = s(mid, hi);
      if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
      }
      return go(lo, mid, left, eps / 2.0, d - 1) + go(mid, hi, right, eps / 2.0, d - 1);
    }
  };
  Rec rec{f, simpson};
  return rec.go(a, b, simpson(a, b), tol, depth);
}

}  // namespace oracle
