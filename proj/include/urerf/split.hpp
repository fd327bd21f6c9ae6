#pragma once

// One-dimensional split criteria: exact two-means, Fast-BIC and EM-fitted
// two-component Gaussian mixture BIC. Lower scores are better throughout.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace urerf {

enum class SplitModel { TwoMeans, FastBicSameVariance, FastBicDifferentVariance, EmBic };

std::string_view model_name(SplitModel model);

struct SplitCandidate {
  double split_point = 0.0;
  double score = 0.0;
  SplitModel model = SplitModel::TwoMeans;
  /// Points strictly below split_point.
  std::size_t left_count = 0;
  /// False when EM stopped at max_iter without meeting its tolerance.
  bool converged = true;
};

enum class Criterion { TwoMeans, FastBic, EmBic };

std::string_view criterion_name(Criterion c);
/// "twomeans" | "fastbic" | "embic".
Criterion parse_criterion(std::string_view name);
/// Smallest admissible cluster size used by default for each criterion.
std::size_t default_min_leaf(Criterion c);

/// Variance floor applied to every fitted variance for data of the given
/// range: 1e-12 * range^2 + 1e-300.
inline double variance_floor(double range) { return 1e-12 * range * range + 1e-300; }

/// Threshold between consecutive distinct sorted values lo < hi such that
/// lo < threshold <= hi.
inline double split_midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

/// Best split under the 1-D two-means objective. Splits leave at least
/// min_leaf points on either side and never separate equal values.
/// Returns nullopt when no admissible split exists.
std::optional<SplitCandidate> two_means_1d(std::span<const double> z, std::size_t min_leaf = 1);
std::optional<SplitCandidate> two_means_1d_sorted(std::span<const double> sorted,
                                                  std::size_t min_leaf = 1);

enum class VarianceModels { Both, SameOnly, DifferentOnly };

/// Fast-BIC: hard-assignment two-Gaussian likelihood for every sorted split,
/// scored by BIC with 5 parameters (separate variances) or 4 (pooled).
///
/// For a split into n1 + n2 = n points with MLE weights w_j = n_j / n and
/// variances v_j (floored), the score is
///
///   -2 [n1 ln w1 - n1/2 ln(2 pi v1) + n2 ln w2 - n2/2 ln(2 pi v2)] + d ln n
///
/// with v1 = v2 = pooled variance under the same-variance model. The
/// constant n/2 from the residual terms is omitted. Sums are taken about the
/// median element, prefix sums left to right and suffix sums right to left.
std::optional<SplitCandidate> fast_bic_1d(std::span<const double> z, std::size_t min_leaf = 2,
                                          VarianceModels models = VarianceModels::Both);
std::optional<SplitCandidate> fast_bic_1d_sorted(std::span<const double> sorted,
                                                 std::size_t min_leaf = 2,
                                                 VarianceModels models = VarianceModels::Both);

struct EmConfig {
  int max_iter = 100;
  /// Convergence when the log-likelihood changes by less than
  /// tolerance * max(1, |log-likelihood|).
  double tolerance = 1e-6;
  int restarts = 3;
  bool operator==(const EmConfig&) const = default;
};

struct Gmm2Fit {
  std::array<double, 2> weight{};
  std::array<double, 2> mean{};  // mean[0] <= mean[1]
  std::array<double, 2> variance{};
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Two-component 1-D Gaussian mixture by EM. Restart r starts from the
/// (q, 1-q) quantiles with q in {0.25, 0.10, 0.40}, global variance and
/// equal weights; the highest likelihood fit wins. nullopt for constant or
/// degenerate input (a component holding less than one point of mass).
std::optional<Gmm2Fit> fit_gmm2(std::span<const double> z, const EmConfig& config = {});

/// Point between the two means where w1 N(x; m1, v1) = w2 N(x; m2, v2);
/// falls back to the midpoint of the means when no root lies between them.
double equal_likelihood_point(const Gmm2Fit& fit);

std::optional<SplitCandidate> em_gmm_bic_1d(std::span<const double> z, std::size_t min_leaf = 1,
                                            const EmConfig& config = {});

/// Dispatches to the named criterion on already-sorted values.
std::optional<SplitCandidate> best_split_sorted(Criterion criterion,
                                                std::span<const double> sorted,
                                                std::size_t min_leaf, const EmConfig& em = {});

}  // namespace urerf
