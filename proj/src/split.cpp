#include "urerf/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace urerf {

std::string_view model_name(SplitModel model) {
  switch (model) {
    case SplitModel::TwoMeans: return "twomeans";
    case SplitModel::FastBicSameVariance: return "fastbic-same";
    case SplitModel::FastBicDifferentVariance: return "fastbic-diff";
    case SplitModel::EmBic: return "embic";
  }
  return "unknown";
}

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::TwoMeans: return "twomeans";
    case Criterion::FastBic: return "fastbic";
    case Criterion::EmBic: return "embic";
  }
  return "unknown";
}

Criterion parse_criterion(std::string_view name) {
  if (name == "twomeans") return Criterion::TwoMeans;
  if (name == "fastbic") return Criterion::FastBic;
  if (name == "embic") return Criterion::EmBic;
  throw std::invalid_argument("unknown split criterion '" + std::string(name) +
                              "' (expected twomeans, fastbic or embic)");
}

std::size_t default_min_leaf(Criterion c) { return c == Criterion::FastBic ? 2 : 1; }

namespace {

void check_size(std::size_t n, std::size_t min_leaf) {
  if (min_leaf == 0) throw std::invalid_argument("split: min_leaf must be >= 1");
  if (n < 2 * min_leaf) {
    throw std::invalid_argument("split: need at least 2 * min_leaf = " +
                                std::to_string(2 * min_leaf) + " values, got " +
                                std::to_string(n));
  }
}

std::vector<double> sorted_copy(std::span<const double> z) {
  std::vector<double> v(z.begin(), z.end());
  std::sort(v.begin(), v.end());
  return v;
}

// Running first and second moments about the median element. left_*[s]
// covers sorted[0, s) summed left to right; right_*[s] covers sorted[s, n)
// summed right to left. Storage is reused across calls on the same thread.
struct Moments {
  std::vector<double>& left_sum = buffer(0);
  std::vector<double>& left_sq = buffer(1);
  std::vector<double>& right_sum = buffer(2);
  std::vector<double>& right_sq = buffer(3);

  explicit Moments(std::span<const double> sorted) {
    const std::size_t n = sorted.size();
    const double ref = sorted[n / 2];
    for (auto* v : {&left_sum, &left_sq, &right_sum, &right_sq}) v->resize(n + 1);
    left_sum[0] = left_sq[0] = 0.0;
    right_sum[n] = right_sq[n] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double y = sorted[k] - ref;
      left_sum[k + 1] = left_sum[k] + y;
      left_sq[k + 1] = left_sq[k] + y * y;
    }
    for (std::size_t k = n; k-- > 0;) {
      const double y = sorted[k] - ref;
      right_sum[k] = right_sum[k + 1] + y;
      right_sq[k] = right_sq[k + 1] + y * y;
    }
  }

 private:
  static std::vector<double>& buffer(int i) {
    thread_local std::vector<double> buffers[4];
    return buffers[i];
  }
};

double scatter(double sum, double sq, double count) {
  return std::max(0.0, sq - sum * sum / count);
}

}  // namespace

// ---------------------------------------------------------------------------
// Two-means

std::optional<SplitCandidate> two_means_1d_sorted(std::span<const double> sorted,
                                                  std::size_t min_leaf) {
  const std::size_t n = sorted.size();
  check_size(n, min_leaf);
  if (sorted.front() == sorted.back()) return std::nullopt;

  const Moments m(sorted);
  std::optional<SplitCandidate> best;
  for (std::size_t s = min_leaf; s <= n - min_leaf; ++s) {
    if (!(sorted[s - 1] < sorted[s])) continue;
    const double n1 = static_cast<double>(s);
    const double n2 = static_cast<double>(n - s);
    const double score = scatter(m.left_sum[s], m.left_sq[s], n1) +
                         scatter(m.right_sum[s], m.right_sq[s], n2);
    if (!best || score < best->score) {
      best = SplitCandidate{split_midpoint(sorted[s - 1], sorted[s]), score,
                            SplitModel::TwoMeans, s, true};
    }
  }
  return best;
}

std::optional<SplitCandidate> two_means_1d(std::span<const double> z, std::size_t min_leaf) {
  check_size(z.size(), min_leaf);
  const auto sorted = sorted_copy(z);
  return two_means_1d_sorted(sorted, min_leaf);
}

// ---------------------------------------------------------------------------
// Fast-BIC

std::optional<SplitCandidate> fast_bic_1d_sorted(std::span<const double> sorted,
                                                 std::size_t min_leaf, VarianceModels models) {
  const std::size_t n = sorted.size();
  check_size(n, min_leaf);
  if (sorted.front() == sorted.back()) return std::nullopt;

  const Moments m(sorted);
  const double floor = variance_floor(sorted.back() - sorted.front());
  const double nd = static_cast<double>(n);
  const double log_n = std::log(nd);
  const double two_pi = 2.0 * std::numbers::pi;
  const bool use_same = models != VarianceModels::DifferentOnly;
  const bool use_diff = models != VarianceModels::SameOnly;

  // The mixing term depends only on (s, n); tree building scores many
  // columns of the same size in a row.
  thread_local std::vector<double> mix_cache;
  thread_local std::size_t mix_n = 0;
  if (mix_n != n) {
    mix_cache.assign(n + 1, 0.0);
    for (std::size_t s = 1; s < n; ++s) {
      const double n1 = static_cast<double>(s);
      const double n2 = static_cast<double>(n - s);
      mix_cache[s] = n1 * std::log(n1 / nd) + n2 * std::log(n2 / nd);
    }
    mix_n = n;
  }

  std::optional<SplitCandidate> best;
  for (std::size_t s = min_leaf; s <= n - min_leaf; ++s) {
    if (!(sorted[s - 1] < sorted[s])) continue;
    const double n1 = static_cast<double>(s);
    const double n2 = static_cast<double>(n - s);
    const double ss1 = scatter(m.left_sum[s], m.left_sq[s], n1);
    const double ss2 = scatter(m.right_sum[s], m.right_sq[s], n2);
    const double mix = mix_cache[s];

    double score = std::numeric_limits<double>::infinity();
    SplitModel model = SplitModel::FastBicSameVariance;
    if (use_same) {
      const double vp = std::max((ss1 + ss2) / nd, floor);
      const double lvp = std::log(two_pi * vp);
      const double ll = mix - 0.5 * n1 * lvp - 0.5 * n2 * lvp;
      score = -2.0 * ll + log_n * 4.0;
    }
    if (use_diff) {
      const double v1 = std::max(ss1 / n1, floor);
      const double v2 = std::max(ss2 / n2, floor);
      const double ll = mix - 0.5 * n1 * std::log(two_pi * v1) - 0.5 * n2 * std::log(two_pi * v2);
      const double diff = -2.0 * ll + log_n * 5.0;
      if (diff < score) {
        score = diff;
        model = SplitModel::FastBicDifferentVariance;
      }
    }
    if (!best || score < best->score) {
      best = SplitCandidate{split_midpoint(sorted[s - 1], sorted[s]), score, model, s, true};
    }
  }
  return best;
}

std::optional<SplitCandidate> fast_bic_1d(std::span<const double> z, std::size_t min_leaf,
                                          VarianceModels models) {
  check_size(z.size(), min_leaf);
  const auto sorted = sorted_copy(z);
  return fast_bic_1d_sorted(sorted, min_leaf, models);
}

// ---------------------------------------------------------------------------
// EM two-component mixture

namespace {

double log_normal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * d * d / var;
}

double quantile(std::span<const double> sorted, double q) {
  const auto idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
  return sorted[idx];
}

struct EmState {
  std::array<double, 2> w, mu, var;
};

// Returns the log-likelihood at `s` and fills responsibilities of component 0.
double e_step(std::span<const double> z, const EmState& s, std::vector<double>& resp0) {
  double ll = 0.0;
  const double lw0 = std::log(s.w[0]);
  const double lw1 = std::log(s.w[1]);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double a = lw0 + log_normal(z[i], s.mu[0], s.var[0]);
    const double b = lw1 + log_normal(z[i], s.mu[1], s.var[1]);
    const double hi = std::max(a, b);
    const double lse = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    resp0[i] = std::exp(a - lse);
    ll += lse;
  }
  return ll;
}

// False when a component loses its mass.
bool m_step(std::span<const double> z, const std::vector<double>& resp0, double floor,
            EmState& s) {
  double n0 = 0.0, n1 = 0.0, sx0 = 0.0, sx1 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    n0 += resp0[i];
    n1 += 1.0 - resp0[i];
    sx0 += resp0[i] * z[i];
    sx1 += (1.0 - resp0[i]) * z[i];
  }
  if (n0 < 1.0 || n1 < 1.0) return false;
  s.mu = {sx0 / n0, sx1 / n1};
  double sv0 = 0.0, sv1 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d0 = z[i] - s.mu[0];
    const double d1 = z[i] - s.mu[1];
    sv0 += resp0[i] * d0 * d0;
    sv1 += (1.0 - resp0[i]) * d1 * d1;
  }
  const double nd = static_cast<double>(z.size());
  s.w = {n0 / nd, n1 / nd};
  s.var = {std::max(sv0 / n0, floor), std::max(sv1 / n1, floor)};
  return true;
}

}  // namespace

std::optional<Gmm2Fit> fit_gmm2(std::span<const double> z, const EmConfig& config) {
  if (z.size() < 2) throw std::invalid_argument("fit_gmm2: need at least 2 values");
  const auto sorted = sorted_copy(z);
  if (sorted.front() == sorted.back()) return std::nullopt;

  const double nd = static_cast<double>(z.size());
  double mean = 0.0;
  for (double x : z) mean += x;
  mean /= nd;
  double global_var = 0.0;
  for (double x : z) global_var += (x - mean) * (x - mean);
  global_var /= nd;
  const double floor = variance_floor(sorted.back() - sorted.front());
  global_var = std::max(global_var, floor);

  constexpr std::array<double, 3> kStartQuantiles{0.25, 0.10, 0.40};
  std::optional<Gmm2Fit> best;
  std::vector<double> resp0(z.size());
  for (int r = 0; r < config.restarts; ++r) {
    const double q = kStartQuantiles[static_cast<std::size_t>(r) % kStartQuantiles.size()];
    EmState s{{0.5, 0.5}, {quantile(sorted, q), quantile(sorted, 1.0 - q)},
              {global_var, global_var}};
    if (s.mu[0] == s.mu[1]) s.mu = {sorted.front(), sorted.back()};

    Gmm2Fit fit;
    bool degenerate = false;
    double prev = -std::numeric_limits<double>::infinity();
    double ll = prev;
    for (fit.iterations = 0; fit.iterations < config.max_iter; ++fit.iterations) {
      ll = e_step(z, s, resp0);
      if (std::abs(ll - prev) < config.tolerance * std::max(1.0, std::abs(ll))) {
        fit.converged = true;
        break;
      }
      prev = ll;
      if (!m_step(z, resp0, floor, s)) {
        degenerate = true;
        break;
      }
    }
    if (degenerate) continue;
    if (!fit.converged) ll = e_step(z, s, resp0);
    if (!std::isfinite(ll)) continue;

    const int lo = s.mu[0] <= s.mu[1] ? 0 : 1;
    const int hi = 1 - lo;
    fit.weight = {s.w[lo], s.w[hi]};
    fit.mean = {s.mu[lo], s.mu[hi]};
    fit.variance = {s.var[lo], s.var[hi]};
    fit.log_likelihood = ll;
    if (fit.weight[0] * nd < 1.0 || fit.weight[1] * nd < 1.0) continue;
    if (!best || fit.log_likelihood > best->log_likelihood) best = fit;
  }
  return best;
}

double equal_likelihood_point(const Gmm2Fit& fit) {
  const double m1 = fit.mean[0], m2 = fit.mean[1];
  const double v1 = fit.variance[0], v2 = fit.variance[1];
  const double mid = 0.5 * (m1 + m2);
  // w1 N(x; m1, v1) = w2 N(x; m2, v2)  <=>  a x^2 + b x + c = 0
  const double a = 0.5 / v2 - 0.5 / v1;
  const double b = m1 / v1 - m2 / v2;
  const double c = 0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 +
                   std::log(fit.weight[0] / fit.weight[1]) + 0.5 * std::log(v2 / v1);
  const auto between = [&](double x) { return std::isfinite(x) && x >= m1 && x <= m2; };

  const double scale = std::abs(b) + std::abs(c) + 1e-300;
  if (std::abs(a) * (std::abs(m1) + std::abs(m2) + 1.0) <= 1e-12 * scale) {
    const double x = b != 0.0 ? -c / b : mid;
    return between(x) ? x : mid;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return mid;
  // Numerically stable pair of roots.
  const double sq = std::sqrt(disc);
  const double qv = -0.5 * (b + std::copysign(sq, b));
  const double r1 = qv / a;
  const double r2 = qv != 0.0 ? c / qv : r1;
  const bool in1 = between(r1), in2 = between(r2);
  if (in1 && in2) return std::abs(r1 - mid) <= std::abs(r2 - mid) ? r1 : r2;
  if (in1) return r1;
  if (in2) return r2;
  return mid;
}

std::optional<SplitCandidate> em_gmm_bic_1d(std::span<const double> z, std::size_t min_leaf,
                                            const EmConfig& config) {
  check_size(z.size(), min_leaf);
  const auto fit = fit_gmm2(z, config);
  if (!fit) return std::nullopt;
  const double threshold = equal_likelihood_point(*fit);
  std::size_t left = 0;
  for (double x : z) left += x < threshold ? 1 : 0;
  if (left < min_leaf || left > z.size() - min_leaf) return std::nullopt;
  const double nd = static_cast<double>(z.size());
  const double score = -2.0 * fit->log_likelihood + std::log(nd) * 5.0;
  return SplitCandidate{threshold, score, SplitModel::EmBic, left, fit->converged};
}

std::optional<SplitCandidate> best_split_sorted(Criterion criterion,
                                                std::span<const double> sorted,
                                                std::size_t min_leaf, const EmConfig& em) {
  switch (criterion) {
    case Criterion::TwoMeans: return two_means_1d_sorted(sorted, min_leaf);
    case Criterion::FastBic: return fast_bic_1d_sorted(sorted, min_leaf);
    case Criterion::EmBic: return em_gmm_bic_1d(sorted, min_leaf, em);
  }
  return std::nullopt;
}

}  // namespace urerf
