#include "urerf/geodesic_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace urerf {

NeighborRanking::NeighborRanking(DataMatrix keys, RankingSource source)
    : keys_(std::move(keys)), source_(source) {
  if (keys_.rows() != keys_.cols()) throw std::invalid_argument("ranking: matrix must be square");
  if (keys_.rows() < 2) throw std::invalid_argument("ranking: need at least 2 points");
}

NeighborRanking NeighborRanking::from_similarity(const DataMatrix& similarity,
                                                 RankingSource source) {
  DataMatrix keys = similarity;
  for (double& v : keys.values()) v = -v;
  return NeighborRanking(std::move(keys), source);
}

NeighborRanking NeighborRanking::from_distance(DataMatrix distance, RankingSource source) {
  return NeighborRanking(std::move(distance), source);
}

NeighborRanking NeighborRanking::from_proximity(const ProximityMatrix& proximity) {
  return from_similarity(proximity.dense(), RankingSource::Proximity);
}

namespace {

void check_k(std::size_t k, std::size_t n) {
  if (k == 0 || k >= n) {
    throw std::invalid_argument("k = " + std::to_string(k) + " must lie in [1, N - 1] = [1, " +
                                std::to_string(n - 1) + "]");
  }
}

// k smallest (key, index) pairs among j != i, in order.
template <class KeyFn>
std::vector<std::size_t> smallest_k(std::size_t n, std::size_t i, std::size_t k, KeyFn key) {
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) cand.emplace_back(key(j), j);
  }
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  std::vector<std::size_t> out(k);
  for (std::size_t r = 0; r < k; ++r) out[r] = cand[r].second;
  return out;
}

}  // namespace

std::vector<std::size_t> NeighborRanking::top(std::size_t i, std::size_t k) const {
  check_k(k, size());
  const auto row = keys_.row(i);
  return smallest_k(size(), i, k, [&](std::size_t j) { return row[j]; });
}

std::vector<std::size_t> true_neighbors(const GeodesicOracle& oracle, std::size_t i,
                                        std::size_t k) {
  const std::size_t n = oracle.size();
  if (oracle.kind() == OracleKind::Discrete) {
    if (k >= n) throw std::invalid_argument("k must be < N");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && oracle.same_component(i, j)) out.push_back(j);
    }
    return out;
  }
  check_k(k, n);
  return smallest_k(n, i, k, [&](std::size_t j) { return oracle.distance(i, j); });
}

std::vector<std::size_t> retrieved_neighbors(const NeighborRanking& ranking, std::size_t i,
                                             std::size_t k) {
  return ranking.top(i, k);
}

std::vector<PRPoint> pr_curve(const NeighborRanking& ranking, const GeodesicOracle& oracle,
                              std::vector<std::size_t> ks) {
  const std::size_t n = ranking.size();
  if (oracle.size() != n) {
    throw std::invalid_argument("evaluation: ranking covers " + std::to_string(n) +
                                " points but the oracle covers " + std::to_string(oracle.size()));
  }
  std::sort(ks.begin(), ks.end());
  if (ks.empty()) return {};
  for (std::size_t k : ks) check_k(k, n);
  const std::size_t kmax = ks.back();
  const bool discrete = oracle.kind() == OracleKind::Discrete;

  // Integer hit totals, grouped by relevant-set size, so each mean is a
  // single rounding of an exact ratio.
  std::vector<std::uint64_t> hits_total(ks.size(), 0);
  std::vector<std::map<std::size_t, std::uint64_t>> hits_by_size(ks.size());
  std::size_t recall_queries = 0;
  std::vector<char> relevant(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto retrieved = ranking.top(i, kmax);
    std::vector<std::size_t> truth = true_neighbors(oracle, i, kmax);
    if (discrete) {
      for (std::size_t j : truth) relevant[j] = 1;
      if (!truth.empty()) ++recall_queries;
    }
    for (std::size_t q = 0; q < ks.size(); ++q) {
      const std::size_t k = ks[q];
      if (!discrete) {
        std::fill(relevant.begin(), relevant.end(), 0);
        for (std::size_t r = 0; r < k; ++r) relevant[truth[r]] = 1;
      }
      std::size_t hits = 0;
      for (std::size_t r = 0; r < k; ++r) hits += relevant[retrieved[r]];
      hits_total[q] += hits;
      if (discrete && !truth.empty()) hits_by_size[q][truth.size()] += hits;
    }
    if (discrete) {
      for (std::size_t j : truth) relevant[j] = 0;
    }
  }

  std::vector<PRPoint> out;
  out.reserve(ks.size());
  for (std::size_t q = 0; q < ks.size(); ++q) {
    const double precision =
        static_cast<double>(hits_total[q]) / (static_cast<double>(ks[q]) * static_cast<double>(n));
    double recall = precision;
    if (discrete) {
      recall = 0.0;
      for (const auto& [size, hits] : hits_by_size[q]) {
        recall += static_cast<double>(hits) /
                  (static_cast<double>(size) * static_cast<double>(recall_queries));
      }
    }
    out.push_back({ks[q], precision, recall});
  }
  return out;
}

PRPoint geodesic_pr(const NeighborRanking& ranking, const GeodesicOracle& oracle, std::size_t k) {
  return pr_curve(ranking, oracle, {k}).front();
}

double chance_level(const GeodesicOracle& oracle, std::size_t k) {
  const double n = static_cast<double>(oracle.size());
  if (oracle.kind() == OracleKind::Continuous) return static_cast<double>(k) / (n - 1.0);
  std::map<int, std::size_t> sizes;
  for (int label : oracle.labels()) ++sizes[label];
  double chance = 0.0;
  for (const auto& [label, m] : sizes) {
    const double md = static_cast<double>(m);
    chance += (md / n) * ((md - 1.0) / (n - 1.0));
  }
  return chance;
}

DataMatrix euclidean_distances(const DataMatrix& x) {
  const std::size_t n = x.rows();
  DataMatrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = x.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const auto b = x.row(j);
      double acc = 0.0;
      for (std::size_t f = 0; f < a.size(); ++f) {
        const double diff = a[f] - b[f];
        acc += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(acc);
    }
  }
  return d;
}

NeighborRanking euclidean_ranking(const DataMatrix& x) {
  if (x.rows() < 2) throw std::invalid_argument("euclidean_ranking: need at least 2 points");
  return NeighborRanking::from_distance(euclidean_distances(x), RankingSource::EuclideanDistance);
}

}  // namespace urerf
