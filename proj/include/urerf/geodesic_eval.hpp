#pragma once

// Geodesic precision and recall of neighbor rankings against a latent
// manifold oracle.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "urerf/forest.hpp"
#include "urerf/matrix.hpp"
#include "urerf/synthdata.hpp"

namespace urerf {

enum class RankingSource { Proximity, EuclideanDistance, ExternalMatrix };

/// For every query i, a total order over j != i: nearest first, ties broken
/// by ascending index.
class NeighborRanking {
 public:
  /// Higher similarity = nearer.
  static NeighborRanking from_similarity(const DataMatrix& similarity,
                                         RankingSource source = RankingSource::Proximity);
  /// Lower distance = nearer.
  static NeighborRanking from_distance(DataMatrix distance,
                                       RankingSource source = RankingSource::ExternalMatrix);
  static NeighborRanking from_proximity(const ProximityMatrix& proximity);

  std::size_t size() const noexcept { return keys_.rows(); }
  RankingSource source() const noexcept { return source_; }

  /// The k nearest j != i in ranking order.
  std::vector<std::size_t> top(std::size_t i, std::size_t k) const;

 private:
  NeighborRanking(DataMatrix keys, RankingSource source);

  DataMatrix keys_;  // lower = nearer
  RankingSource source_;
};

struct PRPoint {
  std::size_t k = 0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Relevant set of query i: the k oracle-nearest points (continuous; ties by
/// ascending index) or every other member of i's component (discrete; k is
/// ignored).
std::vector<std::size_t> true_neighbors(const GeodesicOracle& oracle, std::size_t i,
                                        std::size_t k);

std::vector<std::size_t> retrieved_neighbors(const NeighborRanking& ranking, std::size_t i,
                                             std::size_t k);

/// Mean over queries of |R ∩ T| / |R| and |R ∩ T| / |T|. Queries with an
/// empty relevant set count as precision 0 and are left out of the recall
/// mean.
PRPoint geodesic_pr(const NeighborRanking& ranking, const GeodesicOracle& oracle, std::size_t k);

/// geodesic_pr for each k, ascending.
std::vector<PRPoint> pr_curve(const NeighborRanking& ranking, const GeodesicOracle& oracle,
                              std::vector<std::size_t> ks);

/// Expected score of a uniformly random ranking: k / (N - 1) for continuous
/// oracles, sum_c (m_c / N)(m_c - 1)/(N - 1) for discrete ones.
double chance_level(const GeodesicOracle& oracle, std::size_t k);

/// Exact pairwise Euclidean distances.
DataMatrix euclidean_distances(const DataMatrix& x);
NeighborRanking euclidean_ranking(const DataMatrix& x);

}  // namespace urerf
