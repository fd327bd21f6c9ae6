#pragma once

// Benchmark manifolds with exact geodesic oracles.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "urerf/matrix.hpp"

namespace urerf {

enum class OracleKind { Continuous, Discrete };

/// Closed-form geodesic rule attached to a continuous oracle, or the
/// component rule of a discrete one.
enum class GeodesicRule { Line, Helix, Sphere, Components };

std::string_view rule_name(GeodesicRule rule);
GeodesicRule parse_rule(std::string_view name);

/// Ground-truth latent structure of a dataset.
///
/// Continuous oracles store one latent coordinate per point (t for the line
/// and helix, (u, v) for the sphere) and evaluate the arc length in closed
/// form. Discrete oracles store a component label per point; points in
/// different components are infinitely far apart.
class GeodesicOracle {
 public:
  static GeodesicOracle line(std::vector<double> t, std::array<double, 3> direction);
  static GeodesicOracle helix(std::vector<double> t);
  static GeodesicOracle sphere(std::vector<double> u, std::vector<double> v, double radius);
  static GeodesicOracle components(std::vector<int> labels);

  OracleKind kind() const noexcept { return kind_; }
  GeodesicRule rule() const noexcept { return rule_; }
  std::size_t size() const noexcept;

  /// Arc-length distance between points i and j. Continuous oracles only.
  double distance(std::size_t i, std::size_t j) const;
  /// Discrete oracles only.
  bool same_component(std::size_t i, std::size_t j) const;

  /// Latent parameter names and row-major values (stride = names.size()).
  std::vector<std::string> latent_names() const;
  const std::vector<double>& latent() const noexcept { return latent_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  double radius() const noexcept { return radius_; }
  const std::array<double, 3>& direction() const noexcept { return direction_; }

 private:
  OracleKind kind_ = OracleKind::Continuous;
  GeodesicRule rule_ = GeodesicRule::Line;
  std::vector<double> latent_;
  std::vector<int> labels_;
  std::array<double, 3> direction_{};
  double speed_ = 0.0;
  double radius_ = 0.0;
  std::vector<double> cache_;  // helix: arc-length antiderivative per point
};

struct Dataset {
  std::string name;
  DataMatrix data;
  GeodesicOracle oracle;
};

struct NoiseSpec {
  std::size_t extra_dims = 0;
  double variance = 70.0;
  std::uint64_t seed = 0;
};

// Closed forms shared by the generators and their oracles.
std::array<double, 3> line_point(double t);
std::array<double, 3> helix_point(double t);
double helix_speed(double t);
/// Antiderivative of the helix speed sqrt(2 + t^2).
double helix_arc_length(double t);
std::array<double, 3> sphere_point(double radius, double u, double v);
double great_circle_distance(double radius, double u1, double v1, double u2, double v2);

/// Open-interval grid a + (b - a)(k + 1/2)/n, k = 0..n-1.
std::vector<double> open_grid(double a, double b, std::size_t n);

/// Factors n = n_u * n_v with n_u the divisor closest to ceil(sqrt(2n)),
/// both factors >= 2. Throws std::invalid_argument when impossible.
std::pair<std::size_t, std::size_t> sphere_grid_shape(std::size_t n);

Dataset gen_linear(std::size_t n);
Dataset gen_helix(std::size_t n);
Dataset gen_sphere(std::size_t n);
Dataset gen_gmm(std::size_t n, std::uint64_t seed);

inline constexpr std::array<double, 3> kGmmWeights{0.3, 0.3, 0.4};
inline constexpr double kSphereRadius = 9.0;

/// Dispatches on "linear" | "helix" | "sphere" | "gmm".
Dataset generate(std::string_view name, std::size_t n, std::uint64_t seed);

DataMatrix add_noise(const DataMatrix& x, const NoiseSpec& spec);
DataMatrix rescale01(const DataMatrix& x);

}  // namespace urerf
