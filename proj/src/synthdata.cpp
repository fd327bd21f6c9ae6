#include "urerf/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "urerf/rng.hpp"

namespace urerf {

namespace {

constexpr std::array<double, 3> kLineDirection{4.0, 6.0, 9.0};

constexpr std::array<std::array<double, 3>, 3> kGmmMeans{{
    {-3.0, -3.0, -3.0},
    {0.0, 0.0, 0.0},
    {3.0, 3.0, 3.0},
}};

void require_points(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) {
    throw std::invalid_argument(std::string(what) + ": need at least " +
                                std::to_string(minimum) + " points, got " +
                                std::to_string(n));
  }
}

DataMatrix from_points(const std::vector<std::array<double, 3>>& pts) {
  DataMatrix x(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = pts[i][j];
  }
  return x;
}

}  // namespace

std::string_view rule_name(GeodesicRule rule) {
  switch (rule) {
    case GeodesicRule::Line: return "line";
    case GeodesicRule::Helix: return "helix";
    case GeodesicRule::Sphere: return "sphere";
    case GeodesicRule::Components: return "components";
  }
  return "unknown";
}

GeodesicRule parse_rule(std::string_view name) {
  if (name == "line") return GeodesicRule::Line;
  if (name == "helix") return GeodesicRule::Helix;
  if (name == "sphere") return GeodesicRule::Sphere;
  if (name == "components") return GeodesicRule::Components;
  throw std::invalid_argument("unknown geodesic rule '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Closed forms

std::array<double, 3> line_point(double t) {
  return {kLineDirection[0] * t, kLineDirection[1] * t, kLineDirection[2] * t};
}

std::array<double, 3> helix_point(double t) {
  return {t * std::cos(t), t * std::sin(t), t};
}

double helix_speed(double t) { return std::sqrt(2.0 + t * t); }

double helix_arc_length(double t) {
  const double root = std::sqrt(t * t + 2.0);
  return 0.5 * t * root + std::log(t + root);
}

std::array<double, 3> sphere_point(double radius, double u, double v) {
  return {radius * std::cos(u) * std::sin(v), radius * std::sin(u) * std::sin(v),
          radius * std::cos(v)};
}

double great_circle_distance(double radius, double u1, double v1, double u2, double v2) {
  const auto a = sphere_point(radius, u1, v1);
  const auto b = sphere_point(radius, u2, v2);
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  const double c = std::clamp(dot / (radius * radius), -1.0, 1.0);
  return radius * std::acos(c);
}

std::vector<double> open_grid(double a, double b, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = a + (b - a) * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  }
  return t;
}

std::pair<std::size_t, std::size_t> sphere_grid_shape(std::size_t n) {
  require_points(n, 4, "sphere");
  const auto target = static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(n))));
  std::size_t best = 0;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t nu = 2; nu <= n / 2; ++nu) {
    if (n % nu != 0) continue;
    const std::size_t gap = nu > target ? nu - target : target - nu;
    if (gap < best_gap) {
      best = nu;
      best_gap = gap;
    }
  }
  if (best == 0) {
    throw std::invalid_argument("sphere: " + std::to_string(n) +
                                " points cannot be arranged on a u x v grid with both sides >= 2");
  }
  return {best, n / best};
}

// ---------------------------------------------------------------------------
// GeodesicOracle

GeodesicOracle GeodesicOracle::line(std::vector<double> t, std::array<double, 3> direction) {
  GeodesicOracle o;
  o.kind_ = OracleKind::Continuous;
  o.rule_ = GeodesicRule::Line;
  o.latent_ = std::move(t);
  o.direction_ = direction;
  o.speed_ = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                       direction[2] * direction[2]);
  return o;
}

GeodesicOracle GeodesicOracle::helix(std::vector<double> t) {
  GeodesicOracle o;
  o.kind_ = OracleKind::Continuous;
  o.rule_ = GeodesicRule::Helix;
  o.latent_ = std::move(t);
  o.cache_.reserve(o.latent_.size());
  for (double ti : o.latent_) o.cache_.push_back(helix_arc_length(ti));
  return o;
}

GeodesicOracle GeodesicOracle::sphere(std::vector<double> u, std::vector<double> v,
                                      double radius) {
  if (u.size() != v.size()) throw std::invalid_argument("sphere oracle: u/v size mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("sphere oracle: radius must be positive");
  GeodesicOracle o;
  o.kind_ = OracleKind::Continuous;
  o.rule_ = GeodesicRule::Sphere;
  o.radius_ = radius;
  o.latent_.reserve(2 * u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    o.latent_.push_back(u[i]);
    o.latent_.push_back(v[i]);
  }
  return o;
}

GeodesicOracle GeodesicOracle::components(std::vector<int> labels) {
  GeodesicOracle o;
  o.kind_ = OracleKind::Discrete;
  o.rule_ = GeodesicRule::Components;
  o.labels_ = std::move(labels);
  return o;
}

std::size_t GeodesicOracle::size() const noexcept {
  switch (rule_) {
    case GeodesicRule::Sphere: return latent_.size() / 2;
    case GeodesicRule::Components: return labels_.size();
    default: return latent_.size();
  }
}

double GeodesicOracle::distance(std::size_t i, std::size_t j) const {
  switch (rule_) {
    case GeodesicRule::Line: return std::abs(latent_[i] - latent_[j]) * speed_;
    case GeodesicRule::Helix: return std::abs(cache_[j] - cache_[i]);
    case GeodesicRule::Sphere:
      if (i == j) return 0.0;
      return great_circle_distance(radius_, latent_[2 * i], latent_[2 * i + 1], latent_[2 * j],
                                   latent_[2 * j + 1]);
    case GeodesicRule::Components: break;
  }
  throw std::logic_error("distance() requires a continuous oracle");
}

bool GeodesicOracle::same_component(std::size_t i, std::size_t j) const {
  if (kind_ != OracleKind::Discrete) {
    throw std::logic_error("same_component() requires a discrete oracle");
  }
  return labels_[i] == labels_[j];
}

std::vector<std::string> GeodesicOracle::latent_names() const {
  switch (rule_) {
    case GeodesicRule::Sphere: return {"u", "v"};
    case GeodesicRule::Components: return {"label"};
    default: return {"t"};
  }
}

// ---------------------------------------------------------------------------
// Generators

Dataset gen_linear(std::size_t n) {
  require_points(n, 2, "linear");
  auto t = open_grid(0.0, 1.0, n);
  std::vector<std::array<double, 3>> pts;
  pts.reserve(n);
  for (double ti : t) pts.push_back(line_point(ti));
  return {"linear", from_points(pts), GeodesicOracle::line(std::move(t), kLineDirection)};
}

Dataset gen_helix(std::size_t n) {
  require_points(n, 2, "helix");
  auto t = open_grid(2.0 * std::numbers::pi, 9.0 * std::numbers::pi, n);
  std::vector<std::array<double, 3>> pts;
  pts.reserve(n);
  for (double ti : t) pts.push_back(helix_point(ti));
  return {"helix", from_points(pts), GeodesicOracle::helix(std::move(t))};
}

Dataset gen_sphere(std::size_t n) {
  const auto [nu, nv] = sphere_grid_shape(n);
  const auto us = open_grid(0.0, 2.0 * std::numbers::pi, nu);
  const auto vs = open_grid(0.0, std::numbers::pi, nv);
  std::vector<double> u, v;
  std::vector<std::array<double, 3>> pts;
  u.reserve(n);
  v.reserve(n);
  pts.reserve(n);
  for (double ui : us) {
    for (double vi : vs) {
      u.push_back(ui);
      v.push_back(vi);
      pts.push_back(sphere_point(kSphereRadius, ui, vi));
    }
  }
  return {"sphere", from_points(pts),
          GeodesicOracle::sphere(std::move(u), std::move(v), kSphereRadius)};
}

Dataset gen_gmm(std::size_t n, std::uint64_t seed) {
  require_points(n, 3, "gmm");
  Rng rng(derive_seed(seed, "gmm"));
  std::vector<int> labels(n);
  DataMatrix x(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform();
    int c = 2;
    if (r < kGmmWeights[0]) {
      c = 0;
    } else if (r < kGmmWeights[0] + kGmmWeights[1]) {
      c = 1;
    }
    labels[i] = c;
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = kGmmMeans[c][j] + rng.normal();
  }
  return {"gmm", std::move(x), GeodesicOracle::components(std::move(labels))};
}

Dataset generate(std::string_view name, std::size_t n, std::uint64_t seed) {
  if (name == "linear") return gen_linear(n);
  if (name == "helix") return gen_helix(n);
  if (name == "sphere") return gen_sphere(n);
  if (name == "gmm") return gen_gmm(n, seed);
  throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Feature transforms

DataMatrix add_noise(const DataMatrix& x, const NoiseSpec& spec) {
  if (spec.extra_dims == 0) return x;
  if (!(spec.variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
  const std::size_t p = x.cols();
  DataMatrix out(x.rows(), p + spec.extra_dims);
  Rng rng(derive_seed(spec.seed, "noise"));
  const double sd = std::sqrt(spec.variance);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto src = x.row(i);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t j = p; j < dst.size(); ++j) dst[j] = sd * rng.normal();
  }
  return out;
}

DataMatrix rescale01(const DataMatrix& x) {
  DataMatrix out = x;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out(i, j) = span > 0.0 ? (x(i, j) - lo) / span : 0.0;
    }
  }
  return out;
}

}  // namespace urerf
