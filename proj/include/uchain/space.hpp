#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uchain/error.hpp"

namespace uchain {

/// Slack applied to every closed distance comparison `d <= eps`. Grid
/// coordinates are computed as i/n, so two neighbours that are exactly h
/// apart in exact arithmetic may come out one ulp above h.
inline constexpr double kTolerance = 1e-9;

using Index = std::uint32_t;

enum class Geometry { interval, circle, product_of_circles, discrete };

constexpr std::string_view geometry_name(Geometry g) noexcept {
  switch (g) {
    case Geometry::interval: return "interval";
    case Geometry::circle: return "circle";
    case Geometry::product_of_circles: return "product-of-circles";
    case Geometry::discrete: return "discrete";
  }
  return "unknown";
}

inline std::optional<Geometry> parse_geometry(std::string_view s) {
  if (s == "interval") return Geometry::interval;
  if (s == "circle") return Geometry::circle;
  if (s == "product-of-circles") return Geometry::product_of_circles;
  if (s == "discrete") return Geometry::discrete;
  return std::nullopt;
}

constexpr bool wraps(Geometry g) noexcept {
  return g == Geometry::circle || g == Geometry::product_of_circles;
}

/// One coordinate of the distance: plain |a-b|, or the wrap-around
/// distance min(|a-b|, 1-|a-b|) on circle factors.
inline double axis_distance(double a, double b, bool wrap) noexcept {
  double d = std::fabs(a - b);
  if (wrap) d = std::min(d, 1.0 - d);
  return d;
}

/// A finite sample X of a compact space inside [0,1]^d. Points are indexed
/// densely 0..n-1. Distances are sup-metrics over coordinates; circle
/// factors wrap modulo 1.
class FinitePhaseSpace {
 public:
  /// n equally spaced points i/(n-1) on [0,1]; h = 1/(n-1).
  static FinitePhaseSpace interval_grid(std::size_t n) {
    require_size(n);
    FinitePhaseSpace s(1, Geometry::interval);
    s.coords_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      s.coords_[i] = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    s.resolution_ = n == 1 ? 1.0 : 1.0 / static_cast<double>(n - 1);
    s.layout_ = Layout::regular_interval;
    return s;
  }

  /// n equally spaced points i/n on the circle R/Z; h = 1/n.
  static FinitePhaseSpace circle_grid(std::size_t n) {
    require_size(n);
    FinitePhaseSpace s(1, Geometry::circle);
    s.coords_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.coords_[i] = static_cast<double>(i) / static_cast<double>(n);
    s.resolution_ = 1.0 / static_cast<double>(n);
    s.layout_ = Layout::regular_circle;
    return s;
  }

  /// Product of `dim` circle grids with `per_axis` points each, row-major
  /// (the first coordinate varies slowest).
  static FinitePhaseSpace torus_grid(std::size_t per_axis, std::size_t dim) {
    require_size(per_axis);
    if (dim < 1) throw error(errc::invalid_parameter, "dimension must be >= 1");
    std::size_t total = 1;
    for (std::size_t k = 0; k < dim; ++k) {
      total *= per_axis;
      if (total > kMaxPoints) throw error(errc::resource_limit, "torus grid too large");
    }
    FinitePhaseSpace s(dim, Geometry::product_of_circles);
    s.coords_.resize(total * dim);
    for (std::size_t i = 0; i < total; ++i) {
      std::size_t rem = i;
      for (std::size_t k = dim; k-- > 0;) {
        s.coords_[i * dim + k] = static_cast<double>(rem % per_axis) / static_cast<double>(per_axis);
        rem /= per_axis;
      }
    }
    s.resolution_ = 1.0 / static_cast<double>(per_axis);
    return s;
  }

  /// Explicitly listed points. For interval/circle the resolution is the
  /// largest gap between consecutive points; for discrete it is the
  /// minimum pairwise distance.
  static FinitePhaseSpace from_points(const std::vector<std::vector<double>>& points, Geometry geometry) {
    if (points.empty()) throw error(errc::invalid_parameter, "a phase space needs at least one point");
    if (points.size() > kMaxPoints) throw error(errc::resource_limit, "too many points");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw error(errc::invalid_parameter, "points must have at least one coordinate");
    if ((geometry == Geometry::interval || geometry == Geometry::circle) && dim != 1)
      throw error(errc::invalid_parameter, "interval and circle geometries are one-dimensional");
    FinitePhaseSpace s(dim, geometry);
    for (const auto& p : points) {
      if (p.size() != dim) throw error(errc::invalid_parameter, "points have mixed dimensions");
      for (double c : p) {
        if (!(c >= 0.0 && c <= 1.0)) throw error(errc::invalid_parameter, "coordinates must lie in [0,1]");
        s.coords_.push_back(c);
      }
    }
    const std::size_t n = points.size();
    if (n == 1) {
      s.resolution_ = 1.0;
    } else if (geometry == Geometry::discrete || geometry == Geometry::product_of_circles) {
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) gap = std::min(gap, s.distance(i, j));
      if (gap <= 0.0) throw error(errc::invalid_parameter, "points must be distinct");
      s.resolution_ = gap;
      if (geometry == Geometry::discrete) s.gap_ = gap;
    } else {
      std::vector<double> sorted(s.coords_);
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw error(errc::invalid_parameter, "points must be distinct");
      double h = 0.0;
      for (std::size_t i = 1; i < n; ++i) h = std::max(h, sorted[i] - sorted[i - 1]);
      if (geometry == Geometry::circle) h = std::max(h, 1.0 - sorted.back() + sorted.front());
      s.resolution_ = h;
    }
    return s;
  }

  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::size_t dimension() const noexcept { return dim_; }
  Geometry geometry() const noexcept { return geometry_; }
  /// Sample spacing h.
  double resolution() const noexcept { return resolution_; }
  /// Minimum pairwise distance, recorded for discrete geometries only.
  std::optional<double> gap() const noexcept { return gap_; }

  std::span<const double> point(std::size_t i) const {
    check_index(i);
    return {coords_.data() + i * dim_, dim_};
  }

  void check_index(std::size_t i) const {
    if (i >= size())
      throw error(errc::out_of_range, "point index " + std::to_string(i) + " outside 0.." +
                                          std::to_string(size() - 1));
  }

  double distance(std::span<const double> a, std::span<const double> b) const noexcept {
    const bool wrap = wraps(geometry_);
    double d = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) d = std::max(d, axis_distance(a[k], b[k], wrap));
    return d;
  }

  double distance(std::size_t i, std::size_t j) const { return distance(point(i), point(j)); }

  /// Brings image coordinates back into [0,1): circle factors wrap modulo
  /// 1, other geometries are clamped.
  void normalize(std::span<double> p) const noexcept {
    for (double& c : p) {
      if (wraps(geometry_)) {
        c -= std::floor(c);
        if (c >= 1.0) c = 0.0;
      } else {
        c = std::clamp(c, 0.0, 1.0);
      }
    }
  }

  /// Grid index closest to p; ties go to the smallest index.
  Index nearest_index(std::span<const double> p) const {
    const std::size_t n = size();
    auto better = [&](std::size_t cand, std::size_t& best, double& best_d) {
      const double d = distance(p, point(cand));
      if (d < best_d || (d == best_d && cand < best)) {
        best = cand;
        best_d = d;
      }
    };
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    if (layout_ == Layout::regular_interval && n > 1) {
      const double scaled = p[0] * static_cast<double>(n - 1);
      const long k = std::lround(scaled);
      for (long c = k - 1; c <= k + 1; ++c)
        if (c >= 0 && c < static_cast<long>(n)) better(static_cast<std::size_t>(c), best, best_d);
    } else if (layout_ == Layout::regular_circle) {
      const long nn = static_cast<long>(n);
      const long k = std::lround(p[0] * static_cast<double>(n));
      for (long c = k - 1; c <= k + 1; ++c) better(static_cast<std::size_t>(((c % nn) + nn) % nn), best, best_d);
    } else {
      for (std::size_t c = 0; c < n; ++c) better(c, best, best_d);
    }
    return static_cast<Index>(best);
  }

  bool operator==(const FinitePhaseSpace& other) const {
    return dim_ == other.dim_ && geometry_ == other.geometry_ && resolution_ == other.resolution_ &&
           gap_ == other.gap_ && coords_ == other.coords_;
  }

  static constexpr std::size_t kMaxPoints = 1u << 16;

 private:
  enum class Layout { general, regular_interval, regular_circle };

  FinitePhaseSpace(std::size_t dim, Geometry g) : dim_(dim), geometry_(g) {}

  static void require_size(std::size_t n) {
    if (n < 1) throw error(errc::invalid_parameter, "grid needs at least one point");
    if (n > kMaxPoints) throw error(errc::resource_limit, "grid larger than " + std::to_string(kMaxPoints));
  }

  friend FinitePhaseSpace cantor_space(int levels);

  std::size_t dim_;
  Geometry geometry_;
  std::vector<double> coords_;
  double resolution_ = 1.0;
  std::optional<double> gap_;
  Layout layout_ = Layout::general;
};

using SpacePtr = std::shared_ptr<const FinitePhaseSpace>;

inline SpacePtr share(FinitePhaseSpace s) { return std::make_shared<const FinitePhaseSpace>(std::move(s)); }

/// Level-k approximation of the middle-thirds Cantor set:
/// { sum_i a_i 2 3^-i : a_i in {0,1} }, sorted ascending, discrete geometry.
/// The recorded gap is the minimum pairwise distance 2*3^-levels.
inline FinitePhaseSpace cantor_space(int levels) {
  if (levels < 1 || levels > 12)
    throw error(errc::invalid_parameter, "cantor levels must lie in 1..12, got " + std::to_string(levels));
  const std::size_t n = std::size_t{1} << levels;
  std::uint64_t denom = 1;
  for (int i = 0; i < levels; ++i) denom *= 3;
  FinitePhaseSpace s(1, Geometry::discrete);
  s.coords_.resize(n);
  for (std::size_t word = 0; word < n; ++word) {
    // bit (levels-1-i) of `word` is digit a_{i+1}; ascending words give ascending points.
    std::uint64_t num = 0;
    std::uint64_t weight = denom;
    for (int i = 0; i < levels; ++i) {
      weight /= 3;
      if ((word >> (levels - 1 - i)) & 1u) num += 2 * weight;
    }
    s.coords_[word] = static_cast<double>(num) / static_cast<double>(denom);
  }
  const double gap = 2.0 / static_cast<double>(denom);
  s.resolution_ = gap;
  s.gap_ = gap;
  return s;
}

}  // namespace uchain
