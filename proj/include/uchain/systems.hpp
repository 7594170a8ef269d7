#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uchain/entourage.hpp"
#include "uchain/error.hpp"
#include "uchain/space.hpp"

namespace uchain {

enum class MapKind { rotation, doubling, tent, identity, square, permutation, odometer };

constexpr std::string_view map_name(MapKind m) noexcept {
  switch (m) {
    case MapKind::rotation: return "rotation";
    case MapKind::doubling: return "doubling";
    case MapKind::tent: return "tent";
    case MapKind::identity: return "identity";
    case MapKind::square: return "square";
    case MapKind::permutation: return "permutation";
    case MapKind::odometer: return "odometer";
  }
  return "unknown";
}

inline std::optional<MapKind> parse_map(std::string_view s) {
  for (MapKind m : {MapKind::rotation, MapKind::doubling, MapKind::tent, MapKind::identity, MapKind::square,
                    MapKind::permutation, MapKind::odometer})
    if (map_name(m) == s) return m;
  return std::nullopt;
}

struct MapEvaluation {
  /// f^n(x) computed from the map formula; may lie off the grid.
  std::vector<double> image;
  /// Grid index closest to `image` (ties: smallest index).
  Index nearest_index = 0;
};

/// A dynamical system (X, f) on a finite phase space. Formula maps act on
/// coordinates and are iterated in floating point without snapping to the
/// grid; permutation and odometer act on indices. `step()` is the number of
/// base-map applications per step, so `power(n)` models f^n.
class SystemSpec {
 public:
  static SystemSpec rotation(SpacePtr space, double alpha, std::string name = "rotation") {
    SystemSpec s(std::move(name), MapKind::rotation, std::move(space));
    s.alpha_ = alpha;
    s.validate();
    return s;
  }
  static SystemSpec doubling(SpacePtr space, std::string name = "doubling") {
    SystemSpec s(std::move(name), MapKind::doubling, std::move(space));
    s.validate();
    return s;
  }
  static SystemSpec tent(SpacePtr space, double slope = 2.0, std::string name = "tent") {
    SystemSpec s(std::move(name), MapKind::tent, std::move(space));
    s.slope_ = slope;
    s.validate();
    return s;
  }
  static SystemSpec identity(SpacePtr space, std::string name = "identity") {
    SystemSpec s(std::move(name), MapKind::identity, std::move(space));
    s.validate();
    return s;
  }
  static SystemSpec square(SpacePtr space, std::string name = "square") {
    SystemSpec s(std::move(name), MapKind::square, std::move(space));
    s.validate();
    return s;
  }
  /// Points not named in any cycle are fixed.
  static SystemSpec permutation(SpacePtr space, std::vector<std::vector<Index>> cycles,
                                std::string name = "permutation") {
    SystemSpec s(std::move(name), MapKind::permutation, std::move(space));
    s.cycles_ = std::move(cycles);
    s.validate();
    return s;
  }
  /// +1 adding machine on {0,1}^levels, carried from the first digit. The
  /// space must be cantor_space(levels); sorted index i reads its digits
  /// a_1..a_L from the most significant bit down, so the odometer adds one
  /// to the bit-reversed index.
  static SystemSpec odometer(SpacePtr space, int levels, std::string name = "odometer") {
    SystemSpec s(std::move(name), MapKind::odometer, std::move(space));
    s.levels_ = levels;
    s.validate();
    return s;
  }

  const std::string& name() const noexcept { return name_; }
  MapKind map() const noexcept { return map_; }
  const SpacePtr& space() const noexcept { return space_; }
  const FinitePhaseSpace& phase_space() const noexcept { return *space_; }
  double alpha() const noexcept { return alpha_; }
  double slope() const noexcept { return slope_; }
  int levels() const noexcept { return levels_; }
  const std::vector<std::vector<Index>>& cycles() const noexcept { return cycles_; }
  int step() const noexcept { return step_; }
  bool acts_on_indices() const noexcept { return !index_map_.empty(); }

  /// The system (X, f^n).
  SystemSpec power(int n) const {
    if (n < 1) throw error(errc::invalid_parameter, "iterate exponent must be >= 1");
    SystemSpec s = *this;
    s.step_ = step_ * n;
    s.name_ = name_ + "^" + std::to_string(n);
    return s;
  }

  /// Applies the base map once, in place.
  void apply_base(std::span<double> p) const {
    switch (map_) {
      case MapKind::rotation:
        for (double& c : p) c += alpha_;
        break;
      case MapKind::doubling:
        for (double& c : p) c *= 2.0;
        break;
      case MapKind::tent:
        for (double& c : p) c = slope_ * std::min(c, 1.0 - c);
        break;
      case MapKind::square:
        for (double& c : p) c *= c;
        break;
      case MapKind::identity:
      case MapKind::permutation:
      case MapKind::odometer:
        return;
    }
    space_->normalize(p);
  }

  /// f^iterations(x), where f is this system's step map.
  MapEvaluation evaluate(std::size_t x, std::size_t iterations) const {
    space_->check_index(x);
    MapEvaluation out;
    const std::size_t applications = iterations * static_cast<std::size_t>(step_);
    if (acts_on_indices()) {
      Index i = static_cast<Index>(x);
      for (std::size_t k = 0; k < applications; ++k) i = index_map_[i];
      auto pt = space_->point(i);
      out.image.assign(pt.begin(), pt.end());
      out.nearest_index = i;
      return out;
    }
    auto pt = space_->point(x);
    out.image.assign(pt.begin(), pt.end());
    if (map_ != MapKind::identity)
      for (std::size_t k = 0; k < applications; ++k) apply_base(out.image);
    out.nearest_index = space_->nearest_index(out.image);
    return out;
  }

  /// Continues an exact orbit: advances `p` by one step of this system.
  /// For index maps `at` tracks the current index.
  void advance(std::vector<double>& p, Index& at) const {
    if (acts_on_indices()) {
      for (int k = 0; k < step_; ++k) at = index_map_[at];
      auto pt = space_->point(at);
      p.assign(pt.begin(), pt.end());
      return;
    }
    if (map_ == MapKind::identity) return;
    for (int k = 0; k < step_; ++k) apply_base(p);
  }

 private:
  SystemSpec(std::string name, MapKind map, SpacePtr space)
      : name_(std::move(name)), map_(map), space_(std::move(space)) {
    if (!space_) throw error(errc::invalid_parameter, "system needs a phase space");
  }

  void validate() {
    const Geometry g = space_->geometry();
    switch (map_) {
      case MapKind::rotation:
        if (!wraps(g)) throw error(errc::validation, "map: rotation requires circle geometry");
        if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw error(errc::validation, "params.alpha: alpha out of range (0,1)");
        break;
      case MapKind::doubling:
        if (g == Geometry::discrete) throw error(errc::validation, "map: doubling requires a continuum geometry");
        break;
      case MapKind::tent:
        if (g == Geometry::discrete || space_->dimension() != 1)
          throw error(errc::validation, "map: tent requires a one-dimensional continuum geometry");
        if (!(slope_ > 0.0 && slope_ <= 2.0)) throw error(errc::validation, "params.slope: slope out of range (0,2]");
        break;
      case MapKind::square:
        if (g != Geometry::interval) throw error(errc::validation, "map: square requires interval geometry");
        break;
      case MapKind::identity:
        break;
      case MapKind::permutation: {
        if (g != Geometry::discrete) throw error(errc::validation, "map: permutation requires discrete geometry");
        const std::size_t n = space_->size();
        index_map_.resize(n);
        for (std::size_t i = 0; i < n; ++i) index_map_[i] = static_cast<Index>(i);
        std::vector<char> seen(n, 0);
        for (const auto& cyc : cycles_) {
          for (std::size_t k = 0; k < cyc.size(); ++k) {
            const Index a = cyc[k];
            if (a >= n) throw error(errc::validation, "params.cycles: index " + std::to_string(a) + " out of range");
            if (seen[a]) throw error(errc::validation, "params.cycles: index " + std::to_string(a) + " repeated");
            seen[a] = 1;
            index_map_[a] = cyc[(k + 1) % cyc.size()];
          }
        }
        break;
      }
      case MapKind::odometer: {
        if (g != Geometry::discrete) throw error(errc::validation, "map: odometer requires discrete geometry");
        if (levels_ < 1 || levels_ > 12) throw error(errc::validation, "params.levels: levels out of range 1..12");
        if (!(*space_ == cantor_space(levels_)))
          throw error(errc::validation, "space: odometer runs on the level-" + std::to_string(levels_) + " Cantor space");
        const std::size_t n = space_->size();
        index_map_.resize(n);
        auto reverse = [&](std::size_t v) {
          std::size_t r = 0;
          for (int b = 0; b < levels_; ++b) r |= ((v >> b) & 1u) << (levels_ - 1 - b);
          return r;
        };
        for (std::size_t i = 0; i < n; ++i) index_map_[i] = static_cast<Index>(reverse((reverse(i) + 1) % n));
        break;
      }
    }
  }

  std::string name_;
  MapKind map_;
  SpacePtr space_;
  double alpha_ = 0.0;
  double slope_ = 2.0;
  int levels_ = 0;
  std::vector<std::vector<Index>> cycles_;
  std::vector<Index> index_map_;
  int step_ = 1;
};

inline MapEvaluation evaluate(const SystemSpec& system, std::size_t x, std::size_t iterations) {
  return system.evaluate(x, iterations);
}

/// Whether two off-grid points are E-related: distances for scaled
/// relations, snapped membership for explicit ones.
inline bool points_related(const Entourage& e, std::span<const double> p, std::span<const double> q) {
  const auto& space = *e.space();
  if (e.scale()) return space.distance(p, q) <= *e.scale() + kTolerance;
  return e.contains(space.nearest_index(p), space.nearest_index(q));
}

/// Coarsest basis level D with (f×f)(D) ⊆ basis[level] over grid pairs.
/// The diagonal floor always qualifies, so this returns a value for every
/// well-formed basis.
inline std::optional<std::size_t> continuity_level(const SystemSpec& system, const UniformityBasis& basis,
                                                   std::size_t level) {
  require_same_space(system.space(), basis.space(), "continuity_level: basis lives on another space");
  const Entourage& target = basis[level];
  const std::size_t n = system.phase_space().size();
  std::vector<std::vector<double>> images(n);
  for (std::size_t x = 0; x < n; ++x) images[x] = system.evaluate(x, 1).image;
  for (std::size_t li = 0; li < basis.size(); ++li) {
    const Entourage& d = basis[li];
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x)
      for (Index y : d.row(x))
        if (!points_related(target, images[x], images[y])) {
          ok = false;
          break;
        }
    if (ok) return li;
  }
  return std::nullopt;
}

/// The standard catalog at size n: connected-grid systems, and for n a power
/// of two also discrete systems on the matching Cantor space.
inline std::vector<SystemSpec> catalog(std::size_t n) {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  auto interval = share(FinitePhaseSpace::interval_grid(n));
  auto circle = share(FinitePhaseSpace::circle_grid(n));
  std::vector<SystemSpec> out;
  out.push_back(SystemSpec::identity(interval, "identity"));
  out.push_back(SystemSpec::rotation(circle, golden, "rotation-golden"));
  out.push_back(SystemSpec::rotation(circle, 0.25, "rotation-quarter"));
  out.push_back(SystemSpec::doubling(circle, "doubling"));
  out.push_back(SystemSpec::tent(interval, 2.0, "tent"));
  out.push_back(SystemSpec::square(interval, "square"));
  if (n >= 2 && std::has_single_bit(n) && n <= 4096) {
    const int levels = std::countr_zero(n);
    auto cantor = share(cantor_space(levels));
    std::vector<std::vector<Index>> cycles;
    for (Index start = 0; start < n; start += 3) {
      std::vector<Index> cyc;
      for (Index k = start; k < std::min<std::size_t>(n, start + 3); ++k) cyc.push_back(k);
      cycles.push_back(std::move(cyc));
    }
    out.push_back(SystemSpec::permutation(cantor, std::move(cycles), "permutation"));
    out.push_back(SystemSpec::odometer(cantor, levels, "odometer"));
    out.push_back(SystemSpec::identity(cantor, "cantor-identity"));
  }
  return out;
}

}  // namespace uchain
