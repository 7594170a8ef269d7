#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uchain/chain_graph.hpp"
#include "uchain/entourage.hpp"
#include "uchain/error.hpp"
#include "uchain/parallel.hpp"
#include "uchain/shadowing.hpp"
#include "uchain/systems.hpp"

namespace uchain {

inline constexpr Index kOffGrid = std::numeric_limits<Index>::max();

/// Snapped exact orbits: at(x, t) is the grid index within h/2 of f^t(x)
/// (nearest index, ties to the smaller one), or kOffGrid when no grid point
/// is that close. Every return-time computation reads from one of these.
class OrbitTable {
 public:
  OrbitTable(const SystemSpec& system, std::size_t horizon, const std::vector<Index>& sources = {})
      : horizon_(horizon), n_(system.phase_space().size()) {
    const auto& space = system.phase_space();
    const double tol = space.resolution() / 2.0 + kTolerance;
    rows_.assign(n_, {});
    std::vector<Index> todo = sources;
    if (todo.empty())
      for (std::size_t x = 0; x < n_; ++x) todo.push_back(static_cast<Index>(x));
    for (Index x : todo) space.check_index(x);
    parallel_for(todo.size(), [&](std::size_t k) {
      const Index x = todo[k];
      auto& row = rows_[x];
      row.resize(horizon + 1);
      auto pt = space.point(x);
      std::vector<double> p(pt.begin(), pt.end());
      Index at = x;
      for (std::size_t t = 0; t <= horizon; ++t) {
        const Index near = system.acts_on_indices() ? at : space.nearest_index(p);
        row[t] = space.distance(p, space.point(near)) <= tol ? near : kOffGrid;
        if (t < horizon) system.advance(p, at);
      }
    });
  }

  std::size_t horizon() const noexcept { return horizon_; }
  Index at(std::size_t x, std::size_t t) const {
    const auto& row = rows_.at(x);
    if (row.empty()) throw error(errc::out_of_range, "orbit of point " + std::to_string(x) + " was not tabulated");
    return row.at(t);
  }

 private:
  std::size_t horizon_;
  std::size_t n_;
  std::vector<std::vector<Index>> rows_;
};

enum class ReturnKind { point_in_set, set_to_set };

struct ReturnTimeSet {
  std::vector<std::size_t> times;
  std::size_t horizon = 0;
  ReturnKind kind = ReturnKind::set_to_set;
};

namespace detail {

inline std::vector<char> index_mask(const FinitePhaseSpace& space, const std::vector<Index>& set, const char* what) {
  if (set.empty()) throw error(errc::invalid_parameter, std::string(what) + " must be non-empty");
  std::vector<char> mask(space.size(), 0);
  for (Index i : set) {
    space.check_index(i);
    mask[i] = 1;
  }
  return mask;
}

}  // namespace detail

/// N_f(U,V) ∩ [0, horizon] from a precomputed table covering every point of u.
inline ReturnTimeSet return_times(const OrbitTable& table, const FinitePhaseSpace& space, const std::vector<Index>& u,
                                  const std::vector<Index>& v) {
  detail::index_mask(space, u, "u");
  const auto in_v = detail::index_mask(space, v, "v");
  ReturnTimeSet r;
  r.horizon = table.horizon();
  for (std::size_t t = 0; t <= table.horizon(); ++t)
    for (Index y : u) {
      const Index s = table.at(y, t);
      if (s != kOffGrid && in_v[s]) {
        r.times.push_back(t);
        break;
      }
    }
  return r;
}

/// N_f(U,V) = {n : U ∩ f^-n(V) ≠ ∅} for n <= horizon.
inline ReturnTimeSet return_times(const SystemSpec& system, const std::vector<Index>& u, const std::vector<Index>& v,
                                  std::size_t horizon) {
  if (horizon < 1) throw error(errc::invalid_parameter, "horizon must be >= 1");
  detail::index_mask(system.phase_space(), u, "u");
  const OrbitTable table(system, horizon, u);
  return return_times(table, system.phase_space(), u, v);
}

/// N_f(x,U) = {n : f^n(x) ∈ U} for n <= horizon.
inline ReturnTimeSet point_return_times(const SystemSpec& system, Index x, const std::vector<Index>& u,
                                        std::size_t horizon) {
  auto r = return_times(system, {x}, u, horizon);
  r.kind = ReturnKind::point_in_set;
  return r;
}

/// Finite-scale outer approximation of Ω(f): points x whose ball U = E[x]
/// meets f^-n(U) for some 1 <= n <= horizon.
inline std::vector<Index> nonwandering_points(const SystemSpec& system, const Entourage& scale, std::size_t horizon,
                                              const OrbitTable* table = nullptr) {
  require_same_space(system.space(), scale.space(), "nonwandering_points: entourage lives on another space");
  if (horizon < 1) throw error(errc::invalid_parameter, "horizon must be >= 1");
  std::optional<OrbitTable> own;
  if (!table || table->horizon() < horizon) {
    own.emplace(system, horizon);
    table = &*own;
  }
  const std::size_t n = system.phase_space().size();
  std::vector<char> keep(n, 0);
  parallel_for(n, [&](std::size_t x) {
    const auto ball = scale.row(x);
    std::vector<char> in_ball(n, 0);
    for (Index y : ball) in_ball[y] = 1;
    for (Index y : ball)
      for (std::size_t t = 1; t <= horizon; ++t) {
        const Index s = table->at(y, t);
        if (s != kOffGrid && in_ball[s]) {
          keep[x] = 1;
          return;
        }
      }
  });
  std::vector<Index> out;
  for (std::size_t x = 0; x < n; ++x)
    if (keep[x]) out.push_back(static_cast<Index>(x));
  return out;
}

enum class ReturnClass { empty, finite_only, syndetic_window, thick_window, contains_kN };

constexpr std::string_view return_class_name(ReturnClass c) noexcept {
  switch (c) {
    case ReturnClass::empty: return "empty";
    case ReturnClass::finite_only: return "finite-only";
    case ReturnClass::syndetic_window: return "syndetic-window";
    case ReturnClass::thick_window: return "thick-window";
    case ReturnClass::contains_kN: return "contains-kN";
  }
  return "unknown";
}

/// Window-bounded classification; every flag holds "at horizon H" only.
struct ReturnClassification {
  ReturnClass label = ReturnClass::empty;
  std::size_t horizon = 0;
  /// Largest gap between consecutive times (counting the tail up to H),
  /// when it is at most H/4.
  std::optional<std::size_t> syndetic_k;
  /// Longest run of consecutive times reaches floor(sqrt(H)).
  bool thick = false;
  /// Smallest k <= H/4 whose multiples up to H all occur.
  std::optional<std::size_t> contains_k;
};

inline ReturnClassification classify_return_set(const ReturnTimeSet& r) {
  ReturnClassification c;
  c.horizon = r.horizon;
  const auto& t = r.times;
  if (t.empty()) return c;
  c.label = ReturnClass::finite_only;
  const std::size_t H = r.horizon;
  if (t.size() >= 2) {
    std::size_t gap = H - t.back();
    for (std::size_t i = 1; i < t.size(); ++i) gap = std::max(gap, t[i] - t[i - 1]);
    gap = std::max(gap, t.front());
    if (gap >= 1 && gap <= H / 4) c.syndetic_k = gap;
  }
  std::size_t run = 1, longest = 1;
  for (std::size_t i = 1; i < t.size(); ++i) {
    run = t[i] == t[i - 1] + 1 ? run + 1 : 1;
    longest = std::max(longest, run);
  }
  const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(H))));
  c.thick = root >= 2 && longest >= root;
  std::vector<char> present(H + 1, 0);
  for (auto v : t)
    if (v <= H) present[v] = 1;
  for (std::size_t k = 1; k <= H / 4 && !c.contains_k; ++k) {
    bool all = true;
    for (std::size_t m = 0; m <= H && all; m += k) all = present[m] != 0;
    if (all) c.contains_k = k;
  }
  if (c.syndetic_k) c.label = ReturnClass::syndetic_window;
  if (c.thick) c.label = ReturnClass::thick_window;
  if (c.contains_k) c.label = ReturnClass::contains_kN;
  return c;
}

/// Least n >= 1 in N_f(U,U) ∩ N_f(U,V) within the horizon.
inline std::optional<std::size_t> weak_mixing_witness(const SystemSpec& system, const std::vector<Index>& u,
                                                      const std::vector<Index>& v, std::size_t horizon) {
  const auto uu = return_times(system, u, u, horizon);
  const auto uv = return_times(system, u, v, horizon);
  for (std::size_t t : uu.times)
    if (t >= 1 && std::binary_search(uv.times.begin(), uv.times.end(), t)) return t;
  return std::nullopt;
}

/// Grid points within h/2 of some f^n(x), transient <= n <= horizon: a
/// finite-horizon outer estimate of ω(x, f).
inline std::vector<Index> omega_limit(const SystemSpec& system, Index x, std::size_t transient, std::size_t horizon) {
  if (transient >= horizon) throw error(errc::invalid_parameter, "transient must be smaller than horizon");
  const OrbitTable table(system, horizon, {x});
  std::vector<char> seen(system.phase_space().size(), 0);
  for (std::size_t t = transient; t <= horizon; ++t) {
    const Index s = table.at(x, t);
    if (s != kOffGrid) seen[s] = 1;
  }
  std::vector<Index> out;
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(static_cast<Index>(i));
  return out;
}

struct OmegaRestrictionReport {
  std::vector<Index> omega_hat;
  /// Mutual-reachability classes of the D-graph restricted to Ω̂.
  std::vector<std::vector<Index>> classes;
  /// Per class: the induced subgraph is strongly connected and carries a cycle.
  std::vector<bool> class_has_cycle;
  std::string class_entourage;
  ShadowingEstimate full;
  ShadowingEstimate restricted;
  bool agreement() const noexcept { return full.found() == restricted.found(); }
};

/// Compares the shadowing outcome on the whole space with the outcome for
/// pseudo-orbits and shadows confined to Ω̂.
inline OmegaRestrictionReport omega_restriction_shadowing(const SystemSpec& system, const Entourage& e,
                                                          const UniformityBasis& basis, std::size_t horizon,
                                                          std::size_t trials, std::size_t length, std::uint64_t seed) {
  OmegaRestrictionReport r;
  r.omega_hat = nonwandering_points(system, e, horizon);
  if (r.omega_hat.empty()) throw error(errc::no_nonwandering_points, "no non-wandering points at " + e.label());
  r.full = estimate_shadowing_modulus(system, e, basis, trials, length, seed);
  ShadowingOptions opts;
  opts.restrict_to.assign(system.phase_space().size(), 0);
  for (Index x : r.omega_hat) opts.restrict_to[x] = 1;
  r.restricted = estimate_shadowing_modulus(system, e, basis, trials, length, seed, opts);

  const Entourage& d = r.restricted.found()  ? basis[*r.restricted.modulus_level]
                       : r.full.found()      ? basis[*r.full.modulus_level]
                                             : e;
  r.class_entourage = d.label();
  const auto sub = build_transition_graph(system, d).induced(r.omega_hat);
  const auto comps = strongly_connected_components(sub);
  for (std::size_t c = 0; c < comps.count(); ++c) {
    std::vector<Index> cls;
    for (Index v : comps.members[c]) cls.push_back(r.omega_hat[v]);
    r.classes.push_back(std::move(cls));
    r.class_has_cycle.push_back(graph_period(sub, comps, c) > 0);
  }
  return r;
}

}  // namespace uchain
