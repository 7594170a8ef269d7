#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "uchain/chain_graph.hpp"
#include "uchain/entourage.hpp"
#include "uchain/error.hpp"
#include "uchain/parallel.hpp"
#include "uchain/pseudo_orbit.hpp"
#include "uchain/systems.hpp"

namespace uchain {

struct ShadowReport {
  bool shadowed = false;
  /// Smallest grid point whose exact orbit stays E-close for the whole horizon.
  std::optional<Index> witness;
  std::size_t horizon = 0;
  std::string checked_entourage;
  /// For the best candidate (latest first failure, ties: smallest index),
  /// the first step i with (f^i(y), x_i) ∉ E.
  std::optional<std::size_t> failure_step;
  std::optional<Index> best_candidate;
};

/// Exhaustive search over grid points y (optionally masked) for one whose
/// exact orbit satisfies (f^i(y), x_i) ∈ E for i = 0..T.
inline ShadowReport find_shadow_point(const PseudoOrbit& orbit, const Entourage& e, const SystemSpec& system,
                                      const std::vector<char>& candidates = {}) {
  require_same_space(system.space(), e.space(), "find_shadow_point: entourage lives on another space");
  const auto& space = system.phase_space();
  const std::size_t n = space.size();
  const std::size_t horizon = orbit.length();
  constexpr std::size_t kSurvives = static_cast<std::size_t>(-1);
  constexpr std::size_t kExcluded = static_cast<std::size_t>(-2);
  std::vector<std::size_t> first_failure(n, kExcluded);
  parallel_for(n, [&](std::size_t y) {
    if (!candidates.empty() && !candidates[y]) return;
    auto pt = space.point(y);
    std::vector<double> p(pt.begin(), pt.end());
    Index at = static_cast<Index>(y);
    for (std::size_t i = 0; i <= horizon; ++i) {
      if (!e.relates(p, orbit.states[i])) {
        first_failure[y] = i;
        return;
      }
      if (i < horizon) system.advance(p, at);
    }
    first_failure[y] = kSurvives;
  });

  ShadowReport report;
  report.horizon = horizon;
  report.checked_entourage = e.label();
  for (std::size_t y = 0; y < n; ++y) {
    if (first_failure[y] == kSurvives) {
      report.shadowed = true;
      report.witness = static_cast<Index>(y);
      return report;
    }
    if (first_failure[y] == kExcluded) continue;
    if (!report.failure_step || first_failure[y] > *report.failure_step) {
      report.failure_step = first_failure[y];
      report.best_candidate = static_cast<Index>(y);
    }
  }
  return report;
}

struct LevelOutcome {
  std::size_t level = 0;
  std::string label;
  std::optional<double> scale;
  /// Pseudo-orbits checked before the scan moved on (both modes count).
  std::size_t orbits_checked = 0;
  std::size_t failures = 0;
  /// Restricted runs: chains that left the allowed set and were dropped.
  std::size_t discarded = 0;
  /// No pseudo-orbit of the requested length exists in the allowed set.
  bool skipped = false;
};

/// Sampled evidence for a shadowing modulus. A found level means every
/// sampled D-pseudo-orbit was E-shadowed; it is never a proof.
struct ShadowingEstimate {
  std::string system;
  std::string target;
  std::size_t trials = 0;
  std::size_t length = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> modulus_level;
  std::optional<std::string> modulus_label;
  std::optional<double> modulus_scale;
  std::vector<LevelOutcome> scanned;
  std::optional<PseudoOrbit> counterexample;
  std::optional<ShadowReport> counterexample_report;

  bool found() const noexcept { return modulus_level.has_value(); }
};

struct ShadowingOptions {
  /// Pseudo-orbit states and candidate shadows are restricted to this set
  /// (empty: the whole space).
  std::vector<char> restrict_to;
};

/// Levels worth scanning: the diagonal floor is excluded, and on sampled
/// continua levels finer than the grid spacing are excluded because their
/// pseudo-orbits are artifacts of the sampling.
inline std::vector<std::size_t> scan_levels(const UniformityBasis& basis) {
  const auto& space = *basis.space();
  const bool continuum = space.geometry() != Geometry::discrete;
  std::vector<std::size_t> out;
  for (std::size_t li = 0; li < basis.size(); ++li) {
    const Entourage& d = basis[li];
    if (li + 1 == basis.size() && d.is_diagonal()) continue;
    if (continuum && d.scale() && *d.scale() + kTolerance < space.resolution()) continue;
    out.push_back(li);
  }
  return out;
}

/// Scans basis levels from coarse to fine; for each, checks `trials`
/// drift and uniform pseudo-orbits of `length` steps. Returns the coarsest
/// level with no failures, or none with the finest level's counterexample.
inline ShadowingEstimate estimate_shadowing_modulus(const SystemSpec& system, const Entourage& e,
                                                    const UniformityBasis& basis, std::size_t trials,
                                                    std::size_t length, std::uint64_t seed,
                                                    const ShadowingOptions& options = {}) {
  require_same_space(system.space(), e.space(), "estimate_shadowing_modulus: target lives on another space");
  require_same_space(system.space(), basis.space(), "estimate_shadowing_modulus: basis lives on another space");
  if (trials < 1) throw error(errc::invalid_parameter, "trials must be >= 1");
  ShadowingEstimate est;
  est.system = system.name();
  est.target = e.label();
  est.trials = trials;
  est.length = length;
  est.seed = seed;
  const bool restricted = !options.restrict_to.empty();
  for (std::size_t li : scan_levels(basis)) {
    const Entourage& d = basis[li];
    LevelOutcome outcome{li, d.label(), d.scale()};
    for (std::size_t t = 0; t < trials && outcome.failures == 0; ++t) {
      for (OrbitMode mode : {OrbitMode::adversarial_drift, OrbitMode::uniform}) {
        OrbitOptions oo;
        oo.allowed = options.restrict_to;
        std::optional<PseudoOrbit> orbit;
        try {
          orbit = generate_pseudo_orbit(system, d, length, derive_seed(seed, li, t, static_cast<std::uint64_t>(mode)),
                                        mode, oo);
        } catch (const error& err) {
          if (!restricted || err.code() != errc::discretization_too_coarse) throw;
          ++outcome.discarded;
          continue;
        }
        auto report = find_shadow_point(*orbit, e, system, options.restrict_to);
        ++outcome.orbits_checked;
        if (!report.shadowed) {
          ++outcome.failures;
          est.counterexample = std::move(*orbit);
          est.counterexample_report = std::move(report);
          break;
        }
      }
    }
    outcome.skipped = outcome.orbits_checked == 0;
    est.scanned.push_back(outcome);
    if (!outcome.skipped && outcome.failures == 0) {
      est.modulus_level = li;
      est.modulus_label = d.label();
      est.modulus_scale = d.scale();
      est.counterexample.reset();
      est.counterexample_report.reset();
      break;
    }
  }
  return est;
}

struct IterateConsistency {
  std::size_t exponent = 1;
  ShadowingEstimate base;
  ShadowingEstimate iterate;
  bool agree() const noexcept { return base.found() == iterate.found(); }
};

/// Runs the modulus estimate for f and for f^n (exact n-fold images) and
/// compares the found/none outcomes.
inline IterateConsistency iterate_shadowing_check(const SystemSpec& system, const Entourage& e,
                                                  const UniformityBasis& basis, int n, std::size_t trials,
                                                  std::size_t length, std::uint64_t seed) {
  if (n < 1) throw error(errc::invalid_parameter, "iterate exponent must be >= 1");
  IterateConsistency out;
  out.exponent = static_cast<std::size_t>(n);
  out.base = estimate_shadowing_modulus(system, e, basis, trials, length, seed);
  out.iterate = estimate_shadowing_modulus(system.power(n), e, basis, trials, length, seed);
  return out;
}

struct IsobasismLevel {
  std::string label;
  bool preserved = false;
  /// A pair whose membership changes under f×f.
  std::optional<std::pair<Index, Index>> violation;
};

struct IsobasismReport {
  /// True when f maps the grid bijectively onto itself and membership was
  /// compared on grid indices; otherwise distances were compared with a
  /// 1e-9 slack.
  bool exact = false;
  std::vector<IsobasismLevel> levels;
  bool all_preserved() const {
    for (const auto& l : levels)
      if (!l.preserved) return false;
    return true;
  }
};

/// Per level V: (x,y) ∈ V ⟺ (f(x), f(y)) ∈ V over all grid pairs.
inline IsobasismReport isobasism_check(const SystemSpec& system, const UniformityBasis& basis) {
  require_same_space(system.space(), basis.space(), "isobasism_check: basis lives on another space");
  const auto& space = system.phase_space();
  const std::size_t n = space.size();
  std::vector<std::vector<double>> img(n);
  std::vector<Index> snapped(n);
  bool bijective = true;
  std::vector<char> hit(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    auto ev = system.evaluate(x, 1);
    img[x] = std::move(ev.image);
    snapped[x] = ev.nearest_index;
    if (space.distance(img[x], space.point(snapped[x])) > kTolerance || hit[snapped[x]]) bijective = false;
    hit[snapped[x]] = 1;
  }
  IsobasismReport report;
  report.exact = bijective;
  for (const Entourage& v : basis.levels()) {
    IsobasismLevel lvl{v.label(), true, std::nullopt};
    for (std::size_t x = 0; x < n && lvl.preserved; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        bool mismatch;
        if (bijective || !v.scale()) {
          mismatch = v.contains(x, y) != v.contains(snapped[x], snapped[y]);
        } else {
          const double s = *v.scale();
          const double d1 = space.distance(x, y);
          const double d2 = space.distance(img[x], img[y]);
          mismatch = ((d1 <= s + kTolerance) != (d2 <= s + kTolerance)) && std::fabs(d1 - d2) > kTolerance;
        }
        if (mismatch) {
          lvl.preserved = false;
          lvl.violation = std::make_pair(static_cast<Index>(x), static_cast<Index>(y));
          break;
        }
      }
    report.levels.push_back(std::move(lvl));
  }
  return report;
}

struct DichotomyReport {
  double scale = 0.0;
  std::size_t components = 0;
  bool connected_at_scale = false;
  bool totally_disconnected_at_scale = false;
  /// Minimum pairwise distance of the model (infinite for one point).
  double gap = 0.0;
  ShadowingEstimate shadowing;
  /// Shadowing found ⟺ totally disconnected at scale.
  bool agreement = false;
};

/// Components of the e-relation graph via union-find.
inline std::vector<Index> relation_components(const Entourage& e, std::size_t* count = nullptr) {
  const std::size_t n = e.size();
  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t x = 0; x < n; ++x)
    for (Index y : e.row(x)) {
      Index a = find(static_cast<Index>(x)), b = find(y);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<Index> label(n);
  std::vector<long> rename(n, -1);
  std::size_t k = 0;
  for (std::size_t x = 0; x < n; ++x) {
    const Index r = find(static_cast<Index>(x));
    if (rename[r] < 0) rename[r] = static_cast<long>(k++);
    label[x] = static_cast<Index>(rename[r]);
  }
  if (count) *count = k;
  return label;
}

/// Compares the connectivity of the finite model at e's scale with the
/// shadowing outcome of the identity map on it.
inline DichotomyReport disconnectedness_dichotomy(const SpacePtr& space, const Entourage& e,
                                                  const UniformityBasis& basis, std::size_t trials,
                                                  std::size_t length, std::uint64_t seed) {
  require_same_space(space, e.space(), "disconnectedness_dichotomy: entourage lives on another space");
  DichotomyReport r;
  r.scale = e.scale().value_or(0.0);
  relation_components(e, &r.components);
  r.connected_at_scale = r.components == 1;
  r.totally_disconnected_at_scale = r.components == space->size();
  r.gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < space->size(); ++i)
    for (std::size_t j = i + 1; j < space->size(); ++j) r.gap = std::min(r.gap, space->distance(i, j));
  const auto identity = SystemSpec::identity(space, "identity");
  r.shadowing = estimate_shadowing_modulus(identity, e, basis, trials, length, seed);
  r.agreement = r.shadowing.found() == r.totally_disconnected_at_scale;
  return r;
}

}  // namespace uchain
