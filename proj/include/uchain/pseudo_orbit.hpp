#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uchain/entourage.hpp"
#include "uchain/error.hpp"
#include "uchain/systems.hpp"

namespace uchain {

enum class OrbitMode { uniform, adversarial_drift };

constexpr std::string_view mode_name(OrbitMode m) noexcept {
  return m == OrbitMode::uniform ? "uniform" : "adversarial-drift";
}

/// A finite (D, f)-chain x_0..x_T. `images[i]` is the exact f(x_i) the
/// step was drawn around, and `states[i+1]` the index chosen within D[f(x_i)].
struct PseudoOrbit {
  std::vector<Index> states;
  std::vector<std::vector<double>> images;
  std::string system;
  std::string entourage_label;
  std::uint64_t seed = 0;
  OrbitMode mode = OrbitMode::uniform;

  std::size_t length() const noexcept { return states.empty() ? 0 : states.size() - 1; }
  Index chosen(std::size_t step) const { return states.at(step + 1); }
};

/// SplitMix64 finaliser; derives independent per-trial seeds so results do
/// not depend on scheduling order.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b) ^ c);
}

/// Uniform draw from [0, bound) by rejection; portable across standard libraries.
inline std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do r = rng();
  while (r >= limit);
  return r % bound;
}

struct OrbitOptions {
  /// Start index; drawn from the seed when absent.
  std::optional<Index> start;
  /// Restricts states to points with allowed[i] != 0 (empty: all points).
  std::vector<char> allowed;
};

/// Uniform mode draws x_{i+1} uniformly from D[f(x_i)]. Drift mode walks
/// towards the point farthest from x_0, taking the legal successor closest
/// to it (ties: smallest index).
inline PseudoOrbit generate_pseudo_orbit(const SystemSpec& system, const Entourage& d, std::size_t length,
                                         std::uint64_t seed, OrbitMode mode, const OrbitOptions& options = {}) {
  require_same_space(system.space(), d.space(), "generate_pseudo_orbit: entourage lives on another space");
  if (length < 1) throw error(errc::invalid_parameter, "pseudo-orbit length must be >= 1");
  const auto& space = system.phase_space();
  const std::size_t n = space.size();
  auto allowed = [&](std::size_t i) { return options.allowed.empty() || options.allowed[i] != 0; };

  std::vector<Index> pool;
  for (std::size_t i = 0; i < n; ++i)
    if (allowed(i)) pool.push_back(static_cast<Index>(i));
  if (pool.empty()) throw error(errc::invalid_parameter, "no admissible start point");

  std::mt19937_64 rng(mix_seed(seed));
  PseudoOrbit orbit;
  orbit.system = system.name();
  orbit.entourage_label = d.label();
  orbit.seed = seed;
  orbit.mode = mode;
  Index x = options.start ? *options.start : pool[draw_below(rng, pool.size())];
  space.check_index(x);
  orbit.states.push_back(x);

  Index target = x;
  if (mode == OrbitMode::adversarial_drift) {
    double far = -1.0;
    for (Index y : pool) {
      const double dist = space.distance(x, y);
      if (dist > far) {
        far = dist;
        target = y;
      }
    }
  }

  std::vector<Index> legal;
  for (std::size_t step = 0; step < length; ++step) {
    auto img = system.evaluate(x, 1);
    legal.clear();
    if (d.scale()) {
      for (Index y : pool)
        if (d.relates(img.image, y)) legal.push_back(y);
    } else {
      for (Index y : d.row(img.nearest_index))
        if (allowed(y)) legal.push_back(y);
    }
    if (legal.empty())
      throw error(errc::discretization_too_coarse,
                  "no successor of point " + std::to_string(x) + " within " + d.label() + " at step " +
                      std::to_string(step));
    Index next = legal.front();
    if (mode == OrbitMode::uniform) {
      next = legal[draw_below(rng, legal.size())];
    } else {
      double best = space.distance(next, target);
      for (Index y : legal) {
        const double dist = space.distance(y, target);
        if (dist < best) {
          best = dist;
          next = y;
        }
      }
    }
    orbit.images.push_back(std::move(img.image));
    orbit.states.push_back(next);
    x = next;
  }
  return orbit;
}

/// Re-checks (f(x_i), x_{i+1}) ∈ D at every step.
inline bool is_valid_pseudo_orbit(const SystemSpec& system, const Entourage& d, const PseudoOrbit& orbit) {
  for (std::size_t i = 0; i + 1 < orbit.states.size(); ++i)
    if (!d.relates(system.evaluate(orbit.states[i], 1).image, orbit.states[i + 1])) return false;
  return true;
}

/// Plain-text record:
///   # uchain pseudo-orbit v1
///   system <name>
///   entourage <label>
///   seed <seed>
///   mode <uniform|adversarial-drift>
///   steps <T>
///   <index> <image coordinates...> <chosen index>     (T lines)
inline void write_pseudo_orbit(std::ostream& out, const PseudoOrbit& orbit) {
  out << "# uchain pseudo-orbit v1\n";
  out << "system " << orbit.system << "\n";
  out << "entourage " << orbit.entourage_label << "\n";
  out << "seed " << orbit.seed << "\n";
  out << "mode " << mode_name(orbit.mode) << "\n";
  out << "steps " << orbit.length() << "\n";
  char buf[40];
  for (std::size_t i = 0; i < orbit.length(); ++i) {
    out << orbit.states[i];
    for (double c : orbit.images.at(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      out << ' ' << buf;
    }
    out << ' ' << orbit.states[i + 1] << "\n";
  }
}

inline PseudoOrbit read_pseudo_orbit(std::istream& in) {
  auto fail = [](std::size_t line, const std::string& msg) -> PseudoOrbit {
    throw error(errc::malformed_spec, "pseudo-orbit line " + std::to_string(line) + ": " + msg);
  };
  PseudoOrbit orbit;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> steps;
  auto header = [&](std::string_view key) -> std::string {
    ++lineno;
    if (!std::getline(in, line)) fail(lineno, "missing '" + std::string(key) + "' header");
    if (line.rfind(key, 0) != 0 || line.size() <= key.size() || line[key.size()] != ' ')
      fail(lineno, "expected '" + std::string(key) + " <value>'");
    return line.substr(key.size() + 1);
  };
  ++lineno;
  if (!std::getline(in, line) || line != "# uchain pseudo-orbit v1") fail(lineno, "bad magic line");
  orbit.system = header("system");
  orbit.entourage_label = header("entourage");
  try {
    orbit.seed = std::stoull(header("seed"));
    const std::string mode = header("mode");
    if (mode == "uniform")
      orbit.mode = OrbitMode::uniform;
    else if (mode == "adversarial-drift")
      orbit.mode = OrbitMode::adversarial_drift;
    else
      fail(lineno, "unknown mode '" + mode + "'");
    steps = std::stoull(header("steps"));
  } catch (const std::logic_error&) {
    fail(lineno, "expected an unsigned integer");
  }
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < *steps; ++i) {
    ++lineno;
    if (!std::getline(in, line)) fail(lineno, "truncated record");
    std::istringstream row(line);
    std::vector<double> fields;
    std::string tok;
    while (row >> tok) {
      try {
        fields.push_back(std::stod(tok));
      } catch (const std::logic_error&) {
        fail(lineno, "bad number '" + tok + "'");
      }
    }
    if (fields.size() < 3) fail(lineno, "expected '<index> <coords...> <chosen>'");
    if (dim && *dim != fields.size() - 2) fail(lineno, "inconsistent coordinate count");
    dim = fields.size() - 2;
    const auto idx = static_cast<Index>(fields.front());
    const auto chosen = static_cast<Index>(fields.back());
    if (i == 0)
      orbit.states.push_back(idx);
    else if (orbit.states.back() != idx)
      fail(lineno, "index does not continue the previous step");
    orbit.images.emplace_back(fields.begin() + 1, fields.end() - 1);
    orbit.states.push_back(chosen);
  }
  return orbit;
}

}  // namespace uchain
