#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "uchain/error.hpp"

namespace uchain {

/// Generators a_1 < ... < a_k of a numerical semigroup (positive, deduplicated).
class GeneratorSet {
 public:
  static constexpr std::uint64_t kMaxGenerator = 10'000;

  GeneratorSet(std::initializer_list<std::uint64_t> gens) : GeneratorSet(std::vector<std::uint64_t>(gens)) {}

  explicit GeneratorSet(std::vector<std::uint64_t> gens) : gens_(std::move(gens)) {
    if (gens_.empty()) throw error(errc::invalid_parameter, "generator set must be non-empty");
    std::sort(gens_.begin(), gens_.end());
    gens_.erase(std::unique(gens_.begin(), gens_.end()), gens_.end());
    if (gens_.front() < 1) throw error(errc::invalid_parameter, "generators must be >= 1");
    if (gens_.back() > kMaxGenerator)
      throw error(errc::resource_limit, "generator " + std::to_string(gens_.back()) + " exceeds " +
                                            std::to_string(kMaxGenerator));
  }

  const std::vector<std::uint64_t>& values() const noexcept { return gens_; }
  std::uint64_t min() const noexcept { return gens_.front(); }
  std::uint64_t max() const noexcept { return gens_.back(); }

 private:
  std::vector<std::uint64_t> gens_;
};

inline std::uint64_t gcd_set(const GeneratorSet& g) {
  std::uint64_t acc = 0;
  for (auto a : g.values()) acc = std::gcd(acc, a);
  return acc;
}

/// Whether s is a non-negative integer combination of the generators.
inline bool representable(std::uint64_t s, const GeneratorSet& g) {
  if (s > 100'000'000) throw error(errc::resource_limit, "representability query above 1e8");
  std::vector<char> reach(s + 1, 0);
  reach[0] = 1;
  for (std::uint64_t v = 1; v <= s; ++v)
    for (auto a : g.values()) {
      if (a > v) break;
      if (reach[v - a]) {
        reach[v] = 1;
        break;
      }
    }
  return reach[s] != 0;
}

/// Least N such that every s >= N is representable (Frobenius number + 1).
/// Found by scanning until min(g) consecutive values are representable;
/// from there every larger value follows by adding min(g).
inline std::uint64_t frobenius_bound(const GeneratorSet& g) {
  if (gcd_set(g) != 1) throw error(errc::not_coprime, "generators have gcd " + std::to_string(gcd_set(g)));
  constexpr std::uint64_t kSearchCap = 100'000'000;
  const std::uint64_t window = g.max() + 1;
  std::vector<char> ring(window, 0);  // ring[v % window] == representable(v)
  std::uint64_t run = 0;
  for (std::uint64_t v = 0; v <= kSearchCap; ++v) {
    bool rep = v == 0;
    for (auto a : g.values()) {
      if (a > v || rep) break;
      rep = ring[(v - a) % window] != 0;
    }
    ring[v % window] = rep ? 1 : 0;
    run = rep ? run + 1 : 0;
    if (run == g.min()) return v + 1 - run;
  }
  throw error(errc::resource_limit, "Frobenius bound search exceeded 1e8");
}

/// M + N: chains of every length above this exist from a vertex carrying
/// loops with the generator lengths to every vertex within distance M.
/// Between arbitrary pairs, route through that vertex and pass M = 2 * diameter.
inline std::uint64_t realizable_length_bound(const GeneratorSet& cycle_lengths, std::uint64_t diameter) {
  if (diameter < 1) throw error(errc::invalid_parameter, "diameter must be >= 1");
  return diameter + frobenius_bound(cycle_lengths);
}

}  // namespace uchain
