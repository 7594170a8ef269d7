#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uchain/error.hpp"
#include "uchain/space.hpp"

namespace uchain {

/// A relation on the point indices of one FinitePhaseSpace, stored as
/// sorted per-row index sets. Relations built through the named
/// constructors contain the diagonal and are symmetric; `from_rows_unchecked`
/// exists so that axiom violations can be represented and reported.
class Entourage {
 public:
  /// {(x,y) : dist(x,y) <= eps}. The comparison is closed so grid
  /// neighbours exactly eps apart are related.
  static Entourage epsilon(SpacePtr space, double eps, std::string label = {}) {
    if (!(eps > 0.0) || !std::isfinite(eps))
      throw error(errc::invalid_parameter, "epsilon must be positive, got " + std::to_string(eps));
    return by_distance(std::move(space), eps, label.empty() ? "eps=" + format_scale(eps) : std::move(label));
  }

  /// The diagonal, carrying scale 0 so distance-based consumers treat it
  /// as "equal up to kTolerance".
  static Entourage diagonal(SpacePtr space, std::string label = "diagonal") {
    const std::size_t n = space->size();
    std::vector<std::vector<Index>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = {static_cast<Index>(i)};
    return Entourage(std::move(space), std::move(rows), std::move(label), 0.0);
  }

  static Entourage complete(SpacePtr space, std::string label = "complete") {
    const std::size_t n = space->size();
    std::vector<Index> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Index>(i);
    std::vector<std::vector<Index>> rows(n, all);
    return Entourage(std::move(space), std::move(rows), std::move(label), std::nullopt);
  }

  /// Explicit relation closed under the diagonal and transposition.
  static Entourage from_pairs(SpacePtr space, const std::vector<std::pair<Index, Index>>& pairs,
                              std::string label) {
    const std::size_t n = space->size();
    std::vector<std::vector<Index>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i].push_back(static_cast<Index>(i));
    for (auto [x, y] : pairs) {
      space->check_index(x);
      space->check_index(y);
      rows[x].push_back(y);
      rows[y].push_back(x);
    }
    for (auto& r : rows) sort_unique(r);
    return Entourage(std::move(space), std::move(rows), std::move(label), std::nullopt);
  }

  /// Rows taken as given (sorted and deduplicated, indices validated).
  static Entourage from_rows_unchecked(SpacePtr space, std::vector<std::vector<Index>> rows, std::string label) {
    if (rows.size() != space->size()) throw error(errc::invalid_parameter, "row count must equal space size");
    for (auto& r : rows) {
      for (Index y : r) space->check_index(y);
      sort_unique(r);
    }
    return Entourage(std::move(space), std::move(rows), std::move(label), std::nullopt);
  }

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::string& label() const noexcept { return label_; }
  /// The epsilon that generated this relation; none for explicit ones.
  std::optional<double> scale() const noexcept { return scale_; }

  std::span<const Index> row(std::size_t x) const {
    space_->check_index(x);
    return rows_[x];
  }

  bool contains(std::size_t x, std::size_t y) const {
    const auto& r = rows_.at(x);
    return std::binary_search(r.begin(), r.end(), static_cast<Index>(y));
  }

  /// Whether an arbitrary (possibly off-grid) point p is related to grid
  /// point y. Scaled relations compare distances; explicit relations snap
  /// p to its nearest grid index first.
  bool relates(std::span<const double> p, std::size_t y) const {
    if (scale_) return space_->distance(p, space_->point(y)) <= *scale_ + kTolerance;
    return contains(space_->nearest_index(p), y);
  }

  std::size_t pair_count() const noexcept {
    std::size_t total = 0;
    for (const auto& r : rows_) total += r.size();
    return total;
  }

  bool is_reflexive() const {
    for (std::size_t x = 0; x < rows_.size(); ++x)
      if (!contains(x, x)) return false;
    return true;
  }

  bool is_symmetric() const {
    for (std::size_t x = 0; x < rows_.size(); ++x)
      for (Index y : rows_[x])
        if (!contains(y, x)) return false;
    return true;
  }

  bool is_diagonal() const {
    for (std::size_t x = 0; x < rows_.size(); ++x)
      if (rows_[x].size() != 1 || rows_[x][0] != x) return false;
    return true;
  }

  bool subset_of(const Entourage& other) const {
    if (other.size() != size()) return false;
    for (std::size_t x = 0; x < rows_.size(); ++x)
      if (!std::includes(other.rows_[x].begin(), other.rows_[x].end(), rows_[x].begin(), rows_[x].end()))
        return false;
    return true;
  }

  /// Relation equality (labels and scales are ignored).
  bool same_relation(const Entourage& other) const { return rows_ == other.rows_; }

  const std::vector<std::vector<Index>>& rows() const noexcept { return rows_; }

  static std::string format_scale(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", eps);
    return buf;
  }

 private:
  Entourage(SpacePtr space, std::vector<std::vector<Index>> rows, std::string label, std::optional<double> scale)
      : space_(std::move(space)), rows_(std::move(rows)), label_(std::move(label)), scale_(scale) {}

  static Entourage by_distance(SpacePtr space, double eps, std::string label) {
    const std::size_t n = space->size();
    std::vector<std::vector<Index>> rows(n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (space->distance(x, y) <= eps + kTolerance) rows[x].push_back(static_cast<Index>(y));
    return Entourage(std::move(space), std::move(rows), std::move(label), eps);
  }

  static void sort_unique(std::vector<Index>& r) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }

  friend Entourage compose(const Entourage&, const Entourage&);

  SpacePtr space_;
  std::vector<std::vector<Index>> rows_;
  std::string label_;
  std::optional<double> scale_;
};

inline Entourage make_epsilon_entourage(SpacePtr space, double eps) { return Entourage::epsilon(std::move(space), eps); }

inline bool same_space(const SpacePtr& a, const SpacePtr& b) { return a == b || (a && b && *a == *b); }

inline void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (!same_space(a, b)) throw error(errc::incompatible_space, what);
}

/// e1∘e2 = {(x,y) : exists z, (x,z) in e1 and (z,y) in e2}.
inline Entourage compose(const Entourage& e1, const Entourage& e2) {
  require_same_space(e1.space(), e2.space(), "compose: entourages live on different spaces");
  const std::size_t n = e1.size();
  std::vector<std::vector<Index>> rows(n);
  std::vector<char> mark(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::fill(mark.begin(), mark.end(), 0);
    for (Index z : e1.rows_[x])
      for (Index y : e2.rows_[z]) mark[y] = 1;
    for (std::size_t y = 0; y < n; ++y)
      if (mark[y]) rows[x].push_back(static_cast<Index>(y));
  }
  return Entourage(e1.space(), std::move(rows), e1.label() + "*" + e2.label(), std::nullopt);
}

/// e^n = e∘e∘...∘e (n times).
inline Entourage power(const Entourage& e, int n) {
  if (n < 1) throw error(errc::invalid_parameter, "power exponent must be >= 1");
  Entourage acc = e;
  for (int i = 1; i < n; ++i) acc = compose(acc, e);
  return acc;
}

/// E[x] = {y : (x,y) in E}.
inline std::vector<Index> cross_section(const Entourage& e, std::size_t x) {
  auto r = e.row(x);
  return {r.begin(), r.end()};
}

/// A finite descending chain E_0 ⊇ E_1 ⊇ ... ⊇ E_m of entourages on one
/// space. Structural properties are checked by verify_uniformity_axioms,
/// not at construction, so that malformed bases can be reported.
class UniformityBasis {
 public:
  explicit UniformityBasis(std::vector<Entourage> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw error(errc::invalid_parameter, "a basis needs at least one level");
    for (const auto& l : levels_) require_same_space(levels_.front().space(), l.space(), "basis levels differ in space");
  }

  const std::vector<Entourage>& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return levels_.size(); }
  const Entourage& operator[](std::size_t i) const { return levels_.at(i); }
  const SpacePtr& space() const noexcept { return levels_.front().space(); }

 private:
  std::vector<Entourage> levels_;
};

/// Smallest level count k for which 2^-(k-1) drops below the resolution h.
inline int default_basis_levels(const FinitePhaseSpace& space) {
  const double h = space.resolution();
  int k = 1;
  while (std::ldexp(1.0, -(k - 1)) >= h && k < 60) ++k;
  return k;
}

/// Levels eps_j = 2^-j for j = 0..levels-1, followed by the diagonal floor.
inline UniformityBasis epsilon_basis(SpacePtr space, int levels) {
  if (levels < 1 || levels > 60) throw error(errc::invalid_parameter, "basis level count must lie in 1..60");
  std::vector<Entourage> out;
  for (int j = 0; j < levels; ++j)
    out.push_back(Entourage::epsilon(space, std::ldexp(1.0, -j), "E" + std::to_string(j)));
  out.push_back(Entourage::diagonal(space, "floor"));
  return UniformityBasis(std::move(out));
}

inline UniformityBasis epsilon_basis(SpacePtr space) {
  const int k = default_basis_levels(*space);
  return epsilon_basis(std::move(space), k);
}

struct LevelAxioms {
  std::string label;
  bool diagonal = false;   // U2
  bool symmetric = false;  // U3
  /// Index of a level Ê with Ê∘Ê ⊆ E (U4), if any.
  std::optional<std::size_t> square_root_level;
  /// E_{i-1} ⊇ E_i; always true for the first level.
  bool nested = false;
};

struct AxiomReport {
  std::vector<LevelAxioms> levels;
  bool floor_is_diagonal = false;

  bool all_pass() const {
    if (!floor_is_diagonal) return false;
    return std::all_of(levels.begin(), levels.end(), [](const LevelAxioms& l) {
      return l.diagonal && l.symmetric && l.square_root_level && l.nested;
    });
  }

  std::optional<std::size_t> first_failure() const {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& l = levels[i];
      if (!(l.diagonal && l.symmetric && l.square_root_level && l.nested)) return i;
    }
    return std::nullopt;
  }
};

/// Checks U2 and U3 per level, searches a U4 witness among strictly finer
/// levels (then the level itself), and checks the chain is descending.
inline AxiomReport verify_uniformity_axioms(const UniformityBasis& basis) {
  AxiomReport report;
  const auto& lv = basis.levels();
  std::vector<std::optional<Entourage>> squares(lv.size());
  auto square = [&](std::size_t j) -> const Entourage& {
    if (!squares[j]) squares[j] = compose(lv[j], lv[j]);
    return *squares[j];
  };
  for (std::size_t i = 0; i < lv.size(); ++i) {
    LevelAxioms a;
    a.label = lv[i].label();
    a.diagonal = lv[i].is_reflexive();
    a.symmetric = lv[i].is_symmetric();
    a.nested = i == 0 || lv[i].subset_of(lv[i - 1]);
    for (std::size_t j = i + 1; j < lv.size() && !a.square_root_level; ++j)
      if (square(j).subset_of(lv[i])) a.square_root_level = j;
    if (!a.square_root_level && square(i).subset_of(lv[i])) a.square_root_level = i;
    report.levels.push_back(std::move(a));
  }
  report.floor_is_diagonal = lv.back().is_diagonal();
  return report;
}

/// Index of the coarsest level D whose cross sections D[x] each fit inside
/// some member of `cover`.
inline std::size_t refining_level(const UniformityBasis& basis, const std::vector<std::vector<Index>>& cover) {
  const auto& space = *basis.space();
  const std::size_t n = space.size();
  std::vector<std::vector<char>> member(cover.size(), std::vector<char>(n, 0));
  std::vector<char> covered(n, 0);
  for (std::size_t c = 0; c < cover.size(); ++c)
    for (Index x : cover[c]) {
      space.check_index(x);
      member[c][x] = 1;
      covered[x] = 1;
    }
  for (std::size_t x = 0; x < n; ++x)
    if (!covered[x]) throw error(errc::invalid_cover, "point " + std::to_string(x) + " is not covered");

  for (std::size_t li = 0; li < basis.size(); ++li) {
    const Entourage& d = basis[li];
    bool refines = true;
    for (std::size_t x = 0; x < n && refines; ++x) {
      const auto row = d.row(x);
      refines = std::any_of(member.begin(), member.end(), [&](const std::vector<char>& m) {
        return std::all_of(row.begin(), row.end(), [&](Index y) { return m[y] != 0; });
      });
    }
    if (refines) return li;
  }
  throw error(errc::invalid_cover, "no basis level refines the cover (basis lacks a diagonal floor)");
}

inline Entourage refining_entourage(const UniformityBasis& basis, const std::vector<std::vector<Index>>& cover) {
  return basis[refining_level(basis, cover)];
}

}  // namespace uchain
