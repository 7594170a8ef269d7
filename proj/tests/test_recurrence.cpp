#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "uchain/uchain.hpp"

using namespace uchain;

namespace {

SystemSpec from_catalog(std::size_t n, const std::string& name) {
  for (auto& s : catalog(n))
    if (s.name() == name) return s;
  throw std::runtime_error("no catalog system " + name);
}

std::vector<Index> ball(const Entourage& e, Index x) { return cross_section(e, x); }

std::vector<Index> range(Index a, Index b) {
  std::vector<Index> out(b - a);
  std::iota(out.begin(), out.end(), a);
  return out;
}

}  // namespace

TEST(OrbitTable, MatchesSnappedIteration) {
  auto s = from_catalog(64, "rotation-golden");
  OrbitTable table(s, 30);
  const auto& sp = s.phase_space();
  for (Index x : {0u, 17u, 63u})
    for (std::size_t t = 0; t <= 30; ++t) {
      double q = sp.point(x)[0];
      for (std::size_t k = 0; k < t; ++k) q = oracle::base_map(MapKind::rotation, q, s.alpha(), 0);
      const Index want = table.at(x, t);
      ASSERT_NE(want, kOffGrid);
      EXPECT_LE(oracle::circle_dist(sp.point(want)[0], q), sp.resolution() / 2 + 1e-9);
    }
}

TEST(ReturnTimes, FixedPointReturnsAlways) {
  auto sp = share(FinitePhaseSpace::interval_grid(32));
  auto r = return_times(SystemSpec::square(sp), {0}, {0}, 40);
  std::vector<std::size_t> want(41);
  std::iota(want.begin(), want.end(), 0);
  EXPECT_EQ(r.times, want);
  EXPECT_EQ(r.horizon, 40u);
}

TEST(ReturnTimes, QuarterRotationPeriodFour) {
  auto s = from_catalog(64, "rotation-quarter");
  auto e = Entourage::epsilon(s.space(), 0.1);
  auto u = ball(e, 0);
  auto r = return_times(s, u, u, 40);
  std::vector<std::size_t> want;
  for (std::size_t t = 0; t <= 40; t += 4) want.push_back(t);
  EXPECT_EQ(r.times, want);
  auto c = classify_return_set(r);
  EXPECT_EQ(c.label, ReturnClass::contains_kN);
  EXPECT_EQ(c.contains_k, 4u);
}

TEST(ReturnTimes, SquareLeavesTheMiddle) {
  auto sp = share(FinitePhaseSpace::interval_grid(101));
  auto s = SystemSpec::square(sp);
  auto u = ball(Entourage::epsilon(sp, 0.05), 50);
  auto r = return_times(s, u, u, 50);
  EXPECT_EQ(r.times, std::vector<std::size_t>{0});
  EXPECT_EQ(classify_return_set(r).label, ReturnClass::finite_only);
  auto p = point_return_times(s, 50, u, 50);
  EXPECT_EQ(p.kind, ReturnKind::point_in_set);
  EXPECT_EQ(p.times, std::vector<std::size_t>{0});
}

TEST(ReturnTimes, InvalidArguments) {
  auto sp = share(FinitePhaseSpace::interval_grid(8));
  auto s = SystemSpec::identity(sp);
  for (auto call : {+[](const SystemSpec& s) { return_times(s, {}, {1}, 5); },
                    +[](const SystemSpec& s) { return_times(s, {1}, {}, 5); },
                    +[](const SystemSpec& s) { return_times(s, {1}, {1}, 0); }}) {
    try {
      call(s);
      ADD_FAILURE();
    } catch (const error& e) {
      EXPECT_EQ(e.code(), errc::invalid_parameter);
    }
  }
  EXPECT_THROW(return_times(s, {1}, {99}, 5), error);
}

TEST(ReturnTimes, AgreesWithDirectIteration) {
  for (auto& s : catalog(32)) {
    if (s.phase_space().dimension() != 1 || s.phase_space().geometry() == Geometry::discrete) continue;
    const auto& sp = s.phase_space();
    auto e = Entourage::epsilon(s.space(), 2 * sp.resolution());
    for (Index x : {3u, 16u, 29u}) {
      auto u = ball(e, x);
      auto v = ball(e, (x * 7 + 5) % 32);
      auto r = return_times(s, u, v, 60);
      std::vector<std::size_t> want;
      for (std::size_t t = 0; t <= 60; ++t) {
        bool hit = false;
        for (Index y : u) {
          double p = sp.point(y)[0];
          for (std::size_t k = 0; k < t * static_cast<std::size_t>(s.step()); ++k) p = oracle::base_map(s.map(), p, s.alpha(), s.slope());
          const Index near = sp.nearest_index(std::vector<double>{p});
          const double d = sp.geometry() == Geometry::circle ? oracle::circle_dist(sp.point(near)[0], p) : std::fabs(sp.point(near)[0] - p);
          if (d <= sp.resolution() / 2 + 1e-9 && std::binary_search(v.begin(), v.end(), near)) hit = true;
        }
        if (hit) want.push_back(t);
      }
      EXPECT_EQ(r.times, want) << s.name() << " x=" << x;
    }
  }
}

TEST(Classify, Examples) {
  ReturnTimeSet all{{}, 100, ReturnKind::set_to_set};
  for (std::size_t t = 0; t <= 100; ++t) all.times.push_back(t);
  auto c = classify_return_set(all);
  EXPECT_EQ(c.label, ReturnClass::contains_kN);
  EXPECT_EQ(c.syndetic_k, 1u);
  EXPECT_EQ(c.contains_k, 1u);
  EXPECT_TRUE(c.thick);

  ReturnTimeSet every4{{}, 100, ReturnKind::set_to_set};
  for (std::size_t t = 0; t <= 100; t += 4) every4.times.push_back(t);
  c = classify_return_set(every4);
  EXPECT_EQ(c.label, ReturnClass::contains_kN);
  EXPECT_EQ(c.contains_k, 4u);
  EXPECT_FALSE(c.thick);

  EXPECT_EQ(classify_return_set({{0}, 100, ReturnKind::set_to_set}).label, ReturnClass::finite_only);
  EXPECT_EQ(classify_return_set({{}, 100, ReturnKind::set_to_set}).label, ReturnClass::empty);
  EXPECT_EQ(return_class_name(ReturnClass::contains_kN), "contains-kN");
  EXPECT_EQ(return_class_name(ReturnClass::syndetic_window), "syndetic-window");
}

TEST(Classify, SyndeticAndThickWindows) {
  // Beatty sequence floor(6.18 i): gaps of 6 and 7 with no period
  ReturnTimeSet r{{}, 120, ReturnKind::set_to_set};
  for (std::size_t i = 0; 6.18 * i <= 120; ++i) r.times.push_back(static_cast<std::size_t>(6.18 * i));
  for (std::size_t k = 1; k <= 30; ++k) {
    bool all = true;
    for (std::size_t m = k; m <= 120; m += k) all = all && std::binary_search(r.times.begin(), r.times.end(), m);
    ASSERT_FALSE(all) << k;
  }
  auto c = classify_return_set(r);
  EXPECT_EQ(c.label, ReturnClass::syndetic_window);
  EXPECT_EQ(c.syndetic_k, 7u);
  EXPECT_FALSE(c.contains_k.has_value());

  // a run of 12 consecutive times at horizon 100 is thick (sqrt(100) = 10)
  ReturnTimeSet thick{{}, 100, ReturnKind::set_to_set};
  for (std::size_t t = 70; t < 82; ++t) thick.times.push_back(t);
  c = classify_return_set(thick);
  EXPECT_EQ(c.label, ReturnClass::thick_window);
  EXPECT_TRUE(c.thick);
  EXPECT_FALSE(c.syndetic_k.has_value());
}

TEST(WeakMixing, Examples) {
  auto d = from_catalog(256, "doubling");
  auto e = Entourage::epsilon(d.space(), 2.0 / 256);
  EXPECT_EQ(weak_mixing_witness(d, ball(e, 64), ball(e, 128), 64), 6u);

  auto r = from_catalog(64, "rotation-quarter");
  auto er = Entourage::epsilon(r.space(), 0.04);
  EXPECT_FALSE(weak_mixing_witness(r, ball(er, 0), ball(er, 6), 200).has_value());

  auto sp = share(FinitePhaseSpace::interval_grid(16));
  auto id = SystemSpec::identity(sp);
  EXPECT_EQ(weak_mixing_witness(id, range(3, 8), range(3, 8), 10), 1u);
}

TEST(Nonwandering, Examples) {
  auto g = from_catalog(128, "rotation-golden");
  auto all = range(0, 128);
  EXPECT_EQ(nonwandering_points(g, Entourage::epsilon(g.space(), 2.0 / 128), 512), all);

  auto sp = share(FinitePhaseSpace::interval_grid(64));
  auto sq = SystemSpec::square(sp);
  auto om = nonwandering_points(sq, Entourage::epsilon(sp, 2 * sp->resolution()), 200);
  std::vector<Index> want{0, 1, 2, 57, 58, 59, 60, 61, 62, 63};
  EXPECT_EQ(om, want);
  for (Index x : om) EXPECT_TRUE(x <= 2 || x >= 57);

  auto id = SystemSpec::identity(sp);
  EXPECT_EQ(nonwandering_points(id, Entourage::epsilon(sp, sp->resolution()), 1), range(0, 64));
}

TEST(Nonwandering, DoublingOn256) {
  auto d = from_catalog(256, "doubling");
  EXPECT_EQ(nonwandering_points(d, Entourage::epsilon(d.space(), 2.0 / 256), 200).size(), 84u);
}

TEST(Nonwandering, SharedTableGivesSameAnswer) {
  for (auto& s : catalog(32)) {
    auto e = Entourage::epsilon(s.space(), 2 * s.phase_space().resolution());
    OrbitTable t(s, 100);
    EXPECT_EQ(nonwandering_points(s, e, 100, &t), nonwandering_points(s, e, 100)) << s.name();
  }
}

TEST(Nonwandering, IncludedInChainRecurrentSetForIsometriesAndPermutations) {
  // Lipschitz expansion can push the sampled set beyond the chain-recurrent
  // set; the containment holds for maps that do not expand distances
  for (std::size_t n : {16u, 64u})
    for (auto& s : catalog(n)) {
      const std::string name = s.name();
      if (name == "square" || name == "doubling" || name == "tent") continue;
      auto e = Entourage::epsilon(s.space(), 2 * s.phase_space().resolution());
      auto om = nonwandering_points(s, e, 200);
      auto cr = chain_recurrent_set(build_transition_graph(s, e));
      EXPECT_TRUE(std::includes(cr.begin(), cr.end(), om.begin(), om.end())) << name;
    }
}

TEST(Nonwandering, SquareMapExceedsChainRecurrentSet) {
  auto sp = share(FinitePhaseSpace::interval_grid(64));
  auto s = SystemSpec::square(sp);
  auto e = Entourage::epsilon(sp, 2 * sp->resolution());
  auto cr = chain_recurrent_set(build_transition_graph(s, e));
  EXPECT_EQ(cr, (std::vector<Index>{0, 1, 2, 61, 62, 63}));
  auto om = nonwandering_points(s, e, 200);
  EXPECT_FALSE(std::includes(cr.begin(), cr.end(), om.begin(), om.end()));
}

TEST(Nonwandering, ReturnTimesKeepAppearing) {
  for (auto& s : catalog(32)) {
    const std::string name = s.name();
    if (name == "square" || name == "doubling" || name == "tent") continue;
    auto e = Entourage::epsilon(s.space(), 2 * s.phase_space().resolution());
    const std::size_t H = 100;
    for (Index x : nonwandering_points(s, e, H)) {
      auto u = ball(e, x);
      EXPECT_GT(return_times(s, u, u, 2 * H).times.size(), return_times(s, u, u, H).times.size()) << name << " " << x;
    }
  }
}

TEST(Nonwandering, ForwardInvariantUpToOneCell) {
  for (auto& s : catalog(32)) {
    const std::string name = s.name();
    if (name == "square" || name == "doubling" || name == "tent") continue;
    const auto& sp = s.phase_space();
    auto e = Entourage::epsilon(s.space(), 2 * sp.resolution());
    auto om = nonwandering_points(s, e, 100);
    for (Index x : om) {
      auto img = s.evaluate(x, 1).image;
      bool near = false;
      for (Index y : om) near = near || sp.distance(img, sp.point(y)) <= sp.resolution() + 1e-9;
      EXPECT_TRUE(near) << name << " " << x;
    }
  }
}

TEST(Nonwandering, ExpandingMapsBreakTheFiniteEchoes) {
  // frozen counts for the 32-point catalog at horizon 100: points whose
  // return count stops growing, and points whose image leaves the set
  auto count = [](const std::string& name) {
    auto s = from_catalog(32, name);
    const auto& sp = s.phase_space();
    auto e = Entourage::epsilon(s.space(), 2 * sp.resolution());
    auto om = nonwandering_points(s, e, 100);
    std::size_t stale = 0, escaped = 0;
    for (Index x : om) {
      auto u = ball(e, x);
      stale += return_times(s, u, u, 200).times.size() <= return_times(s, u, u, 100).times.size();
      auto img = s.evaluate(x, 1).image;
      bool near = false;
      for (Index y : om) near = near || sp.distance(img, sp.point(y)) <= sp.resolution() + 1e-9;
      escaped += !near;
    }
    return std::pair<std::size_t, std::size_t>{stale, escaped};
  };
  EXPECT_GT(count("doubling").first + count("tent").first + count("square").first, 0u);
}

namespace {

/// Some y in the ball around x with f^{jk}(y) in the ball for every jk <= H, k <= H/4.
bool arithmetic_return(const Entourage& e, const OrbitTable& table, Index x) {
  const std::size_t H = table.horizon();
  auto u = ball(e, x);
  std::vector<char> in_u(e.size(), 0);
  for (Index y : u) in_u[y] = 1;
  for (std::size_t k = 1; k <= H / 4; ++k)
    for (Index y : u) {
      bool all = true;
      for (std::size_t t = k; t <= H && all; t += k) {
        const Index at = table.at(y, t);
        all = at != kOffGrid && in_u[at];
      }
      if (all) return true;
    }
  return false;
}

std::vector<Index> arithmetic_points(const std::string& name) {
  auto s = from_catalog(64, name);
  auto e = Entourage::epsilon(s.space(), 2 * s.phase_space().resolution());
  OrbitTable table(s, 200);
  std::vector<Index> out;
  for (Index x : nonwandering_points(s, e, 200, &table))
    if (arithmetic_return(e, table, x)) out.push_back(x);
  return out;
}

}  // namespace

TEST(Minimal, ArithmeticReturnsForIdentityAndResonantRotation) {
  for (const char* name : {"identity", "rotation-quarter"}) {
    auto s = from_catalog(64, name);
    auto e = Entourage::epsilon(s.space(), 2 * s.phase_space().resolution());
    EXPECT_EQ(arithmetic_points(name), nonwandering_points(s, e, 200)) << name;
  }
}

TEST(Minimal, DoublingGridOrbitsCollapseToZero) {
  // every dyadic grid point reaches 0 in at most six doublings, so only
  // balls holding the fixed point carry arithmetic returns
  EXPECT_EQ(arithmetic_points("doubling"), (std::vector<Index>{0, 1, 2, 62, 63}));
}

TEST(Omega, Examples) {
  auto sp = share(FinitePhaseSpace::interval_grid(32));
  auto sq = SystemSpec::square(sp);
  EXPECT_EQ(omega_limit(sq, 31, 0, 10), std::vector<Index>{31});
  auto mid = share(FinitePhaseSpace::interval_grid(101));
  EXPECT_EQ(omega_limit(SystemSpec::square(mid), 50, 100, 200), std::vector<Index>{0});
  auto g = from_catalog(128, "rotation-golden");
  EXPECT_EQ(omega_limit(g, 0, 100, 3000).size(), 128u);
  EXPECT_THROW(omega_limit(sq, 3, 10, 10), error);
}

TEST(OmegaRestriction, CantorIdentityAgrees) {
  auto sp = share(cantor_space(2));
  auto s = SystemSpec::identity(sp);
  auto r = omega_restriction_shadowing(s, Entourage::epsilon(sp, 0.1), epsilon_basis(sp), 50, 20, 50, 4);
  EXPECT_EQ(r.omega_hat.size(), 4u);
  EXPECT_TRUE(r.full.found());
  EXPECT_TRUE(r.restricted.found());
  EXPECT_TRUE(r.agreement());
}

TEST(OmegaRestriction, RotationRestrictionIsVacuous) {
  auto s = from_catalog(64, "rotation-golden");
  auto e = Entourage::epsilon(s.space(), 2.0 / 64);
  auto r = omega_restriction_shadowing(s, e, epsilon_basis(s.space()), 256, 5, 50, 4);
  EXPECT_EQ(r.omega_hat, range(0, 64));
  EXPECT_EQ(r.full.found(), r.restricted.found());
  ASSERT_EQ(r.full.scanned.size(), r.restricted.scanned.size());
  for (std::size_t i = 0; i < r.full.scanned.size(); ++i)
    EXPECT_EQ(r.full.scanned[i].failures, r.restricted.scanned[i].failures);
}

TEST(OmegaRestriction, SquareMapClasses) {
  auto sp = share(FinitePhaseSpace::interval_grid(64));
  auto s = SystemSpec::square(sp);
  auto e = Entourage::epsilon(sp, 2 * sp->resolution());
  auto r = omega_restriction_shadowing(s, e, epsilon_basis(sp), 200, 20, 100, 7);
  EXPECT_FALSE(r.full.found());
  EXPECT_TRUE(r.restricted.found());
  EXPECT_FALSE(r.agreement());
  std::vector<std::vector<Index>> want{{0, 1, 2}, {57}, {58}, {59}, {60, 61, 62, 63}};
  EXPECT_EQ(r.classes, want);
}

TEST(OmegaRestriction, ClassesPartitionAndAreMutuallyReachable) {
  for (auto& s : catalog(32)) {
    auto e = Entourage::epsilon(s.space(), 2 * s.phase_space().resolution());
    auto basis = epsilon_basis(s.space());
    auto r = omega_restriction_shadowing(s, e, basis, 100, 3, 30, 1);
    std::vector<Index> merged;
    for (const auto& c : r.classes) merged.insert(merged.end(), c.begin(), c.end());
    std::sort(merged.begin(), merged.end());
    ASSERT_EQ(merged, r.omega_hat) << s.name();
    ASSERT_TRUE(std::adjacent_find(merged.begin(), merged.end()) == merged.end());

    const Entourage* d = &e;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis[i].label() == r.class_entourage) d = &basis[i];
    auto sub = build_transition_graph(s, *d).induced(r.omega_hat);
    const auto reach = oracle::reach(sub.adjacency());
    std::vector<std::size_t> pos(s.phase_space().size());
    for (std::size_t i = 0; i < r.omega_hat.size(); ++i) pos[r.omega_hat[i]] = i;
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
      const auto& cls = r.classes[c];
      for (Index a : cls)
        for (Index b : cls)
          if (a != b) { ASSERT_TRUE(reach[pos[a]][pos[b]]) << s.name(); }
      for (std::size_t c2 = 0; c2 < r.classes.size(); ++c2)
        if (c2 != c) {
          const Index a = cls.front(), b = r.classes[c2].front();
          ASSERT_FALSE(reach[pos[a]][pos[b]] && reach[pos[b]][pos[a]]) << s.name();
        }
    }
  }
}

TEST(OmegaRestriction, EmptyOmegaRejected) {
  try {
    // neither point returns to itself under the square map
    auto mid = share(FinitePhaseSpace::from_points({{0.4}, {0.6}}, Geometry::interval));
    omega_restriction_shadowing(SystemSpec::square(mid), Entourage::diagonal(mid), epsilon_basis(mid, 2), 5, 2, 5, 0);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::no_nonwandering_points);
  }
}
