#include "dynsr/analysis.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace dynsr;

namespace {

ParticleConfig<1> line_config(std::vector<std::pair<double, double>> xv) {
  ParticleConfig<1> c;
  for (auto [x, v] : xv) c.particles.push_back({Point<1>(x), Point<1>(v), 1.0});
  return c;
}

ParticleConfig<1> random_line_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 1), vel(-0.5, 0.5);
  ParticleConfig<1> c;
  for (int i = 0; i < n; ++i) c.particles.push_back({Point<1>(u(rng)), Point<1>(vel(rng)), 1.0});
  return c;
}

std::vector<Vec2> sorted_points(const std::vector<Ghost>& g) {
  std::vector<Vec2> out;
  for (const auto& x : g) out.push_back(x.point);
  std::sort(out.begin(), out.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  return out;
}

}  // namespace

TEST(FindGhosts, TwoParticleExample) {
  const auto S = line_config({{0, 0}, {1, 0}});
  const auto g = find_ghosts(S, {-1, 1});
  ASSERT_EQ(g.size(), 2u);
  const auto p = sorted_points(g);
  EXPECT_NEAR((p[0] - Vec2(0.5, -0.5)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((p[1] - Vec2(0.5, 0.5)).norm(), 0.0, 1e-12);
  for (const auto& x : g) EXPECT_NE(x.assignment[0], x.assignment[1]);

  EXPECT_TRUE(find_ghosts(S, {-1, 0, 1}).empty());
  EXPECT_THROW(find_ghosts(S, {1}), std::invalid_argument);
}

TEST(FindGhosts, LiftedToTwoDimensions) {
  ParticleConfig<2> S;
  S.particles.push_back({Vec2(0, 0), Vec2(0, 0), 1.0});
  S.particles.push_back({Vec2(1, 0), Vec2(0, 0), 1.0});
  const auto g = find_ghosts(S, std::vector<double>{-1, 1});
  ASSERT_EQ(g.size(), 2u);
  for (const auto& [p, a] : g) {
    EXPECT_NEAR((p.x - Vec2(0.5, 0)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(p.v[0]), 0.5, 1e-12);
    EXPECT_NEAR(p.v[1], 0.0, 1e-12);
  }
  EXPECT_TRUE(find_ghosts(S, std::vector<double>{-1, 0, 1}).empty());

  // the projection along the first axis reproduces the 1-D ghosts
  const auto rep = projected_degeneracy(S, {Direction2(Vec2(1, 0))}, {-1, 1}, DegeneracyMode::Time);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].ghosts.size(), 2u);
}

TEST(FindCoincidences, SimpleExamples) {
  const auto S = line_config({{0, 1}, {1, 0}});
  const auto c = find_coincidences(S, {1}, 0.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(c[0].label, 1.0);
  EXPECT_TRUE(find_coincidences(S, {0}, 0.0).empty());
  const auto near = find_coincidences(S, {0.6}, 0.5);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_NEAR(near[0].distance, 0.4, 1e-15);
  EXPECT_TRUE(find_ghosts(line_config({{0.3, 0.1}}), {-1, 1}).empty());
}

TEST(FindCoincidences, Examples) {
  // trajectories 0 + t and 1 - t meet at t = 1/2
  const auto S = line_config({{0, 1}, {1, -1}});
  EXPECT_TRUE(find_coincidences(S, {-1, 0, 1}, 0.0).empty());
  const auto c = find_coincidences(S, {-1, 0.5, 1}, 0.0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(c[0].label, 0.5);
  EXPECT_EQ(c[0].i, 0);
  EXPECT_EQ(c[0].j, 1);
  EXPECT_EQ(find_coincidences(S, {-1, 0, 1}, 1.0).size(), 2u);  // t = 0 and t = 1 at distance 1
}

TEST(MinGhostDelta, Examples) {
  const auto S = line_config({{0, 0}, {1, 0}});
  EXPECT_NEAR(min_ghost_delta(S, {-1, 1}).value, 0.0, 1e-15);
  const auto r = min_ghost_delta(S, {-1, 0, 1});
  EXPECT_NEAR(r.value, 0.25, 1e-12);
  // assignment (2, 1, 2): max(|x - v - 1|, |x|, |x + v - 1|) is minimised at (0.5, 0)
  EXPECT_NEAR(chebyshev_value({Vec2(1, -1), Vec2(1, 0), Vec2(1, 1)}, {1, 0, 1}), 0.5, 1e-15);
  const auto g = oracle::ghost_grid_search({0, 1}, {0, 0}, {-1, 0, 1});
  EXPECT_NEAR(r.value, g.value, 2e-3);
}

TEST(MinGhostDelta, ChebyshevTripleFormula) {
  // direct minimisation of max_k |a_k . q - c_k| on a fine lattice around the optimum
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 8; ++k) {
    std::vector<Vec2> a = {Vec2(1, -1), Vec2(1, 0), Vec2(1, 1), Vec2(1, 0.5)};
    std::vector<double> c = {u(rng), u(rng), u(rng), u(rng)};
    const double v = chebyshev_value(a, c);
    double best = 1e9;
    for (double x = -3; x <= 3; x += 2e-3)
      for (double y = -3; y <= 3; y += 2e-3) {
        double m = 0;
        for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i].dot(Vec2(x, y)) - c[i]));
        best = std::min(best, m);
      }
    EXPECT_LE(v, best + 1e-12);
    EXPECT_NEAR(v, best, 4e-3);
  }
}

TEST(MinGhostDelta, MatchesGridSearch) {
  std::mt19937_64 rng(42);
  const std::vector<double> times = {-1, 0, 1};
  for (int k = 0; k < 10; ++k) {
    const auto S = random_line_config(rng, 2 + k % 3);
    std::vector<double> xs, vs;
    for (const auto& p : S.particles) {
      xs.push_back(p.x[0]);
      vs.push_back(p.v[0]);
    }
    const auto r = min_ghost_delta(S, times);
    const auto g = oracle::ghost_grid_search(xs, vs, times);
    EXPECT_NEAR(r.value, g.value, 2e-3) << "config " << k;
    EXPECT_LE(r.value, g.value + 1e-12);
  }
}

TEST(MinGhostDelta, ZeroExactlyWhenGhostsExist) {
  // holds for coincidence-free configurations
  std::mt19937_64 rng(43);
  for (int k = 0; k < 50; ++k) {
    const auto S = random_line_config(rng, 3);
    const std::vector<double> times = {-1, 1};
    if (!find_coincidences(S, times, 1e-9).empty()) continue;
    EXPECT_EQ(min_ghost_delta(S, times).value <= 1e-12, !find_ghosts(S, times).empty());
  }
  const auto S = line_config({{0, 0}, {1, 0}});
  EXPECT_FALSE(find_ghosts(S, {-1, 1}).empty());
  EXPECT_LE(min_ghost_delta(S, {-1, 1}).value, 1e-12);
}

TEST(MinGhostDelta, RelabelingAndTimeShiftInvariance) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  for (int k = 0; k < 20; ++k) {
    auto S = random_line_config(rng, 4);
    const std::vector<double> times = {-1, -0.5, 0, 0.5, 1};
    const double base = min_ghost_delta(S, times).value;
    std::shuffle(S.particles.begin(), S.particles.end(), rng);
    EXPECT_NEAR(min_ghost_delta(S, times).value, base, 1e-12);

    // x' = x - s v at times t + s describes the same trajectories
    const double s = shift(rng);
    auto shifted = S;
    for (auto& p : shifted.particles) p.x = p.x - s * p.v;
    std::vector<double> st;
    for (double t : times) st.push_back(t + s);
    EXPECT_NEAR(min_ghost_delta(shifted, st).value, base, 1e-12);
  }
}

TEST(ProjectedDegeneracy, CollapseAlongOneDirection) {
  ParticleConfig<2> S;
  S.particles.push_back({Vec2(0.3, 0.2), Vec2(0.1, 0.0), 1.0});
  S.particles.push_back({Vec2(0.3, 0.7), Vec2(0.1, 0.05), 1.0});
  const std::vector<Direction2> dirs = {Direction2(Vec2(1, 0)), Direction2::from_angle(1.0),
                                        Direction2::from_angle(-0.7)};
  const auto rep = projected_degeneracy(S, dirs, {-1, 0, 1}, DegeneracyMode::Time);
  ASSERT_EQ(rep.size(), 3u);
  EXPECT_EQ(rep[0].coincidences.size(), 3u);
  EXPECT_TRUE(rep[1].coincidences.empty());
  EXPECT_TRUE(rep[2].coincidences.empty());

  const auto snap = projected_degeneracy(S, dirs, {0}, DegeneracyMode::Direction);
  ASSERT_EQ(snap.size(), 1u);
  ASSERT_EQ(snap[0].coincidences.size(), 1u);
  EXPECT_NEAR(snap[0].coincidences[0].label, 0.0, 1e-15);
  const auto j = to_json(rep[0]);
  EXPECT_EQ(j["coincidences"].size(), 3u);
}

TEST(ProjectedDegeneracy, GenericConfigurationsHaveNoExactGhosts) {
  std::mt19937_64 rng(45);
  int with_ghosts = 0;
  for (int k = 0; k < 100; ++k) {
    std::uniform_real_distribution<double> u(0, 1), vel(-0.5, 0.5);
    ParticleConfig<2> S;
    for (int i = 0; i < 5; ++i) S.particles.push_back({Vec2(u(rng), u(rng)), Vec2(vel(rng), vel(rng)), 1.0});
    for (const auto& r : projected_degeneracy(S, {Direction2::from_angle(-1.0), Direction2::from_angle(0.0),
                                                  Direction2::from_angle(1.0)},
                                              {-1, 0, 1}, DegeneracyMode::Time))
      with_ghosts += !r.ghosts.empty();
  }
  RecordProperty("projections_with_ghosts", with_ghosts);
  if (with_ghosts) std::printf("generic configurations with ghosts: %d\n", with_ghosts);
}
