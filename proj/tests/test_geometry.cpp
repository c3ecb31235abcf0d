#include "dynsr/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dynsr;

namespace {

void expect_vertex(const Vec2& got, double x, double y) {
  EXPECT_NEAR(got.x(), x, 1e-12);
  EXPECT_NEAR(got.y(), y, 1e-12);
}

}  // namespace

TEST(TimeGrid, CentredTimes) {
  EXPECT_EQ(centred_times(1), (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(centred_times(2), (std::vector<double>{-1, -0.5, 0, 0.5, 1}));
  const auto g = TimeGrid::make({1, -1, 0}, {0.5});
  EXPECT_EQ(g.measurement_times, (std::vector<double>{-1, 0, 1}));
  EXPECT_DOUBLE_EQ(g.half_width, 1.0);
  EXPECT_EQ(g.all_times().size(), 4u);
}

TEST(TimeGrid, RejectsBadInput) {
  EXPECT_THROW(TimeGrid::make({}), std::invalid_argument);
  EXPECT_THROW(TimeGrid::make({0, 1}), std::invalid_argument);
  EXPECT_THROW(TimeGrid::make({-1, 1}, {1}), std::invalid_argument);
  EXPECT_THROW(centred_times(0), std::invalid_argument);
}

TEST(Direction, UnitLength) {
  EXPECT_THROW(Direction2(Vec2(1, 1)), std::invalid_argument);
  const auto d = Direction2::from_angle(0.3);
  EXPECT_NEAR(d.vector().norm(), 1.0, 1e-12);
  const auto n = Direction2::normalized(Vec2(3, -4));
  EXPECT_DOUBLE_EQ(n.s_plus(), 0.6);
  EXPECT_DOUBLE_EQ(n.s_minus(), -0.8);
}

TEST(PhaseDomain, Examples) {
  EXPECT_TRUE(phase_domain_contains<2>(Vec2(0.5, 0.5), Vec2(0, 0), 1.0));
  EXPECT_FALSE(phase_domain_contains<2>(Vec2(0.5, 0.5), Vec2(0.6, 0), 1.0));
  EXPECT_FALSE(phase_domain_contains<2>(Vec2(0, 0), Vec2(1, 1), 1.0));
}

TEST(ProjectedPhaseDomain, Examples) {
  auto p = projected_phase_domain(Direction2(Vec2(1, 0)), 1.0);
  expect_vertex(p.vertices[0], 0, 0);
  expect_vertex(p.vertices[1], 1, 0);
  expect_vertex(p.vertices[2], 0.5, 0.5);
  expect_vertex(p.vertices[3], 0.5, -0.5);

  p = projected_phase_domain(Direction2(Vec2(0, -1)), 1.0);
  expect_vertex(p.vertices[0], -1, 0);
  expect_vertex(p.vertices[1], 0, 0);
  expect_vertex(p.vertices[2], -0.5, 0.5);
  expect_vertex(p.vertices[3], -0.5, -0.5);

  const double r = std::sqrt(0.5);
  p = projected_phase_domain(Direction2(Vec2(r, r)), 2.0);
  const double s = std::sqrt(2.0);
  expect_vertex(p.vertices[0], 0, 0);
  expect_vertex(p.vertices[1], s, 0);
  expect_vertex(p.vertices[2], s / 2, s / 4);
  expect_vertex(p.vertices[3], s / 2, -s / 4);
}

TEST(ProjectedPhaseDomain, MidpointIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), T(0.1, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = projected_phase_domain(Direction2::from_angle(ang(rng)), T(rng));
    const Vec2 m1 = 0.5 * (p.vertices[0] + p.vertices[1]);
    const Vec2 m2 = 0.5 * (p.vertices[2] + p.vertices[3]);
    EXPECT_NEAR((m1 - m2).norm(), 0.0, 1e-15);
  }
}

TEST(ProjectedPhaseDomain, ContainsProjectedPhasePoints) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1), vel(-0.5, 0.5), ang(-M_PI, M_PI), tt(-3, 3);
  const double T = 1.0;
  int checked = 0;
  while (checked < 10000) {
    const Vec2 x(u(rng), u(rng)), v(vel(rng), vel(rng));
    if (!phase_domain_contains<2>(x, v, T)) continue;
    ++checked;
    const auto theta = Direction2::from_angle(ang(rng));
    const auto P = projected_phase_domain(theta, T);
    ASSERT_TRUE(P.contains(Vec2(theta.dot(x), theta.dot(v)), 1e-12));
    const double t = tt(rng);
    ASSERT_TRUE(snapshot_domain<2>(t, T).contains(x + t * v, 1e-12));
    ASSERT_TRUE(bin_interval(theta, t, T).contains(theta.dot(x) + t * theta.dot(v), 1e-12));
  }
}

TEST(SnapshotDomain, Examples) {
  auto b = snapshot_domain<2>(0.5, 1.0);
  EXPECT_EQ(b.lower, Vec2(0, 0));
  EXPECT_EQ(b.upper, Vec2(1, 1));
  b = snapshot_domain<2>(2.0, 1.0);
  EXPECT_EQ(b.lower, Vec2(-0.5, -0.5));
  EXPECT_EQ(b.upper, Vec2(1.5, 1.5));
  b = snapshot_domain<2>(-1.0, 1.0);
  EXPECT_EQ(b.lower, Vec2(0, 0));
  EXPECT_EQ(b.upper, Vec2(1, 1));
}

TEST(BinInterval, Examples) {
  const Direction2 e1(Vec2(1, 0));
  auto iv = bin_interval(e1, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(iv.lo, 0.0);
  EXPECT_DOUBLE_EQ(iv.hi, 1.0);
  iv = bin_interval(e1, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(iv.lo, 0.0);
  EXPECT_DOUBLE_EQ(iv.hi, 1.0);
  iv = bin_interval(e1, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(iv.lo, -0.5);
  EXPECT_DOUBLE_EQ(iv.hi, 1.5);
}

TEST(MakeGrid, BoxCenters) {
  const auto g = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 2);
  ASSERT_EQ(g.cell_count(), 4);
  expect_vertex(g.cell_center(0), 0.25, 0.25);
  expect_vertex(g.cell_center(1), 0.75, 0.25);
  expect_vertex(g.cell_center(2), 0.25, 0.75);
  expect_vertex(g.cell_center(3), 0.75, 0.75);
}

TEST(MakeGrid, IntervalBreakpoints) {
  const auto g = make_grid(Interval{0, 1}, 4);
  const auto r = g.breakpoints();
  ASSERT_EQ(r.size(), 5u);
  for (int i = 0; i <= 4; ++i) EXPECT_NEAR(r[i], 0.25 * i, 1e-15);
}

TEST(MakeGrid, ParallelogramSingleCell) {
  const auto P = projected_phase_domain(Direction2(Vec2(1, 0)), 1.0);
  const auto g = make_grid(P, 1);
  ASSERT_EQ(g.cell_count(), 1);
  // shoelace area of (0,0), (0.5,-0.5), (1,0), (0.5,0.5)
  EXPECT_NEAR(g.cell_volume(), 0.5, 1e-15);
  EXPECT_NEAR(P.area(), 0.5, 1e-15);
  const auto v = g.cell_vertices(0);
  for (const auto& q : v) EXPECT_TRUE(P.contains(q, 1e-12));
}

TEST(MakeGrid, CellVolumesSumToDomain) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int M : {1, 3, 17, 50}) {
    const auto P = projected_phase_domain(Direction2::from_angle(ang(rng)), 1.0);
    const auto g = make_grid(P, M);
    EXPECT_NEAR(g.cell_volume() * g.cell_count(), P.area(), 1e-10 * P.area());
    const auto b = make_grid(snapshot_domain<2>(2.5, 1.0), M);
    EXPECT_NEAR(b.cell_volume() * b.cell_count(), 2.5 * 2.5, 1e-10);
  }
}

TEST(MakeGrid, ImageOfUnitSquare) {
  const auto P = projected_phase_domain(Direction2::from_angle(0.7), 1.5);
  const auto g = make_grid(P, 5);
  const Vec2 corners[] = {g.map(Vec2(0, 0)), g.map(Vec2(1, 0)), g.map(Vec2(0, 1)), g.map(Vec2(1, 1))};
  for (const auto& c : corners) {
    double best = 1e9;
    for (const auto& v : P.vertices) best = std::min(best, (c - v).norm());
    EXPECT_LT(best, 1e-12);
  }
}

TEST(MakeGrid, RejectsDegenerate) {
  EXPECT_THROW(make_grid(Interval{1, 1}, 3), std::invalid_argument);
  EXPECT_THROW(make_grid(Box<2>{Vec2(0, 0), Vec2(0, 1)}, 3), std::invalid_argument);
  EXPECT_THROW(make_grid(Interval{0, 1}, 0), std::invalid_argument);
}

TEST(GridSpec, LocateTiesGoToLowerIndex) {
  const auto g = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 2);
  EXPECT_EQ(*g.locate(Vec2(0.5, 0.25)), 0);
  EXPECT_EQ(*g.locate(Vec2(0.75, 0.75)), 3);
  EXPECT_FALSE(g.locate(Vec2(1.5, 0.5)).has_value());
  for (Eigen::Index j = 0; j < g.cell_count(); ++j) EXPECT_EQ(*g.locate(g.cell_center(j)), j);
}
