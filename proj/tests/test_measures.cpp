#include "dynsr/io.hpp"
#include "dynsr/measures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

using namespace dynsr;

namespace {

ParticleConfig<2> random_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 1), vel(-0.5, 0.5), mass(0.5, 2);
  ParticleConfig<2> cfg;
  for (int i = 0; i < n; ++i) cfg.particles.push_back({Vec2(u(rng), u(rng)), Vec2(vel(rng), vel(rng)), mass(rng)});
  return cfg;
}

}  // namespace

TEST(RadonProject, Examples) {
  auto r = radon_project(DiscreteMeasure<2>({Vec2(0.3, 0.7)}, {1.0}), Direction2(Vec2(1, 0)));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r.points[0][0], 0.3);

  const double s = std::sqrt(0.5);
  r = radon_project(DiscreteMeasure<2>({Vec2(0.5, 0.5)}, {2.0}), Direction2(Vec2(s, s)));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r.points[0][0], 0.70710678, 1e-8);
  EXPECT_DOUBLE_EQ(r.weights[0], 2.0);

  r = radon_project(DiscreteMeasure<2>({Vec2(0, 0), Vec2(1, -1)}, {1.0, 1.0}), Direction2(Vec2(s, s)));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r.points[0][0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.weights[0], 2.0);
}

TEST(JointRadon, Examples) {
  ParticleConfig<2> cfg;
  cfg.particles.push_back({Vec2(0.2, 0.4), Vec2(0.1, -0.1), 1.0});
  auto g = joint_radon(cfg, Direction2(Vec2(1, 0)));
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.points[0], Vec2(0.2, 0.1));
  g = joint_radon(cfg, Direction2(Vec2(0, 1)));
  EXPECT_EQ(g.points[0], Vec2(0.4, -0.1));

  cfg.particles.push_back({Vec2(0.2, 0.9), Vec2(0.1, 0.3), 2.0});
  g = joint_radon(cfg, Direction2(Vec2(1, 0)));
  ASSERT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g.weights[0], 3.0);
}

TEST(Move, Examples) {
  ParticleConfig<2> cfg;
  cfg.particles.push_back({Vec2(0.2, 0.0), Vec2(0.1, 0.0), 2.0});
  const auto u = move(cfg, 1.0);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_NEAR((u.points[0] - Vec2(0.3, 0.0)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(u.weights[0], 2.0);

  const auto m = move1d(DiscreteMeasure<2>({Vec2(0.2, 0.1)}, {2.0}), 2.0);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NEAR(m.points[0][0], 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(m.weights[0], 2.0);

  std::mt19937_64 rng(1);
  const auto c = random_config(rng, 5);
  const auto u0 = move(c, 0.0);
  DiscreteMeasure<2> xs;
  for (const auto& p : c.particles) xs.add(p.x, p.m);
  const auto cx = canonicalize(xs);
  ASSERT_EQ(u0.size(), cx.size());
  for (std::size_t i = 0; i < cx.size(); ++i) EXPECT_EQ(u0.points[i], cx.points[i]);
}

TEST(Fourier, Examples) {
  const DiscreteMeasure<2> origin({Vec2(0, 0)}, {1.0});
  const auto z = fourier(origin, Vec2(3.7, -1.2));
  EXPECT_DOUBLE_EQ(z.real(), 1.0);
  EXPECT_DOUBLE_EQ(z.imag(), 0.0);
  const DiscreteMeasure<2> nu({Vec2(0.1, 0.2), Vec2(0.5, 0.9)}, {0.7, 1.6});
  EXPECT_NEAR(fourier(nu, Vec2(0, 0)).real(), 2.3, 1e-15);
  // direct sum
  const Vec2 xi(2.0, -1.0);
  std::complex<double> ref = 0.7 * std::exp(std::complex<double>(0, -xi.dot(Vec2(0.1, 0.2)))) +
                             1.6 * std::exp(std::complex<double>(0, -xi.dot(Vec2(0.5, 0.9))));
  EXPECT_NEAR(std::abs(fourier(nu, xi) - ref), 0.0, 1e-14);
}

TEST(Measures, MassPreservationAndCommutation) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), tt(-2, 2), sig(-20, 20);
  for (int k = 0; k < 200; ++k) {
    const auto cfg = random_config(rng, 1 + k % 7);
    const auto theta = Direction2::from_angle(ang(rng));
    const double t = tt(rng);
    const auto u = move(cfg, t);
    const auto g = joint_radon(cfg, theta);
    EXPECT_NEAR(u.total_mass(), cfg.total_mass(), 1e-12);
    EXPECT_NEAR(g.total_mass(), cfg.total_mass(), 1e-12);
    const auto a = radon_project(u, theta);
    const auto b = move1d(g, t);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a.points[i][0], b.points[i][0], 1e-12);
      EXPECT_NEAR(a.weights[i], b.weights[i], 1e-12);
    }
    const double s = sig(rng);
    EXPECT_NEAR(std::abs(fourier(a, Point<1>(s)) - fourier(u, Vec2(s * theta.vector()))), 0.0, 1e-12);
  }
}

TEST(DynamicSeparation, Examples) {
  ParticleConfig<2> two;
  two.particles.push_back({Vec2(0.3, 0.5), Vec2(0, 0), 1});
  two.particles.push_back({Vec2(0.4, 0.5), Vec2(0, 0), 1});
  EXPECT_NEAR(dynamic_separation(two, centred_times(1)), 0.1, 1e-15);

  ParticleConfig<2> cross;
  cross.particles.push_back({Vec2(0, 0), Vec2(0.1, 0), 1});
  cross.particles.push_back({Vec2(0.2, 0), Vec2(-0.1, 0), 1});
  EXPECT_NEAR(dynamic_separation(cross, centred_times(1)), 0.0, 1e-15);

  std::mt19937_64 rng(7);
  auto c = random_config(rng, 6);
  const double before = dynamic_separation(c, centred_times(2));
  std::shuffle(c.particles.begin(), c.particles.end(), rng);
  EXPECT_DOUBLE_EQ(dynamic_separation(c, centred_times(2)), before);
}

TEST(ParticleConfigJson, RoundTrip) {
  std::mt19937_64 rng(8);
  const auto c = random_config(rng, 4);
  const auto j = to_json(c);
  ASSERT_TRUE(j.contains("positions"));
  ASSERT_TRUE(j.contains("velocities"));
  ASSERT_TRUE(j.contains("masses"));
  const auto back = config_from_json<2>(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.particles[i].x, c.particles[i].x);
    EXPECT_EQ(back.particles[i].v, c.particles[i].v);
    EXPECT_EQ(back.particles[i].m, c.particles[i].m);
  }
  auto bad = j;
  bad["masses"].push_back(1.0);
  EXPECT_THROW(config_from_json<2>(bad), std::invalid_argument);
  bad = j;
  bad["masses"][0] = -1.0;
  EXPECT_THROW(config_from_json<2>(bad), std::invalid_argument);
}
