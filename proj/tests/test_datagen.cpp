#include "dynsr/datagen.hpp"
#include "dynsr/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace dynsr;

TEST(SampleConfig, DomainCountAndMasses) {
  DatasetSpec spec;
  Rng rng(51);
  double mass = 0.0;
  int atoms = 0;
  std::vector<int> counts(21, 0);
  while (atoms < 10000) {
    const auto c = sample_config(spec, rng);
    ASSERT_GE(c.size(), 4u);
    ASSERT_LE(c.size(), 20u);
    ++counts[c.size()];
    for (const auto& p : c.particles) {
      ASSERT_TRUE(phase_domain_contains<2>(p.x, p.v, 1.0));
      ASSERT_GE(p.m, 0.9);
      ASSERT_LE(p.m, 1.1);
      mass += p.m;
      ++atoms;
    }
  }
  EXPECT_NEAR(mass / atoms, 1.0, 0.01);
  EXPECT_GT(counts[4], 0);
  EXPECT_GT(counts[20], 0);
}

TEST(SampleConfig, FixedSeedGivesIdenticalBytes) {
  DatasetSpec spec;
  spec.count = 5;
  Rng a(spec.seed), b(spec.seed);
  const Dataset da{spec, rejection_sample_dataset(spec, a)}, db{spec, rejection_sample_dataset(spec, b)};
  EXPECT_EQ(dataset_to_jsonl(da), dataset_to_jsonl(db));
  Rng c(spec.seed + 1);
  EXPECT_NE(dataset_to_jsonl(da), dataset_to_jsonl(Dataset{spec, rejection_sample_dataset(spec, c)}));
}

TEST(RejectionSampling, SeparationIsBalanced) {
  DatasetSpec spec;
  spec.count = 2000;
  Rng rng(52);
  SamplingStats stats;
  const auto data = rejection_sample_dataset(spec, rng, &stats);
  ASSERT_EQ(data.size(), 2000u);

  std::vector<double> sep;
  std::vector<int> hist(20, 0);
  for (const auto& c : data) {
    for (const auto& p : c.particles) ASSERT_TRUE(phase_domain_contains<2>(p.x, p.v, 1.0));
    const double s = dynamic_separation(c, spec.times);
    ASSERT_LE(s, 0.1);
    sep.push_back(s);
    ++hist[std::min(19, int(s / 0.1 * 20))];
  }
  EXPECT_EQ(hist, stats.histogram);
  const int lo = *std::min_element(hist.begin(), hist.end()), hi = *std::max_element(hist.begin(), hist.end());
  ASSERT_GT(lo, 0);
  EXPECT_LE(double(hi) / lo, 1.5);

  std::sort(sep.begin(), sep.end());
  double ks = 0.0;
  const double n = double(sep.size());
  for (std::size_t i = 0; i < sep.size(); ++i) {
    const double F = sep[i] / 0.1;
    ks = std::max({ks, std::abs(F - i / n), std::abs((i + 1) / n - F)});
  }
  EXPECT_LE(ks, 0.05);
}

TEST(RejectionSampling, BudgetExceeded) {
  DatasetSpec spec;
  spec.count = 3;
  spec.sep_max = 1e-9;  // practically unreachable
  spec.n_min = spec.n_max = 2;
  Rng rng(53);
  EXPECT_THROW(rejection_sample_dataset(spec, rng), std::runtime_error);
}

TEST(Measure, StackedDimension) {
  DatasetSpec spec;
  Rng rng(54);
  const auto c = sample_config(spec, rng);
  const auto f = measure(c, centred_times(2), 2);
  Eigen::Index D = 0;
  for (const auto& v : f) D += v.size();
  EXPECT_EQ(D, 250);
}

TEST(AddNoise, ZeroDeltaAndCalibration) {
  DatasetSpec spec;
  Rng rng(55);
  const auto f = measure(sample_config(spec, rng), centred_times(2), 2);
  const auto same = add_noise(f, 0.0, rng);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_TRUE((same[i].array() == f[i].array()).all());
  EXPECT_THROW(add_noise(f, -1.0, rng), std::invalid_argument);

  for (double delta : {0.1, 3.0}) {
    double acc = 0.0;
    const int draws = 1000;
    for (int k = 0; k < draws; ++k) {
      const auto g = add_noise(f, delta, rng);
      double e = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) e += 0.5 * (g[i] - f[i]).squaredNorm();
      acc += e / delta;
    }
    EXPECT_NEAR(acc / draws, 1.0, 0.1);
  }
}

TEST(Thin, UniformByIndex) {
  const std::vector<int> v = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(thin(v, 5), (std::vector<int>{0, 2, 4, 6, 8}));
  EXPECT_EQ(thin(v, 20), v);
}

TEST(DatasetIo, RoundTrip) {
  DatasetSpec spec;
  spec.count = 4;
  Rng rng(56);
  const Dataset d{spec, rejection_sample_dataset(spec, rng)};
  const auto text = dataset_to_jsonl(d);
  const auto back = read_dataset_text(text);
  EXPECT_EQ(dataset_to_jsonl(back), text);
  EXPECT_THROW(read_dataset_text("{\"type\":\"bogus\"}\n"), std::runtime_error);
  EXPECT_THROW(read_dataset_text(""), std::runtime_error);
}
