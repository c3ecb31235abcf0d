#include "dynsr/discretize.hpp"
#include "dynsr/measures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace dynsr;

namespace {

const GridSpec unit_cell = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 1);

void expect_columns_stochastic(const ProjectionMatrix& P) {
  const Eigen::RowVectorXd sums = Eigen::RowVectorXd::Ones(P.rows()) * P.weights;
  for (Eigen::Index j = 0; j < sums.size(); ++j) ASSERT_NEAR(sums(j), 1.0, 1e-10) << "column " << j;
  const Eigen::MatrixXd D = P.dense();
  EXPECT_GE(D.minCoeff(), 0.0);
  EXPECT_LE(D.maxCoeff(), 1.0);
}

}  // namespace

TEST(PolygonClip, Areas) {
  const Polygon sq = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  EXPECT_DOUBLE_EQ(polygon_area(sq), 1.0);
  EXPECT_NEAR(polygon_area(clip_halfplane(sq, Vec2(1, 0), 0.25)), 0.25, 1e-15);
  EXPECT_NEAR(polygon_area(clip_halfplane(sq, Vec2(1, 1), 1.0)), 0.5, 1e-15);
  EXPECT_TRUE(clip_halfplane(sq, Vec2(1, 0), -1.0).empty());
}

TEST(RadonMatrix, SingleCellExamples) {
  auto P = assemble_radon_matrix(unit_cell, Direction2(Vec2(1, 0)), make_grid(Interval{0, 1}, 2));
  EXPECT_NEAR(P.dense()(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(P.dense()(1, 0), 0.5, 1e-15);

  const double s = std::sqrt(0.5);
  P = assemble_radon_matrix(unit_cell, Direction2(Vec2(s, s)), make_grid(Interval{0, std::sqrt(2.0)}, 2));
  EXPECT_NEAR(P.dense()(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(P.dense()(1, 0), 0.5, 1e-12);

  // bins of width 1/4: the first holds a quarter, the other three together 3/4
  P = assemble_radon_matrix(unit_cell, Direction2(Vec2(1, 0)), make_grid(Interval{0, 1}, 4));
  const Eigen::MatrixXd D = P.dense();
  EXPECT_NEAR(D(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(D(1, 0) + D(2, 0) + D(3, 0), 0.75, 1e-15);
}

TEST(RadonMatrix, RejectsUncoveredBins) {
  EXPECT_THROW(assemble_radon_matrix(unit_cell, Direction2(Vec2(1, 0)), make_grid(Interval{0, 0.5}, 2)),
               std::invalid_argument);
}

TEST(MoveMatrix, TimeZeroIsRadonAlongFirstAxis) {
  const auto G = make_grid(projected_phase_domain(Direction2::from_angle(0.4), 1.0), 7);
  const auto bins = make_grid(bin_interval(Direction2::from_angle(0.4), 0.0, 1.0), 7);
  const Eigen::MatrixXd a = assemble_move_matrix(G, 0.0, bins).dense();
  const Eigen::MatrixXd b = assemble_radon_matrix(G, Direction2(Vec2(1, 0)), bins).dense();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MoveMatrix, MatchesDirectStripConstruction) {
  const auto theta = Direction2::from_angle(-0.9);
  const auto G = make_grid(projected_phase_domain(theta, 1.0), 9);
  for (double t : {-1.0, 0.3, 1.0, 1.8}) {
    const auto bins = make_grid(bin_interval(theta, t, 1.0), 9);
    const Eigen::MatrixXd a = assemble_move_matrix(G, t, bins).dense();
    const Eigen::MatrixXd b = assemble_strip_matrix(G, Vec2(1.0, t), bins).dense();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10) << "t = " << t;
  }
}

TEST(MoveMatrix, ColumnBarycenterFollowsTheMovedCellCenter) {
  const auto theta = Direction2::from_angle(0.2);
  const auto G = make_grid(projected_phase_domain(theta, 1.0), 12);
  const double t = 0.7;
  const auto bins = make_grid(bin_interval(theta, t, 1.0), 12);
  const Eigen::MatrixXd P = assemble_move_matrix(G, t, bins).dense();
  const double width = bins.interval().length() / 12;
  for (Eigen::Index j = 0; j < G.cell_count(); ++j) {
    const Vec2 c = G.cell_center(j);
    const auto moved = move1d(DiscreteMeasure<2>({c}, {1.0}), t);
    double bary = 0.0;
    for (Eigen::Index i = 0; i < P.rows(); ++i) bary += P(i, j) * bins.center_1d(i);
    EXPECT_NEAR(bary, moved.points[0][0], 0.5 * width + 1e-12);
    const Eigen::VectorXd r = rasterize(moved, bins);
    Eigen::Index hit = 0;
    r.maxCoeff(&hit);
    EXPECT_GT(P(hit, j), 0.0);
  }
}

TEST(ProjectionMatrix, ColumnsSumToOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-M_PI / 2, M_PI / 2), tt(-2.5, 2.5);
  for (int k = 0; k < 10; ++k) {
    const auto theta = Direction2::from_angle(ang(rng));
    const double t = tt(rng);
    const int M = 5 + 3 * k;
    const auto G = make_grid(projected_phase_domain(theta, 1.0), M);
    const auto U = make_grid(snapshot_domain<2>(t, 1.0), M);
    const auto bins = make_grid(bin_interval(theta, t, 1.0), M);
    expect_columns_stochastic(assemble_move_matrix(G, t, bins));
    expect_columns_stochastic(assemble_radon_matrix(U, theta, bins));
  }
}

TEST(ProjectionMatrix, AdjointConsistency) {
  const auto theta = Direction2::from_angle(0.6);
  const auto U = make_grid(snapshot_domain<2>(0.0, 1.0), 10);
  const auto bins = make_grid(bin_interval(theta, 0.0, 1.0), 10);
  const auto P = assemble_radon_matrix(U, theta, bins);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Eigen::VectorXd a(P.cols()), b(P.rows());
  for (auto& v : a) v = g(rng);
  for (auto& v : b) v = g(rng);
  const Eigen::VectorXd Pa = P.weights * a;
  const Eigen::VectorXd PTb = P.weights.transpose() * b;
  EXPECT_NEAR(Pa.dot(b), a.dot(PTb), 1e-12);
}

TEST(FourierMatrix, Shape) {
  const auto U = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 4);
  const auto F = assemble_fourier_matrix(U, 2);
  EXPECT_EQ(F.frequencies.size(), 25u);
  EXPECT_EQ(F.matrix.rows(), 50);
  EXPECT_EQ(observation_size(2), 50);
  EXPECT_EQ(5 * observation_size(2), 250);
  // xi = (0,0) rows
  const auto zero = std::find(F.frequencies.begin(), F.frequencies.end(), Eigen::Vector2i(0, 0)) - F.frequencies.begin();
  EXPECT_TRUE((F.matrix.row(zero).array() == 1.0).all());
  EXPECT_TRUE((F.matrix.row(25 + zero).array() == 0.0).all());
}

TEST(FourierMatrix, CellAtOriginAndColumnsMatchAnalytic) {
  // cell centred at the origin
  const auto U = make_grid(Box<2>{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 1);
  const auto F = assemble_fourier_matrix(U, 2);
  EXPECT_TRUE((F.matrix.topRows(25).array() == 1.0).all());
  EXPECT_LT(F.matrix.bottomRows(25).cwiseAbs().maxCoeff(), 1e-15);

  const auto V = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 6);
  const auto H = assemble_fourier_matrix(V, 2);
  for (Eigen::Index j = 0; j < V.cell_count(); j += 5) {
    const Eigen::VectorXd ref = fourier_observation(DiscreteMeasure<2>({V.cell_center(j)}, {1.0}), 2);
    EXPECT_LT((H.matrix.col(j) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Rasterize, Examples) {
  const auto U = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 4);
  auto w = rasterize(DiscreteMeasure<2>({U.cell_center(5)}, {2.0}), U);
  EXPECT_DOUBLE_EQ(w(5), 2.0);
  EXPECT_DOUBLE_EQ(w.sum(), 2.0);
  w = rasterize(DiscreteMeasure<2>({Vec2(0.1, 0.1), Vec2(0.2, 0.15)}, {1.0, 0.5}), U);
  EXPECT_DOUBLE_EQ(w(0), 1.5);
  EXPECT_THROW(rasterize(DiscreteMeasure<2>({Vec2(1.5, 0.5)}, {1.0}), U), std::out_of_range);
  const auto B = make_grid(Interval{0, 1}, 4);
  const auto w1 = rasterize(DiscreteMeasure<1>({Point<1>(0.5), Point<1>(0.9)}, {1.0, 1.0}), B);
  EXPECT_DOUBLE_EQ(w1(1), 1.0);  // boundary point goes to the lower cell
  EXPECT_DOUBLE_EQ(w1(3), 1.0);
}

TEST(MatrixCache, RoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "dynsr_cache_test.bin").string();
  Eigen::MatrixXd m(3, 4);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, -0.125;
  const auto U = make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 4);
  const nlohmann::json key = {{"grid", grid_hash(U)}, {"cutoff", 2}};
  save_matrix_cache(path, key, m);
  const auto back = load_matrix_cache(path, key);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, m);
  EXPECT_FALSE(load_matrix_cache(path, nlohmann::json{{"grid", "other"}}).has_value());
  std::filesystem::remove(path);
  EXPECT_EQ(grid_hash(U), grid_hash(make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 4)));
  EXPECT_NE(grid_hash(U), grid_hash(make_grid(Box<2>{Vec2(0, 0), Vec2(1, 1)}, 5)));
}
