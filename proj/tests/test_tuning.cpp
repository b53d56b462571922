#include <gtest/gtest.h>

#include <set>

#include "featrank/tuning.hpp"
#include "helpers.hpp"

using namespace featrank;
using namespace featrank::testing;

TEST(DefaultGrid, Values) {
  const auto leafwise = default_grid(GbdtVariant::leafwise_onehot);
  ASSERT_EQ(leafwise.size(), 16u);
  std::set<double> lrs;
  std::set<int> leaves;
  for (const auto& hp : leafwise) lrs.insert(hp.learning_rate), leaves.insert(hp.num_leaves);
  EXPECT_EQ(lrs, (std::set<double>{0.04, 0.05, 0.06, 0.09}));
  EXPECT_EQ(leaves, (std::set<int>{25, 30, 35, 40}));

  const auto ordinal = default_grid(GbdtVariant::ordinal_categorical);
  ASSERT_EQ(ordinal.size(), 16u);
  std::set<double> lrs2;
  std::set<int> depths;
  for (const auto& hp : ordinal) lrs2.insert(hp.learning_rate), depths.insert(hp.depth);
  EXPECT_EQ(lrs2, (std::set<double>{0.10, 0.15, 0.20, 0.25}));
  EXPECT_EQ(depths, (std::set<int>{3, 6, 9, 12}));

  // Learning rate varies slowest.
  EXPECT_EQ(ordinal[0].learning_rate, 0.10);
  EXPECT_EQ(ordinal[1].learning_rate, 0.10);
  EXPECT_EQ(ordinal[1].depth, 6);
}

TEST(AssignFolds, BalancedAndSeeded) {
  const auto a = assign_folds(103, 5, 9);
  const auto b = assign_folds(103, 5, 9);
  const auto c = assign_folds(103, 5, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::vector<std::size_t> sizes(5, 0);
  for (auto f : a) ++sizes[f];
  for (auto s : sizes) EXPECT_TRUE(s == 20 || s == 21);
}

TEST(GridSearch, SinglePointGrid) {
  const auto gen = generate_synthetic(recovery_spec(1, 100, 5.0, 1));
  const auto v = encode_both(gen.corpus);
  Hyperparams hp;
  hp.n_trees = 10;
  const auto cv = grid_search_cv(v.onehot, {hp}, 4, 3, GbdtVariant::leafwise_onehot);
  ASSERT_EQ(cv.points.size(), 1u);
  EXPECT_EQ(cv.best_index, 0u);
  EXPECT_EQ(cv.points[0].fold_rmse.size(), 4u);
  EXPECT_EQ(cv.best_hyperparams, hp);
  EXPECT_DOUBLE_EQ(cv.points[0].mean_rmse, mean(cv.points[0].fold_rmse));
}

TEST(GridSearch, BestIsArgminAndDeterministic) {
  const auto gen = generate_synthetic(recovery_spec(2, 120, 5.0, 2));
  const auto v = encode_both(gen.corpus);
  Hyperparams base;
  base.n_trees = 20;
  const auto grid = make_grid(GbdtVariant::ordinal_categorical, {0.1, 0.3}, {2, 4}, base);
  const auto a = grid_search_cv(v.native, grid, 5, 17, GbdtVariant::ordinal_categorical);
  const auto b = grid_search_cv(v.native, grid, 5, 17, GbdtVariant::ordinal_categorical);
  EXPECT_EQ(cv_result_to_json(a).dump(), cv_result_to_json(b).dump());
  for (const auto& p : a.points) EXPECT_GE(p.mean_rmse, a.points[a.best_index].mean_rmse);
  for (std::size_t i = 0; i < a.best_index; ++i) EXPECT_GT(a.points[i].mean_rmse, a.points[a.best_index].mean_rmse);
}

TEST(GridSearch, TiesGoToEarliestPoint) {
  const auto gen = generate_synthetic(recovery_spec(3, 60, 5.0, 0));
  const auto v = encode_both(gen.corpus);
  Hyperparams hp;
  hp.n_trees = 5;
  const auto cv = grid_search_cv(v.onehot, {hp, hp, hp}, 3, 1, GbdtVariant::leafwise_onehot);
  EXPECT_EQ(cv.best_index, 0u);
}

TEST(GridSearch, PlantedShallowFunctionPrefersDepthThree) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    const std::size_t n = 150;
    Matrix x = random_matrix(n, 6, rng);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 10.0 * (x(i, 0) > 5) + 6.0 * (x(i, 1) > 5) * (x(i, 2) > 3) + rng.normal(0, 2.0);
    }
    const auto dm = numeric_design(x, y, MatrixView::native);
    Hyperparams base;
    base.n_trees = 100;
    base.min_samples_leaf = 1;
    const auto grid = make_grid(GbdtVariant::ordinal_categorical, {0.25}, {3, 12}, base);
    const auto cv = grid_search_cv(dm, grid, 5, seed, GbdtVariant::ordinal_categorical);
    if (cv.best_hyperparams.depth == 3) ++wins;
  }
  EXPECT_GE(wins, 4);
}

TEST(GridSearch, InsufficientData) {
  const auto gen = generate_synthetic(recovery_spec(3, 4, 5.0, 0));
  const auto v = encode_both(gen.corpus);
  EXPECT_THROW(grid_search_cv(v.onehot, {Hyperparams{}}, 5, 1, GbdtVariant::leafwise_onehot), InsufficientData);
  EXPECT_THROW(grid_search_cv(v.onehot, {Hyperparams{}}, 1, 1, GbdtVariant::leafwise_onehot), InsufficientData);
}
