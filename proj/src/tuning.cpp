#include "featrank/tuning.hpp"

#include <numeric>

namespace featrank {

std::vector<Hyperparams> make_grid(GbdtVariant variant, const std::vector<double>& learning_rates,
                                   const std::vector<int>& sizes, const Hyperparams& base) {
  std::vector<Hyperparams> grid;
  for (double lr : learning_rates) {
    for (int size : sizes) {
      Hyperparams hp = base;
      hp.learning_rate = lr;
      if (variant == GbdtVariant::leafwise_onehot) {
        hp.num_leaves = size;
      } else {
        hp.depth = size;
      }
      grid.push_back(hp);
    }
  }
  return grid;
}

std::vector<Hyperparams> default_grid(GbdtVariant variant, const Hyperparams& base) {
  if (variant == GbdtVariant::leafwise_onehot) {
    return make_grid(variant, {0.04, 0.05, 0.06, 0.09}, {25, 30, 35, 40}, base);
  }
  return make_grid(variant, {0.10, 0.15, 0.20, 0.25}, {3, 6, 9, 12}, base);
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  const auto order = Rng(seed).permutation(n);
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = i % k;
  return fold;
}

CvResult grid_search_cv(const DesignMatrix& x, const std::vector<Hyperparams>& grid, std::size_t k_folds,
                        std::uint64_t seed, GbdtVariant variant, const GbdtOptions& options) {
  if (k_folds < 2) throw InsufficientData("grid_search_cv: k_folds must be >= 2");
  if (x.rows() < k_folds) {
    throw InsufficientData("grid_search_cv: " + std::to_string(x.rows()) + " rows for " + std::to_string(k_folds) +
                           " folds");
  }
  if (grid.empty()) throw InvalidSpec("grid_search_cv: empty grid");

  CvResult result;
  result.variant = variant;
  result.seed = seed;
  result.k_folds = k_folds;
  result.fold_of = assign_folds(x.rows(), k_folds, seed);

  std::vector<DesignMatrix> train(k_folds), held_out(k_folds);
  std::vector<Matrix> held_out_rows(k_folds);
  for (std::size_t f = 0; f < k_folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t r = 0; r < x.rows(); ++r) (result.fold_of[r] == f ? te : tr).push_back(r);
    train[f] = x.select_rows(tr);
    held_out[f] = x.select_rows(te);
    held_out_rows[f] = held_out[f].with_missing_as_nan();
  }

  for (const auto& hp : grid) {
    GridPointResult point;
    point.hyperparams = hp;
    for (std::size_t f = 0; f < k_folds; ++f) {
      const GbdtModel model = fit_gbdt(train[f], hp, variant, options);
      point.fold_rmse.push_back(rmse(model.predict(held_out_rows[f]), held_out[f].target));
    }
    point.mean_rmse = mean(point.fold_rmse);
    result.points.push_back(std::move(point));
  }

  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.points[i].mean_rmse < result.points[result.best_index].mean_rmse) result.best_index = i;
  }
  result.best_hyperparams = result.points[result.best_index].hyperparams;
  return result;
}

nlohmann::json cv_result_to_json(const CvResult& cv) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : cv.points) {
    points.push_back(
        {{"hyperparams", hyperparams_to_json(p.hyperparams)}, {"mean_rmse", p.mean_rmse}, {"fold_rmse", p.fold_rmse}});
  }
  return {{"variant", to_string(cv.variant)},
          {"seed", cv.seed},
          {"k_folds", cv.k_folds},
          {"best_index", cv.best_index},
          {"best_hyperparams", hyperparams_to_json(cv.best_hyperparams)},
          {"points", std::move(points)}};
}

}  // namespace featrank
