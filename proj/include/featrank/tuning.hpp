#pragma once

#include <cstdint>
#include <vector>

#include "featrank/gbdt.hpp"
#include "featrank/schema.hpp"
#include "json.hpp"

namespace featrank {

struct GridPointResult {
  Hyperparams hyperparams;
  std::vector<double> fold_rmse;
  double mean_rmse = 0.0;
};

struct CvResult {
  GbdtVariant variant = GbdtVariant::leafwise_onehot;
  std::vector<GridPointResult> points;  // grid order
  std::size_t best_index = 0;
  Hyperparams best_hyperparams;
  std::uint64_t seed = 0;
  std::size_t k_folds = 0;
  std::vector<std::size_t> fold_of;  // fold id per row
};

/// The tuning grids: learning rate x num_leaves for the leafwise variant,
/// learning rate x depth for the ordinal one. `base` supplies the remaining
/// hyperparameters.
std::vector<Hyperparams> default_grid(GbdtVariant variant, const Hyperparams& base = {});
std::vector<Hyperparams> make_grid(GbdtVariant variant, const std::vector<double>& learning_rates,
                                   const std::vector<int>& sizes, const Hyperparams& base);

/// Seeded shuffle, then row at shuffled position i goes to fold i mod k.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);

/// Mean held-out RMSE per grid point; ties on the minimum go to the earliest
/// grid point.
CvResult grid_search_cv(const DesignMatrix& x, const std::vector<Hyperparams>& grid, std::size_t k_folds,
                        std::uint64_t seed, GbdtVariant variant, const GbdtOptions& options = {});

nlohmann::json cv_result_to_json(const CvResult& cv);

}  // namespace featrank
