#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "featrank/config.hpp"
#include "featrank/schema.hpp"
#include "featrank/synthetic.hpp"

namespace featrank::testing {

// All-numeric design matrix; NaN cells become missing (imputed with 0).
inline DesignMatrix numeric_design(const Matrix& x, std::vector<double> y, MatrixView view = MatrixView::onehot) {
  DesignMatrix dm;
  dm.view = view;
  dm.values = x;
  dm.target = std::move(y);
  dm.missing_mask.assign(x.rows() * x.cols(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (std::isnan(x(r, c))) {
        dm.values(r, c) = 0.0;
        dm.missing_mask[r * x.cols() + c] = 1;
      }
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const std::string name = "x" + std::to_string(c);
    dm.column_names.push_back(name);
    dm.feature_names.push_back(name);
    dm.feature_levels.emplace_back();
    dm.column_kinds.push_back(ColumnKind::numerical);
    dm.column_feature.push_back(c);
    dm.level_counts.push_back(0);
    dm.fill_values.push_back(0.0);
  }
  for (std::size_t r = 0; r < x.rows(); ++r) dm.product_ids.push_back("P" + std::to_string(r));
  return dm;
}

inline Matrix random_matrix(std::size_t n, std::size_t p, Rng& rng, double lo = 0.0, double hi = 10.0) {
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.uniform(lo, hi);
  return x;
}

// The recovery spec: 50 * x1 + offsets {A: 0, B: 30} + nuisance features + noise.
inline SyntheticSpec recovery_spec(std::uint64_t seed, std::size_t n = 500, double sigma = 5.0,
                                   std::size_t nuisance = 3) {
  SyntheticSpec spec;
  spec.category_id = "recovery";
  spec.n_products = n;
  spec.numeric = {{"x1", 50.0, 0.0, 10.0, "lb"}};
  spec.categorical = {{"color", {{"A", 0.0}, {"B", 30.0}}}};
  spec.nuisance = nuisance;
  spec.noise_sigma = sigma;
  spec.seed = seed;
  return spec;
}

struct Views {
  CategorySchema schema;
  DesignMatrix onehot;
  DesignMatrix native;
};

inline Views encode_both(const CategoryCorpus& corpus) {
  Views v;
  v.schema = infer_schema(corpus);
  v.onehot = encode(corpus, v.schema, MatrixView::onehot);
  v.native = encode(corpus, v.schema, MatrixView::native);
  return v;
}

// Small grids and few trees so a category trains in well under a second.
inline RunConfig fast_config() {
  RunConfig c;
  c.gbdt_defaults.n_trees = 30;
  c.leafwise_grid = {{0.1}, {8}};
  c.ordinal_grid = {{0.2}, {3}};
  c.k_folds = 3;
  c.background_size = 16;
  c.min_products = 10;
  return c;
}

}  // namespace featrank::testing
