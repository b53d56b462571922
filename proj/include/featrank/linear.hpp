#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "featrank/common.hpp"
#include "featrank/schema.hpp"
#include "json.hpp"

namespace featrank {

struct LinearModel {
  std::vector<std::string> column_names;
  std::vector<double> weights;  // USD per unit of column
  double intercept = 0.0;
  double ridge_lambda = 0.0;
  std::vector<double> column_means;  // training means, for attribution

  double predict(std::span<const double> row) const;
};

/// Ridge regression with an unpenalized intercept:
/// minimizes sum (y - Xw - b)^2 + lambda * |w|^2 on internally centered columns.
/// Throws SingularSystem when lambda == 0 and X is rank-deficient.
LinearModel fit_linear(const Matrix& x, std::span<const double> y, double lambda,
                       std::vector<std::string> column_names = {});
LinearModel fit_linear(const DesignMatrix& x, double lambda);

enum class Sign { positive, negative, zero };

std::string to_string(Sign sign);
Sign sign_from_string(const std::string& s);

/// Feature directions from linear weights. Dummy columns are summed into
/// their parent before taking the sign; |score| < epsilon reads as zero.
std::map<std::string, Sign> feature_signs(const LinearModel& model, const std::map<std::string, std::string>& dummy_map,
                                          double epsilon = 1e-9);

nlohmann::json linear_to_json(const LinearModel& model);
LinearModel linear_from_json(const nlohmann::json& j);

}  // namespace featrank
