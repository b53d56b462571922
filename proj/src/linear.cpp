#include "featrank/linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace featrank {

double LinearModel::predict(std::span<const double> row) const {
  if (row.size() != weights.size()) {
    throw EncodingMismatch("linear predict: expected " + std::to_string(weights.size()) + " columns, got " +
                           std::to_string(row.size()));
  }
  double out = intercept;
  for (std::size_t j = 0; j < row.size(); ++j) out += weights[j] * row[j];
  return out;
}

LinearModel fit_linear(const Matrix& x, std::span<const double> y, double lambda,
                       std::vector<std::string> column_names) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw InvalidSpec("ridge lambda must be finite and >= 0");
  if (y.size() != x.rows()) throw EncodingMismatch("fit_linear: target length does not match rows");
  if (x.rows() == 0) throw InsufficientData("fit_linear: no rows");
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());

  LinearModel model;
  model.ridge_lambda = lambda;
  model.column_names = std::move(column_names);
  model.column_means.assign(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) model.column_means[c] += x(r, c);
  }
  for (auto& m : model.column_means) m /= static_cast<double>(x.rows());
  const double y_mean = mean(y);

  if (p == 0) {
    model.intercept = y_mean;
    return model;
  }

  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) {
      a(r, c) = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) - model.column_means[static_cast<std::size_t>(c)];
    }
    b(r) = y[static_cast<std::size_t>(r)] - y_mean;
  }

  Eigen::VectorXd w;
  if (lambda > 0.0) {
    // w = V diag(s / (s^2 + lambda)) U' b. Singular values under the
    // numerical-rank threshold are exact zeros (duplicated or collinear
    // columns) and contribute nothing, so tied columns get tied weights.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = (sv.size() > 0 ? sv(0) : 0.0) * static_cast<double>(std::max(n, p)) *
                       std::numeric_limits<double>::epsilon();
    Eigen::VectorXd coef = svd.matrixU().transpose() * b;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      coef(k) = sv(k) > tol ? coef(k) * sv(k) / (sv(k) * sv(k) + lambda) : 0.0;
    }
    w = svd.matrixV() * coef;
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < p) {
      throw SingularSystem("linear system is rank-deficient (rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(p) + "); use ridge lambda > 0");
    }
    w = qr.solve(b);
  }

  model.weights.assign(w.data(), w.data() + w.size());
  model.intercept = y_mean;
  for (std::size_t c = 0; c < model.weights.size(); ++c) {
    if (!std::isfinite(model.weights[c])) throw SingularSystem("non-finite weight in linear solution");
    model.intercept -= model.weights[c] * model.column_means[c];
  }
  return model;
}

LinearModel fit_linear(const DesignMatrix& x, double lambda) {
  return fit_linear(x.values, x.target, lambda, x.column_names);
}

std::string to_string(Sign sign) {
  switch (sign) {
    case Sign::positive:
      return "positive";
    case Sign::negative:
      return "negative";
    case Sign::zero:
      return "zero";
  }
  return "zero";
}

Sign sign_from_string(const std::string& s) {
  if (s == "positive") return Sign::positive;
  if (s == "negative") return Sign::negative;
  return Sign::zero;
}

std::map<std::string, Sign> feature_signs(const LinearModel& model, const std::map<std::string, std::string>& dummy_map,
                                          double epsilon) {
  std::map<std::string, double> totals;
  for (std::size_t c = 0; c < model.weights.size(); ++c) {
    const std::string& column = c < model.column_names.size() ? model.column_names[c] : std::to_string(c);
    auto it = dummy_map.find(column);
    totals[it == dummy_map.end() ? column : it->second] += model.weights[c];
  }
  std::map<std::string, Sign> signs;
  for (const auto& [feature, total] : totals) {
    signs[feature] = std::abs(total) < epsilon ? Sign::zero : (total > 0.0 ? Sign::positive : Sign::negative);
  }
  return signs;
}

nlohmann::json linear_to_json(const LinearModel& model) {
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t c = 0; c < model.weights.size(); ++c) {
    weights.push_back({{"column", model.column_names.at(c)},
                       {"weight", model.weights[c]},
                       {"mean", model.column_means.at(c)}});
  }
  return {{"model", "linear"},
          {"format_version", 1},
          {"intercept", model.intercept},
          {"ridge_lambda", model.ridge_lambda},
          {"weights", std::move(weights)}};
}

LinearModel linear_from_json(const nlohmann::json& j) {
  LinearModel model;
  model.intercept = j.at("intercept").get<double>();
  model.ridge_lambda = j.at("ridge_lambda").get<double>();
  for (const auto& w : j.at("weights")) {
    model.column_names.push_back(w.at("column").get<std::string>());
    model.weights.push_back(w.at("weight").get<double>());
    model.column_means.push_back(w.at("mean").get<double>());
  }
  return model;
}

}  // namespace featrank
