#include "leadvel/linear.hpp"

#include <Eigen/Dense>

#include "leadvel/errors.hpp"

namespace leadvel {

LinearModel train_linear(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& targets) {
  if (rows.empty()) {
    raise(ErrorKind::too_few_samples, "training needs at least 1 row");
  }
  if (rows.size() != targets.size()) {
    raise(ErrorKind::length_mismatch, "rows and targets differ in length");
  }
  const size_t n_features = rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != n_features) {
      raise(ErrorKind::feature_length_mismatch, "ragged feature rows");
    }
  }

  Eigen::MatrixXd design(rows.size(), n_features + 1);
  Eigen::VectorXd y(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t f = 0; f < n_features; ++f) design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = rows[r][f];
    design(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n_features)) = 1.0;
    y(static_cast<Eigen::Index>(r)) = targets[r];
  }

  const Eigen::VectorXd beta = design.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);

  LinearModel model;
  model.coefficients.assign(beta.data(), beta.data() + n_features);
  model.intercept = beta(static_cast<Eigen::Index>(n_features));
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> features) {
  if (features.size() != model.coefficients.size()) {
    raise(ErrorKind::feature_length_mismatch,
          "model expects " + std::to_string(model.coefficients.size()) + " features, got " +
              std::to_string(features.size()));
  }
  double out = model.intercept;
  for (size_t f = 0; f < features.size(); ++f) out += model.coefficients[f] * features[f];
  return out;
}

}  // namespace leadvel
