#pragma once

#include <span>
#include <vector>

namespace leadvel {

// Ordinary least squares with intercept; rank-deficient systems get the
// minimum-norm solution.
struct LinearModel {
  std::vector<double> coefficients;
  double intercept = 0.0;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

LinearModel train_linear(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& targets);

double predict_linear(const LinearModel& model, std::span<const double> features);

}  // namespace leadvel
