#pragma once

#include <span>
#include <string>
#include <vector>

namespace leadvel {

struct GbdtParams {
  int rounds = 200;
  double learning_rate = 0.1;
  int max_leaves = 31;
  int min_samples_leaf = 20;
  int bins = 255;
  double min_gain = 1e-12;

  friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

// One node of a regression tree. Split nodes route x[feature] <= threshold to
// the left child; thresholds are always bin edges of the feature. Leaf values
// are already scaled by the learning rate, so prediction is a plain sum.
struct GbdtNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  friend bool operator==(const GbdtNode&, const GbdtNode&) = default;
};

struct GbdtTree {
  std::vector<GbdtNode> nodes;  // nodes[0] is the root

  double value_at(std::span<const double> features) const;

  friend bool operator==(const GbdtTree&, const GbdtTree&) = default;
};

struct GbdtModel {
  GbdtParams params;
  double base_score = 0.0;
  // Set when every training row had identical features but targets differed;
  // the model is then base_score only.
  bool degenerate = false;
  std::vector<std::vector<double>> bin_edges;  // per feature, ascending
  std::vector<GbdtTree> trees;

  size_t feature_count() const { return bin_edges.size(); }

  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

// Deterministic histogram gradient boosting for squared error: base_score is
// the target mean, each round fits one leaf-wise tree to the residuals over
// quantile-binned features. Ties in gain resolve to the lowest feature index,
// then the lowest bin edge.
GbdtModel train_gbdt(const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets, const GbdtParams& params);

double predict_gbdt(const GbdtModel& model, std::span<const double> features);

// Versioned JSON with exact float round-trip; training determinism makes the
// serialized form byte-stable.
std::string gbdt_to_json(const GbdtModel& model);
GbdtModel gbdt_from_json(const std::string& text);

}  // namespace leadvel
