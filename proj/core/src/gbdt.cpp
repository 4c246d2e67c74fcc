#include "leadvel/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "leadvel/errors.hpp"

namespace leadvel {

namespace {

using json = nlohmann::ordered_json;

// Bin index = number of edges strictly less than x, so that
// bin(x) <= k  <=>  x <= edges[k].
int bin_of(const std::vector<double>& edges, double x) {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
}

// Quantile bin edges. When the feature has no more distinct values than bins,
// every distinct value below the maximum becomes an edge, which makes the
// binning exact.
std::vector<double> make_edges(const std::vector<std::vector<double>>& rows, size_t feature,
                               int bins) {
  std::vector<double> column(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) column[r] = rows[r][feature];
  std::sort(column.begin(), column.end());

  std::vector<double> distinct(column);
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> edges;
  if (distinct.size() <= static_cast<size_t>(bins)) {
    // Few enough distinct values that binning can be exact: every value below
    // the maximum is an edge.
    edges.assign(distinct.begin(), distinct.end() - 1);
    return edges;
  }
  // Population quantiles over the raw sorted column, deduplicated.
  edges.reserve(static_cast<size_t>(bins) - 1);
  for (int i = 1; i < bins; ++i) {
    const size_t pos = (static_cast<size_t>(i) * column.size()) / static_cast<size_t>(bins);
    const double edge = column[std::min(pos, column.size() - 1)];
    if ((edges.empty() || edge > edges.back()) && edge < column.back()) edges.push_back(edge);
  }
  return edges;
}

struct LeafStats {
  double sum = 0.0;
  size_t count = 0;
};

struct SplitChoice {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  int edge_index = -1;  // split sends bin <= edge_index left
};

// Rewrites the node array in preorder so the in-memory layout matches what
// deserializing the nested JSON form produces.
GbdtTree preorder_canonical(const GbdtTree& tree) {
  GbdtTree out;
  out.nodes.reserve(tree.nodes.size());
  std::function<int(int)> copy = [&](int index) {
    const int at = static_cast<int>(out.nodes.size());
    out.nodes.push_back(tree.nodes[static_cast<size_t>(index)]);
    if (!out.nodes[static_cast<size_t>(at)].is_leaf) {
      const int left = copy(out.nodes[static_cast<size_t>(at)].left);
      out.nodes[static_cast<size_t>(at)].left = left;
      const int right = copy(out.nodes[static_cast<size_t>(at)].right);
      out.nodes[static_cast<size_t>(at)].right = right;
    }
    return at;
  };
  copy(0);
  return out;
}

struct Leaf {
  std::vector<std::uint32_t> rows;
  double residual_sum = 0.0;
  SplitChoice best;
  int node_index = -1;  // position in the flat tree being built
};

// Best histogram split of one leaf under min_samples_leaf, by squared-error
// gain sum^2/n_L + sum^2/n_R - sum^2/n_P. Deterministic tie-breaks: strictly
// greater gain wins while scanning features then edges in ascending order.
SplitChoice best_split(const Leaf& leaf, const std::vector<std::vector<std::uint8_t>>& binned,
                       const std::vector<double>& residuals,
                       const std::vector<std::vector<double>>& edges, int min_samples_leaf) {
  SplitChoice choice;
  const double parent_sum = leaf.residual_sum;
  const auto parent_count = static_cast<double>(leaf.rows.size());
  const double parent_score = parent_sum * parent_sum / parent_count;

  std::vector<LeafStats> hist;
  for (size_t f = 0; f < edges.size(); ++f) {
    const size_t n_bins = edges[f].size() + 1;
    if (n_bins < 2) continue;
    hist.assign(n_bins, LeafStats{});
    const std::vector<std::uint8_t>& feature_bins = binned[f];
    for (const std::uint32_t row : leaf.rows) {
      LeafStats& s = hist[feature_bins[row]];
      s.sum += residuals[row];
      s.count += 1;
    }
    double left_sum = 0.0;
    size_t left_count = 0;
    for (size_t k = 0; k + 1 < n_bins; ++k) {
      left_sum += hist[k].sum;
      left_count += hist[k].count;
      const size_t right_count = leaf.rows.size() - left_count;
      if (left_count < static_cast<size_t>(min_samples_leaf) ||
          right_count < static_cast<size_t>(min_samples_leaf)) {
        continue;
      }
      const double right_sum = parent_sum - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                          right_sum * right_sum / static_cast<double>(right_count) -
                          parent_score;
      if (gain > choice.gain) {
        choice.gain = gain;
        choice.feature = static_cast<int>(f);
        choice.edge_index = static_cast<int>(k);
      }
    }
  }
  return choice;
}

}  // namespace

double GbdtTree::value_at(std::span<const double> features) const {
  int node = 0;
  while (!nodes[static_cast<size_t>(node)].is_leaf) {
    const GbdtNode& n = nodes[static_cast<size_t>(node)];
    node = features[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<size_t>(node)].value;
}

GbdtModel train_gbdt(const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& targets, const GbdtParams& params) {
  if (rows.size() < 2) {
    raise(ErrorKind::too_few_samples, "training needs at least 2 rows");
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
  for (double t : targets) {
    if (!std::isfinite(t)) raise(ErrorKind::config_invalid, "non-finite training target");
  }
  if (params.rounds < 0 || params.max_leaves < 2 || params.min_samples_leaf < 1 ||
      params.bins < 2 || !(params.learning_rate > 0.0)) {
    raise(ErrorKind::config_invalid, "invalid GBDT parameters");
  }

  GbdtModel model;
  model.params = params;
  model.base_score =
      std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());

  model.bin_edges.resize(n_features);
  for (size_t f = 0; f < n_features; ++f) {
    model.bin_edges[f] = make_edges(rows, f, params.bins);
  }

  // Pre-binned feature matrix, column major. Edge counts never exceed
  // bins - 1 <= 254, so a byte per cell suffices.
  std::vector<std::vector<std::uint8_t>> binned(n_features);
  for (size_t f = 0; f < n_features; ++f) {
    binned[f].resize(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      binned[f][r] = static_cast<std::uint8_t>(bin_of(model.bin_edges[f], rows[r][f]));
    }
  }

  const bool splittable =
      std::any_of(binned.begin(), binned.end(),
                  [](const std::vector<std::uint8_t>& col) {
                    return !col.empty() &&
                           std::any_of(col.begin(), col.end(),
                                       [&col](std::uint8_t b) { return b != col.front(); });
                  });
  const bool targets_vary =
      std::any_of(targets.begin(), targets.end(),
                  [&targets](double t) { return t != targets.front(); });
  const bool features_identical =
      std::all_of(rows.begin(), rows.end(),
                  [&rows](const std::vector<double>& r) { return r == rows.front(); });
  if (features_identical && targets_vary) {
    model.degenerate = true;
    return model;
  }
  if (!splittable) return model;

  std::vector<double> residuals(targets.size());
  for (size_t r = 0; r < targets.size(); ++r) residuals[r] = targets[r] - model.base_score;

  for (int round = 0; round < params.rounds; ++round) {
    GbdtTree tree;
    std::vector<Leaf> leaves;

    Leaf root;
    root.rows.resize(rows.size());
    std::iota(root.rows.begin(), root.rows.end(), 0u);
    root.residual_sum = std::accumulate(residuals.begin(), residuals.end(), 0.0);
    root.best = best_split(root, binned, residuals, model.bin_edges, params.min_samples_leaf);
    root.node_index = 0;
    tree.nodes.push_back(GbdtNode{});
    leaves.push_back(std::move(root));

    if (leaves.front().best.feature < 0 || leaves.front().best.gain < params.min_gain) {
      break;  // nothing left worth fitting; boosting stops here
    }

    while (static_cast<int>(leaves.size()) < params.max_leaves) {
      // Leaf-wise growth: split the open leaf with the highest gain, earliest
      // leaf winning ties.
      int pick = -1;
      double pick_gain = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.feature >= 0 && leaves[i].best.gain > pick_gain) {
          pick_gain = leaves[i].best.gain;
          pick = static_cast<int>(i);
        }
      }
      if (pick < 0 || pick_gain < params.min_gain) break;

      Leaf& parent = leaves[static_cast<size_t>(pick)];
      const int feature = parent.best.feature;
      const int edge_index = parent.best.edge_index;
      const std::vector<std::uint8_t>& feature_bins = binned[static_cast<size_t>(feature)];

      Leaf left_leaf;
      Leaf right_leaf;
      for (const std::uint32_t row : parent.rows) {
        if (feature_bins[row] <= edge_index) {
          left_leaf.rows.push_back(row);
          left_leaf.residual_sum += residuals[row];
        } else {
          right_leaf.rows.push_back(row);
          right_leaf.residual_sum += residuals[row];
        }
      }

      GbdtNode& split_node = tree.nodes[static_cast<size_t>(parent.node_index)];
      split_node.is_leaf = false;
      split_node.feature = feature;
      split_node.threshold = model.bin_edges[static_cast<size_t>(feature)][static_cast<size_t>(edge_index)];
      split_node.left = static_cast<int>(tree.nodes.size());
      split_node.right = static_cast<int>(tree.nodes.size() + 1);
      left_leaf.node_index = split_node.left;
      right_leaf.node_index = split_node.right;
      tree.nodes.push_back(GbdtNode{});
      tree.nodes.push_back(GbdtNode{});

      left_leaf.best =
          best_split(left_leaf, binned, residuals, model.bin_edges, params.min_samples_leaf);
      right_leaf.best =
          best_split(right_leaf, binned, residuals, model.bin_edges, params.min_samples_leaf);

      // Replace the parent entry in place to keep creation order stable.
      leaves[static_cast<size_t>(pick)] = std::move(left_leaf);
      leaves.push_back(std::move(right_leaf));
    }

    // Leaf values: mean residual scaled by the learning rate.
    for (const Leaf& leaf : leaves) {
      const double mean = leaf.residual_sum / static_cast<double>(leaf.rows.size());
      const double value = params.learning_rate * mean;
      tree.nodes[static_cast<size_t>(leaf.node_index)].value = value;
      for (const std::uint32_t row : leaf.rows) residuals[row] -= value;
    }
    model.trees.push_back(preorder_canonical(tree));
  }
  return model;
}

double predict_gbdt(const GbdtModel& model, std::span<const double> features) {
  if (features.size() != model.feature_count()) {
    raise(ErrorKind::feature_length_mismatch,
          "model expects " + std::to_string(model.feature_count()) + " features, got " +
              std::to_string(features.size()));
  }
  double prediction = model.base_score;
  for (const GbdtTree& tree : model.trees) {
    prediction += tree.value_at(features);
  }
  return prediction;
}

namespace {

json node_to_json(const GbdtTree& tree, int index) {
  const GbdtNode& node = tree.nodes[static_cast<size_t>(index)];
  json j;
  if (node.is_leaf) {
    j["value"] = node.value;
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
  }
  return j;
}

int node_from_json(const json& j, GbdtTree& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(GbdtNode{});
  if (j.contains("value")) {
    tree.nodes[static_cast<size_t>(index)].value = j.at("value").get<double>();
    return index;
  }
  GbdtNode node;
  node.is_leaf = false;
  node.feature = j.at("feature").get<int>();
  node.threshold = j.at("threshold").get<double>();
  tree.nodes[static_cast<size_t>(index)] = node;
  const int left = node_from_json(j.at("left"), tree);
  const int right = node_from_json(j.at("right"), tree);
  tree.nodes[static_cast<size_t>(index)].left = left;
  tree.nodes[static_cast<size_t>(index)].right = right;
  return index;
}

}  // namespace

std::string gbdt_to_json(const GbdtModel& model) {
  json doc;
  doc["format_version"] = 1;
  doc["model_type"] = "gbdt";
  doc["params"] = {{"rounds", model.params.rounds},
                   {"learning_rate", model.params.learning_rate},
                   {"max_leaves", model.params.max_leaves},
                   {"min_samples_leaf", model.params.min_samples_leaf},
                   {"bins", model.params.bins},
                   {"min_gain", model.params.min_gain}};
  doc["base_score"] = model.base_score;
  doc["degenerate"] = model.degenerate;
  doc["bin_edges"] = model.bin_edges;
  json trees = json::array();
  for (const GbdtTree& tree : model.trees) {
    trees.push_back(node_to_json(tree, 0));
  }
  doc["trees"] = std::move(trees);
  return doc.dump(2) + "\n";
}

GbdtModel gbdt_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::malformed_json, std::string("model JSON: ") + e.what());
  }
  if (doc.value("model_type", "") != "gbdt" || doc.value("format_version", 0) != 1) {
    raise(ErrorKind::malformed_json, "not a version-1 gbdt model document");
  }
  GbdtModel model;
  const json& p = doc.at("params");
  model.params.rounds = p.at("rounds").get<int>();
  model.params.learning_rate = p.at("learning_rate").get<double>();
  model.params.max_leaves = p.at("max_leaves").get<int>();
  model.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
  model.params.bins = p.at("bins").get<int>();
  model.params.min_gain = p.at("min_gain").get<double>();
  model.base_score = doc.at("base_score").get<double>();
  model.degenerate = doc.value("degenerate", false);
  model.bin_edges = doc.at("bin_edges").get<std::vector<std::vector<double>>>();
  for (const json& tj : doc.at("trees")) {
    GbdtTree tree;
    node_from_json(tj, tree);
    model.trees.push_back(preorder_canonical(tree));
  }
  return model;
}

}  // namespace leadvel
