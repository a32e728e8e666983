#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "clindiag/encoding.hpp"
#include "clindiag/qp.hpp"

namespace clindiag {

struct TrainOptions {
  double C = 1.0;
  double tol = 1e-3;
  std::int64_t max_passes = 1000;
};

struct SupportEntry {
  Eigen::Index index = 0;  // row in the training dataset
  double alpha = 0.0;
  double label = 0.0;
};

struct TrainingSummary {
  Eigen::Index size = 0;
  std::int64_t iterations = 0;
  double kkt_violation = 0.0;
  double objective = 0.0;
  double tol = 0.0;
  bool converged = true;
};

/// Linear decision function w . x + b. When `scaling` is set, inputs to the
/// prediction functions are raw vectors and the stored transform is applied
/// first.
struct SvmModel {
  Eigen::VectorXd weights;
  double offset = 0.0;
  double C = 1.0;
  std::vector<SupportEntry> support;
  std::optional<Scaling> scaling;
  TrainingSummary training_summary;

  Eigen::Index dims() const { return weights.size(); }
  bool standardized() const { return scaling.has_value(); }
};

/// Trains on `dataset` (already scaled if its scaling is set). A solver that
/// runs out of passes yields a model with training_summary.converged == false.
SvmModel train(const LabeledDataset& dataset, const TrainOptions& options = {});

/// Solves the dual for `dataset` and returns the raw multipliers; used by
/// train() and handy for diagnostics.
qp::DualSolution<double> solve_dataset_dual(const LabeledDataset& dataset, const TrainOptions& options);

double decision_value(const SvmModel& model, const FeatureVector& x);
/// +1 when decision_value >= 0 (a point on the hyperplane counts as positive).
int predict(const SvmModel& model, const FeatureVector& x);
/// Geometric distance |w . x + b| / ||w||.
double margin_distance(const SvmModel& model, const FeatureVector& x);

struct TreeOptions {
  TrainOptions train;
  int max_depth = 3;
  Eigen::Index min_leaf_size = 5;
};

/// Flat node storage; children refer to indices in PartitionTree::nodes.
struct TreeNode {
  bool leaf = true;
  int label = 1;
  double purity = 1.0;
  Eigen::Index size = 0;
  SvmModel model;  // meaningful only when !leaf
  std::size_t positive_child = 0;
  std::size_t negative_child = 0;
};

/// Classifier built by repeatedly splitting each side of a hyperplane with a
/// new hyperplane; its class regions need not be connected.
struct PartitionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int max_depth = 3;
  Eigen::Index min_leaf_size = 5;
  Eigen::Index dims = 0;

  const TreeNode& root() const { return nodes.front(); }
  /// Number of splits on the longest root-to-leaf path.
  int depth() const;
};

PartitionTree train_partition_tree(const LabeledDataset& dataset, const TreeOptions& options = {});

/// Routes x to a leaf. `last_decision`, when given, receives the decision
/// value of the final split on the path (0 for a single-leaf tree).
int predict_tree(const PartitionTree& tree, const FeatureVector& x, double* last_decision = nullptr);

using Classifier = std::variant<SvmModel, PartitionTree>;

Eigen::Index classifier_dims(const Classifier& classifier);
int classify(const Classifier& classifier, const FeatureVector& x);
/// Decision value of a linear model, or of the last split a tree consults.
double classifier_decision(const Classifier& classifier, const FeatureVector& x);

}  // namespace clindiag
