#include "clindiag/svm.hpp"

#include <algorithm>
#include <cmath>

#include "clindiag/error.hpp"

namespace clindiag {

namespace {

void require_both_classes(const LabeledDataset& dataset) {
  if (dataset.positives() == 0)
    throw Error(ErrorCode::SingleClassDataset, "dataset has no +1 (positive) vectors");
  if (dataset.negatives() == 0)
    throw Error(ErrorCode::SingleClassDataset, "dataset has no -1 (negative) vectors");
}

FeatureVector prepare_input(const SvmModel& model, const FeatureVector& x) {
  if (x.size() != model.dims())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) + " components, model expects " +
                                                  std::to_string(model.dims()));
  return model.scaling ? model.scaling->apply(x) : x;
}

}  // namespace

qp::DualSolution<double> solve_dataset_dual(const LabeledDataset& dataset, const TrainOptions& options) {
  dataset.validate();
  require_both_classes(dataset);
  if (!(options.C > 0.0) || !std::isfinite(options.C))
    throw Error(ErrorCode::InvalidArgument, "C must be positive and finite");
  const auto problem = qp::QpProblem<double>::from_vectors(dataset.vectors, dataset.labels, options.C);
  return qp::solve_dual(problem, options.tol, options.max_passes);
}

SvmModel train(const LabeledDataset& dataset, const TrainOptions& options) {
  const auto solution = solve_dataset_dual(dataset, options);
  const auto problem = qp::QpProblem<double>::from_vectors(dataset.vectors, dataset.labels, options.C);

  SvmModel model;
  // w = sum_i a_i y_i x_i
  model.weights = dataset.vectors.transpose() * solution.alphas.cwiseProduct(dataset.labels);
  model.offset = solution.offset;
  model.C = options.C;
  model.scaling = dataset.scaling;
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    if (solution.alphas(i) > 0.0) model.support.push_back({i, solution.alphas(i), dataset.labels(i)});
  }
  model.training_summary = {dataset.size(),
                            solution.iterations,
                            qp::kkt_violation(problem, solution),
                            solution.objective,
                            options.tol,
                            solution.converged};
  return model;
}

double decision_value(const SvmModel& model, const FeatureVector& x) {
  const FeatureVector z = prepare_input(model, x);
  return model.weights.dot(z) + model.offset;
}

int predict(const SvmModel& model, const FeatureVector& x) { return decision_value(model, x) >= 0.0 ? 1 : -1; }

double margin_distance(const SvmModel& model, const FeatureVector& x) {
  const double norm = model.weights.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroWeightVector, "hyperplane has a zero weight vector");
  return std::abs(decision_value(model, x)) / norm;
}

int PartitionTree::depth() const {
  if (nodes.empty()) return 0;
  // Nodes are appended parent-before-child, so one forward sweep suffices.
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].leaf) {
      deepest = std::max(deepest, level[n]);
      continue;
    }
    level[nodes[n].positive_child] = level[n] + 1;
    level[nodes[n].negative_child] = level[n] + 1;
  }
  return deepest;
}

namespace {

TreeNode make_leaf(const LabeledDataset& part) {
  TreeNode leaf;
  const auto pos = part.positives();
  const auto neg = part.negatives();
  leaf.leaf = true;
  leaf.label = pos >= neg ? 1 : -1;
  leaf.size = part.size();
  leaf.purity = part.size() > 0 ? static_cast<double>(std::max(pos, neg)) / static_cast<double>(part.size()) : 1.0;
  return leaf;
}

std::size_t grow(PartitionTree& tree, const LabeledDataset& part, int depth, const TreeOptions& options) {
  const std::size_t self = tree.nodes.size();
  tree.nodes.push_back(make_leaf(part));
  const bool pure = part.positives() == 0 || part.negatives() == 0;
  if (pure || depth >= options.max_depth) return self;

  SvmModel model;
  try {
    model = train(part, options.train);
  } catch (const Error&) {
    return self;
  }
  if (!model.training_summary.converged) return self;

  std::vector<Eigen::Index> pos_side, neg_side;
  for (Eigen::Index i = 0; i < part.size(); ++i) {
    // The part is already in model space; the stored scaling must not be
    // applied a second time.
    const double f = model.weights.dot(part.vectors.row(i).transpose()) + model.offset;
    (f >= 0.0 ? pos_side : neg_side).push_back(i);
  }
  const auto min_leaf = static_cast<std::size_t>(options.min_leaf_size);
  if (pos_side.size() < min_leaf || neg_side.size() < min_leaf) return self;

  const LabeledDataset pos_part = part.subset(pos_side);
  const LabeledDataset neg_part = part.subset(neg_side);
  const std::size_t pos_child = grow(tree, pos_part, depth + 1, options);
  const std::size_t neg_child = grow(tree, neg_part, depth + 1, options);
  TreeNode& node = tree.nodes[self];
  node.leaf = false;
  node.model = std::move(model);
  node.positive_child = pos_child;
  node.negative_child = neg_child;
  return self;
}

}  // namespace

PartitionTree train_partition_tree(const LabeledDataset& dataset, const TreeOptions& options) {
  dataset.validate();
  require_both_classes(dataset);
  if (options.max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be at least 1");
  if (options.min_leaf_size < 1) throw Error(ErrorCode::InvalidArgument, "min_leaf_size must be at least 1");
  PartitionTree tree;
  tree.max_depth = options.max_depth;
  tree.min_leaf_size = options.min_leaf_size;
  tree.dims = dataset.dims();
  grow(tree, dataset, 0, options);
  return tree;
}

int predict_tree(const PartitionTree& tree, const FeatureVector& x, double* last_decision) {
  if (tree.nodes.empty()) throw Error(ErrorCode::InvalidArgument, "empty partition tree");
  if (x.size() != tree.dims)
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) + " components, tree expects " +
                                                  std::to_string(tree.dims));
  double last = 0.0;
  std::size_t n = 0;
  while (!tree.nodes[n].leaf) {
    const auto& node = tree.nodes[n];
    last = decision_value(node.model, x);
    n = last >= 0.0 ? node.positive_child : node.negative_child;
  }
  if (last_decision) *last_decision = last;
  return tree.nodes[n].label;
}

Eigen::Index classifier_dims(const Classifier& classifier) {
  if (const auto* m = std::get_if<SvmModel>(&classifier)) return m->dims();
  return std::get<PartitionTree>(classifier).dims;
}

int classify(const Classifier& classifier, const FeatureVector& x) {
  if (const auto* m = std::get_if<SvmModel>(&classifier)) return predict(*m, x);
  return predict_tree(std::get<PartitionTree>(classifier), x);
}

double classifier_decision(const Classifier& classifier, const FeatureVector& x) {
  if (const auto* m = std::get_if<SvmModel>(&classifier)) return decision_value(*m, x);
  double last = 0.0;
  predict_tree(std::get<PartitionTree>(classifier), x, &last);
  return last;
}

}  // namespace clindiag
