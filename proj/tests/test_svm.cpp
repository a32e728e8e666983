#include <cmath>
#include <random>

#include "doctest.h"

#include "clindiag/error.hpp"
#include "clindiag/svm.hpp"
#include "test_support.hpp"

using namespace clindiag;
using namespace clindiag::testing;

namespace {

SvmModel two_point_model() { return train(two_point_dataset(), {10.0, 1e-3, 1000}); }

// + cluster of 5 at -2, - cluster of 15 at 0, + cluster of 10 at +2 (1-D).
// The sizes are asymmetric on purpose: with mirror-symmetric clusters the
// soft-margin optimum is w = 0 and the root split would not cut anything.
LabeledDataset three_clusters() {
  const int sizes[3] = {5, 15, 10};
  const double centres[3] = {-2.0, 0.0, 2.0};
  const double labels[3] = {1.0, -1.0, 1.0};
  LabeledDataset d;
  d.vectors.resize(30, 1);
  d.labels.resize(30);
  Eigen::Index r = 0;
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < sizes[c]; ++k, ++r) {
      d.vectors(r, 0) = centres[c] + 0.2 * (2.0 * k / (sizes[c] - 1) - 1.0);
      d.labels(r) = labels[c];
    }
  }
  return d;
}

double training_accuracy(const PartitionTree& tree, const LabeledDataset& d) {
  int hits = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) hits += predict_tree(tree, d.row(i)) == static_cast<int>(d.labels(i));
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected clindiag::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("two-point model is the line y = 0 with w = (0, 1/2)") {
  const auto m = two_point_model();
  CHECK(m.training_summary.converged);
  CHECK(std::abs(m.weights(0)) <= 1e-12);
  CHECK(m.weights(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(m.offset) <= 1e-12);
  REQUIRE(m.support.size() == 2);
  CHECK(m.support[0].alpha == doctest::Approx(0.125));
  CHECK(m.support[1].alpha == doctest::Approx(0.125));
}

TEST_CASE("decision_value, predict and margin_distance on the two-point model") {
  const auto m = two_point_model();
  CHECK(decision_value(m, Eigen::Vector2d(0, 2)) == doctest::Approx(1.0));
  CHECK(predict(m, Eigen::Vector2d(0, 3)) == 1);
  CHECK(decision_value(m, Eigen::Vector2d(0, 3)) == doctest::Approx(1.5));
  CHECK(predict(m, Eigen::Vector2d(0, -3)) == -1);
  CHECK(decision_value(m, Eigen::Vector2d(0, -3)) == doctest::Approx(-1.5));
  // (5, 0) lies on the hyperplane: the tie goes to +1.
  CHECK(decision_value(m, Eigen::Vector2d(5, 0)) == 0.0);
  CHECK(predict(m, Eigen::Vector2d(5, 0)) == 1);
  CHECK(margin_distance(m, Eigen::Vector2d(0, 2)) == doctest::Approx(2.0));
  CHECK(margin_distance(m, Eigen::Vector2d(0, -2)) == doctest::Approx(2.0));
  CHECK(code_of([&] { decision_value(m, Eigen::Vector3d(0, 0, 0)); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { predict(m, Eigen::VectorXd::Zero(1)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("margin_distance follows the point-to-line formula") {
  SvmModel line;
  line.weights = Eigen::Vector2d(1, 1);
  line.offset = -1;
  CHECK(margin_distance(line, Eigen::Vector2d(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(margin_distance(line, Eigen::Vector2d(0.5, 0.5)) == 0.0);
  SvmModel flat;
  flat.weights = Eigen::Vector2d::Zero();
  CHECK(code_of([&] { margin_distance(flat, Eigen::Vector2d(1, 1)); }) == ErrorCode::ZeroWeightVector);
}

TEST_CASE("single-class data is rejected") {
  auto d = two_point_dataset();
  d.labels.setOnes();
  CHECK(code_of([&] { train(d); }) == ErrorCode::SingleClassDataset);
  CHECK(code_of([&] { train_partition_tree(d); }) == ErrorCode::SingleClassDataset);
}

TEST_CASE("XOR needs slack: some multiplier sits at C") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 1, -1, -1, 1, -1, -1, 1;
  const auto d = make_dataset(x, Eigen::Vector4d(1, 1, -1, -1));
  const auto oracle = qp::brute_force_dual(qp::QpProblem<double>::from_vectors(d.vectors, d.labels, 1.0));
  CHECK(oracle.alphas.maxCoeff() == doctest::Approx(1.0));
  const auto m = train(d, {1.0, 1e-6, 10000});
  CHECK(m.training_summary.converged);
  bool at_bound = false;
  for (const auto& s : m.support) at_bound |= s.alpha >= 1.0 - 1e-12;
  CHECK(at_bound);
  CHECK(duality_gap(m, d) <= 1e-6 * 4);
}

TEST_CASE("property: reconstruction identity, duality gap and free-SV margin") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto d = seed % 2 ? separable_dataset(seed, 10 + seed, 3) : random_dataset(seed, 10 + seed, 3);
    const double tol = 1e-4;
    const auto m = train(d, {seed % 3 == 0 ? 0.1 : 5.0, tol, 100000});
    REQUIRE(m.training_summary.converged);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d.dims());
    for (const auto& s : m.support) w += s.alpha * s.label * d.row(s.index);
    CHECK((w - m.weights).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(duality_gap(m, d) <= tol * static_cast<double>(d.size()));
    CHECK(free_support_residual(m, d) <= tol);
  }
}

TEST_CASE("property: margin is maximal against random hyperplanes (l <= 8)") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto d = separable_dataset(seed + 50, 3 + static_cast<Eigen::Index>(seed % 6), 2);
    const auto m = train(d, {1e6, 1e-9, 100000});
    REQUIRE(m.training_summary.converged);
    double trained = 1e300;
    for (Eigen::Index i = 0; i < d.size(); ++i) trained = std::min(trained, margin_distance(m, d.row(i)));
    for (int k = 0; k < 2000; ++k) {
      SvmModel h;
      h.weights = Eigen::Vector2d(g(rng), g(rng));
      h.offset = g(rng);
      double worst = 1e300;
      bool separates = true;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        separates &= d.labels(i) * decision_value(h, d.row(i)) > 0;
        worst = std::min(worst, margin_distance(h, d.row(i)));
      }
      if (separates) CHECK(worst <= trained + 1e-4);
    }
  }
}

TEST_CASE("property: flipping labels negates w and b") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto d = random_dataset(seed + 500, 20, 3);
    const auto m = train(d, {1.0, 1e-9, 100000});
    d.labels = -d.labels;
    const auto f = train(d, {1.0, 1e-9, 100000});
    CHECK((m.weights + f.weights).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(m.offset + f.offset) <= 1e-6);
  }
}

TEST_CASE("property: translation changes b by -w.t and preserves predictions") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = separable_dataset(seed + 700, 16, 2);
    const Eigen::Vector2d t(3 * g(rng), 3 * g(rng));
    auto moved = d;
    moved.vectors.rowwise() += t.transpose();
    const auto m = train(d, {1.0, 1e-10, 100000});
    const auto mt = train(moved, {1.0, 1e-10, 100000});
    CHECK((m.weights - mt.weights).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK(std::abs(mt.offset - (m.offset - m.weights.dot(t))) <= 1e-7);
    for (int k = 0; k < 100; ++k) {
      const Eigen::Vector2d x(3 * g(rng), 3 * g(rng));
      if (std::abs(decision_value(m, x)) > 1e-6) CHECK(predict(m, x) == predict(mt, x + t));
    }
  }
}

TEST_CASE("standardized model takes raw inputs") {
  auto d = separable_dataset(3, 30, 2);
  d.vectors.col(0) = 1000.0 * d.vectors.col(0).array() + 50.0;
  const auto z = standardize(d);
  const auto m = train(z, {1.0, 1e-6, 10000});
  REQUIRE(m.standardized());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    CHECK(decision_value(m, d.row(i)) == doctest::Approx(m.weights.dot(z.row(i)) + m.offset));
}

TEST_CASE("partition tree on separable data is one pure split") {
  const auto d = separable_dataset(11, 40, 3);
  for (int depth : {1, 2, 3}) {
    const auto tree = train_partition_tree(d, {{1.0, 1e-6, 10000}, depth, 5});
    CHECK(tree.depth() == 1);
    CHECK_FALSE(tree.root().leaf);
    CHECK(tree.nodes[tree.root().positive_child].purity == 1.0);
    CHECK(tree.nodes[tree.root().negative_child].purity == 1.0);
  }
}

TEST_CASE("three-cluster data needs two levels of splits") {
  const auto d = three_clusters();
  const TrainOptions opts{1.0, 1e-6, 100000};
  const auto deep = train_partition_tree(d, {opts, 2, 5});
  CHECK(deep.depth() == 2);
  CHECK(training_accuracy(deep, d) == 1.0);
  CHECK(predict_tree(deep, Eigen::VectorXd::Constant(1, -2.0)) == 1);
  CHECK(predict_tree(deep, Eigen::VectorXd::Constant(1, 0.0)) == -1);
  CHECK(predict_tree(deep, Eigen::VectorXd::Constant(1, 2.0)) == 1);
  CHECK(code_of([&] { predict_tree(deep, Eigen::Vector2d(0, 0)); }) == ErrorCode::DimensionMismatch);

  const auto shallow = train_partition_tree(d, {opts, 1, 5});
  CHECK(shallow.depth() <= 1);
  CHECK(training_accuracy(shallow, d) < 1.0);
  CHECK(train(d, opts).training_summary.converged);
}

TEST_CASE("depth-1 tree agrees with its root model everywhere on a grid") {
  const auto d = random_dataset(21, 40, 2);
  const auto tree = train_partition_tree(d, {{1.0, 1e-6, 10000}, 1, 1});
  REQUIRE_FALSE(tree.root().leaf);
  for (double a = -3; a <= 3; a += 0.25)
    for (double b = -3; b <= 3; b += 0.25)
      CHECK(predict_tree(tree, Eigen::Vector2d(a, b)) == predict(tree.root().model, Eigen::Vector2d(a, b)));
}

TEST_CASE("min_leaf_size larger than any side leaves the root a leaf") {
  const auto d = separable_dataset(4, 10, 2);
  const auto tree = train_partition_tree(d, {{1.0, 1e-6, 10000}, 3, 50});
  CHECK(tree.root().leaf);
  CHECK(tree.depth() == 0);
  CHECK(tree.root().purity >= 0.5);
}
