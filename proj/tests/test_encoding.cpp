#include <random>

#include "doctest.h"

#include "clindiag/encoding.hpp"
#include "clindiag/error.hpp"

using namespace clindiag;

namespace {

FeatureSpec urine_wbc() {
  return FeatureSpec::staged("urine WBC", {{"Positive 1", 1}, {"Positive 2", 2}, {"Positive 3", 3}, {"Negative", 4}, {"Trace", 5}});
}

EncodingSchema two_feature_schema() {
  EncodingSchema s;
  s.features = {FeatureSpec::numeric("Glucose"), urine_wbc()};
  s.label_rule = {"status", "disease", "healthy"};
  return s;
}

ClinicalRecord rec(std::initializer_list<std::pair<const std::string, Cell>> cells) {
  return ClinicalRecord{std::map<std::string, Cell>(cells)};
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected clindiag::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("staged cell maps to its chosen number") {
  EncodingSchema s;
  s.features = {urine_wbc()};
  s.label_rule = {"status", "disease", "healthy"};
  auto x = encode_record(rec({{"urine WBC", std::string("Trace")}}), s);
  REQUIRE(x.size() == 1);
  CHECK(x(0) == 5.0);
  CHECK(encode_record(rec({{"urine WBC", std::string(" Positive 2 ")}}), s)(0) == 2.0);
}

TEST_CASE("numeric cell passes through") {
  EncodingSchema s;
  s.features = {FeatureSpec::numeric("Glucose")};
  s.label_rule = {"status", "disease", "healthy"};
  CHECK(encode_record(rec({{"Glucose", std::string("98")}}), s)(0) == 98.0);
  CHECK(encode_record(rec({{"Glucose", 98.5}}), s)(0) == 98.5);
  CHECK(encode_record(rec({{"Glucose", std::string("-1.5e2")}}), s)(0) == -150.0);
}

TEST_CASE("encode_record error paths") {
  const auto s = two_feature_schema();
  CHECK(code_of([&] { encode_record(rec({{"urine WBC", std::string("Trace")}}), s); }) == ErrorCode::MissingColumn);
  CHECK(code_of([&] { encode_record(rec({{"Glucose", std::string("98")}, {"urine WBC", std::string("Huge")}}), s); }) ==
        ErrorCode::UnknownStage);
  CHECK(code_of([&] { encode_record(rec({{"Glucose", std::string("9x8")}, {"urine WBC", std::string("Trace")}}), s); }) ==
        ErrorCode::NonNumericCell);
  CHECK(code_of([&] { encode_record(rec({{"Glucose", std::string("inf")}, {"urine WBC", std::string("Trace")}}), s); }) ==
        ErrorCode::NonFiniteValue);
  CHECK(code_of([&] { encode_record(rec({{"Glucose", std::string("")}, {"urine WBC", std::string("Trace")}}), s); }) ==
        ErrorCode::MissingValue);
}

TEST_CASE("declared imputation fills missing data") {
  auto s = two_feature_schema();
  s.features[0].impute = 100.0;
  CHECK(encode_record(rec({{"urine WBC", std::string("Negative")}}), s)(0) == 100.0);
  CHECK(encode_record(rec({{"Glucose", std::string(" ")}, {"urine WBC", std::string("Negative")}}), s)(0) == 100.0);
}

TEST_CASE("schema validation") {
  auto s = two_feature_schema();
  CHECK_NOTHROW(s.validate());

  auto dup_feature = s;
  dup_feature.features.push_back(FeatureSpec::numeric("Glucose"));
  CHECK(code_of([&] { dup_feature.validate(); }) == ErrorCode::InvalidSchema);

  auto dup_number = s;
  dup_number.features[1].stages[1].value = 1;
  CHECK(code_of([&] { dup_number.validate(); }) == ErrorCode::InvalidSchema);

  auto no_stages = s;
  no_stages.features[1].stages.clear();
  CHECK(code_of([&] { no_stages.validate(); }) == ErrorCode::InvalidSchema);

  auto label_is_feature = s;
  label_is_feature.label_rule.label_column = "Glucose";
  CHECK(code_of([&] { label_is_feature.validate(); }) == ErrorCode::InvalidSchema);

  EncodingSchema empty;
  empty.label_rule = {"status", "a", "b"};
  CHECK(code_of([&] { empty.validate(); }) == ErrorCode::InvalidSchema);
}

TEST_CASE("encode_dataset labels by rule") {
  const auto s = two_feature_schema();
  std::vector<ClinicalRecord> records = {
      rec({{"Glucose", std::string("98")}, {"urine WBC", std::string("Trace")}, {"status", std::string("disease")}}),
      rec({{"Glucose", std::string("87")}, {"urine WBC", std::string("Negative")}, {"status", std::string("healthy")}})};
  const auto d = encode_dataset(records, s);
  REQUIRE(d.size() == 2);
  CHECK(d.labels(0) == 1.0);
  CHECK(d.labels(1) == -1.0);
  CHECK(d.vectors(1, 0) == 87.0);
  CHECK(d.vectors(1, 1) == 4.0);
  CHECK_FALSE(d.scaling.has_value());
}

TEST_CASE("balanced cohort of 104 + 104 gives l = 208 and zero label sum") {
  EncodingSchema s;
  s.features = {FeatureSpec::numeric("x")};
  s.label_rule = {"status", "disease", "healthy"};
  std::vector<ClinicalRecord> records;
  for (int i = 0; i < 208; ++i)
    records.push_back(rec({{"x", static_cast<double>(i)}, {"status", std::string(i < 104 ? "disease" : "healthy")}}));
  const auto d = encode_dataset(records, s);
  CHECK(d.size() == 208);
  CHECK(d.labels.sum() == 0.0);
}

TEST_CASE("encode_dataset reports the failing record") {
  const auto s = two_feature_schema();
  std::vector<ClinicalRecord> records = {
      rec({{"Glucose", std::string("98")}, {"urine WBC", std::string("Trace")}, {"status", std::string("disease")}}),
      rec({{"Glucose", std::string("87")}, {"urine WBC", std::string("Trace")}, {"status", std::string("unknown")}})};
  try {
    encode_dataset(records, s);
    FAIL("expected UnknownLabelValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabelValue);
    REQUIRE(e.record().has_value());
    CHECK(*e.record() == 1);
  }
}

TEST_CASE("standardize uses the population convention") {
  LabeledDataset d;
  d.vectors.resize(2, 1);
  d.vectors << 2, 4;
  d.labels.resize(2);
  d.labels << 1, -1;
  const auto z = standardize(d);
  CHECK(z.vectors(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(z.vectors(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(z.scaling.has_value());
  CHECK(z.scaling->mean(0) == 3.0);
  CHECK(z.scaling->stddev(0) == 1.0);
  CHECK(z.scaling->zero_variance[0] == false);
}

TEST_CASE("zero-variance dimension is centred and flagged") {
  LabeledDataset d;
  d.vectors.resize(3, 2);
  d.vectors << 5, 1, 5, 2, 5, 3;
  d.labels = Eigen::Vector3d(1, -1, 1);
  const auto z = standardize(d);
  CHECK(z.vectors.col(0).isZero());
  CHECK(z.scaling->zero_variance[0]);
  CHECK(z.scaling->stddev(0) == 1.0);
  CHECK_FALSE(z.scaling->zero_variance[1]);
  CHECK(code_of([&] { standardize(z); }) == ErrorCode::AlreadyStandardized);

  LabeledDataset one;
  one.vectors = Eigen::MatrixXd::Ones(1, 1);
  one.labels = Eigen::VectorXd::Ones(1);
  CHECK(code_of([&] { standardize(one); }) == ErrorCode::DatasetTooSmall);
}

TEST_CASE("property: standardized columns have mean 0, std 1, and the transform round-trips") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index l = 2 + trial % 7, m = 1 + trial % 4;
    LabeledDataset d;
    d.vectors.resize(l, m);
    for (Eigen::Index i = 0; i < l; ++i)
      for (Eigen::Index k = 0; k < m; ++k) d.vectors(i, k) = 100.0 * g(rng) + 40.0 * k;
    d.labels = Eigen::VectorXd::Ones(l);
    const auto z = standardize(d);
    for (Eigen::Index k = 0; k < m; ++k) {
      CHECK(std::abs(z.vectors.col(k).mean()) < 1e-12);
      CHECK(std::sqrt(z.vectors.col(k).squaredNorm() / static_cast<double>(l)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (Eigen::Index i = 0; i < l; ++i) {
      const FeatureVector raw = d.row(i);
      CHECK((z.scaling->invert(z.scaling->apply(raw)) - raw).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((z.scaling->apply(raw) - z.row(i)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("property: permuting schema features permutes components") {
  const auto s = two_feature_schema();
  auto reversed = s;
  std::swap(reversed.features[0], reversed.features[1]);
  const auto r = rec({{"Glucose", std::string("120")}, {"urine WBC", std::string("Positive 3")}});
  const auto a = encode_record(r, s);
  const auto b = encode_record(r, reversed);
  CHECK(a(0) == b(1));
  CHECK(a(1) == b(0));
  CHECK(encode_record(r, s) == a);
}
