#include "doctest.h"

#include "clindiag/error.hpp"
#include "clindiag/model_io.hpp"
#include "clindiag/report.hpp"
#include "test_support.hpp"

using namespace clindiag;
using namespace clindiag::testing;

namespace {

EncodingSchema xy_schema(const std::string& a = "x", const std::string& b = "y") {
  EncodingSchema s;
  s.features = {FeatureSpec::numeric(a), FeatureSpec::numeric(b)};
  s.label_rule = {"status", "disease", "healthy"};
  return s;
}

ClinicalRecord record_xy(double x, double y) { return ClinicalRecord{{{"x", std::to_string(x)}, {"y", std::to_string(y)}}}; }

RegistryEntry entry(const EncodingSchema& schema, const ConfusionMatrix& m) {
  return {Classifier{train(two_point_dataset(), {10.0, 1e-3, 1000})}, schema, summarize(m)};
}

}  // namespace

TEST_CASE("positive call carries the stored ppv as confidence") {
  ModelRegistry reg;
  reg.add("Liver", entry(xy_schema(), {389, 37, 53, 405}));
  const auto r = diagnose(reg, record_xy(0, 3));
  REQUIRE(r.rows.size() == 1);
  CHECK(*r.rows[0].predicted == Call::Positive);
  CHECK(*r.rows[0].confidence_percent == doctest::Approx(91.3146).epsilon(1e-6));
  CHECK(*r.rows[0].decision_value == doctest::Approx(1.5));
  CHECK(render_report(r).find("91.3146 %") != std::string::npos);

  const auto neg = diagnose(reg, record_xy(0, -3));
  CHECK(*neg.rows[0].predicted == Call::Negative);
  CHECK(*neg.rows[0].confidence_percent == doctest::Approx(100.0 * 405 / 458));
}

TEST_CASE("perfect evaluation gives 100 percent either way") {
  ModelRegistry reg;
  reg.add("Breast", entry(xy_schema(), {104, 0, 0, 104}));
  for (double y : {-3.0, 3.0}) CHECK(*diagnose(reg, record_xy(0, y)).rows[0].confidence_percent == 100.0);
}

TEST_CASE("a row whose columns are missing is unavailable, the rest survive") {
  ModelRegistry reg;
  reg.add("Liver", entry(xy_schema(), {389, 37, 53, 405}));
  reg.add("Gastritis", entry(xy_schema(), {451, 63, 141, 529}));
  reg.add("Breast", entry(xy_schema("x", "mammo"), {104, 0, 0, 104}));
  const auto r = diagnose(reg, record_xy(0, 1));
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].disease == "Breast");
  CHECK(r.rows[1].disease == "Gastritis");
  CHECK(r.rows[2].disease == "Liver");
  CHECK_FALSE(r.rows[0].available());
  CHECK(r.rows[0].error.find("mammo") != std::string::npos);
  CHECK(r.rows[1].available());
  CHECK(r.rows[2].available());
  const auto j = report_to_json(r);
  CHECK(j["rows"][0]["available"] == false);
  CHECK(j["rows"][2]["predicted"] == "Positive");
}

TEST_CASE("property: confidence is ppv or npv times 100 and diagnose is repeatable") {
  ModelRegistry reg;
  reg.add("Liver", entry(xy_schema(), {389, 37, 53, 405}));
  reg.add("Gastritis", entry(xy_schema(), {451, 63, 141, 529}));
  for (double y = -4; y <= 4; y += 0.5) {
    const auto r = diagnose(reg, record_xy(1, y));
    CHECK(report_to_json(r) == report_to_json(diagnose(reg, record_xy(1, y))));
    for (const auto& row : r.rows) {
      const auto& ev = reg.entries.at(row.disease).evaluation;
      const auto& expected = *row.predicted == Call::Positive ? ev.ppv : ev.npv;
      CHECK(*row.confidence_percent == expected->value() * 100.0);
    }
  }
}

TEST_CASE("registry validation") {
  ModelRegistry reg;
  CHECK_THROWS_AS(diagnose(reg, record_xy(0, 0)), Error);
  EncodingSchema three = xy_schema();
  three.features.push_back(FeatureSpec::numeric("z"));
  CHECK_THROWS_AS(reg.add("Liver", entry(three, {1, 0, 0, 1})), Error);
  RegistryEntry empty_eval = entry(xy_schema(), {1, 0, 0, 1});
  empty_eval.evaluation.matrix = {};
  CHECK_THROWS_AS(reg.add("Liver", empty_eval), Error);
}

TEST_CASE("registry manifest loads relative paths") {
  TempDir dir("registry");
  save_model(Classifier{train(two_point_dataset(), {10.0, 1e-3, 1000})}, dir.file("liver.model.json"));
  save_schema(xy_schema(), dir.file("liver.schema.json"));
  write_text_file(dir.file("liver.eval.json"), evaluation_to_json(summarize({389, 37, 53, 405}), "resubstitution").dump());
  write_text_file(dir.file("registry.json"),
                  R"({"diseases": [{"name": "Liver", "model": "liver.model.json", "schema": "liver.schema.json",
                      "evaluation": "liver.eval.json"}]})");
  const auto reg = load_registry(dir.file("registry.json"));
  REQUIRE(reg.entries.size() == 1);
  CHECK(render_ratio(reg.entries.at("Liver").evaluation.ppv) == "0.913146");

  write_text_file(dir.file("empty.json"), R"({"diseases": []})");
  try {
    load_registry(dir.file("empty.json"));
    FAIL("expected EmptyRegistry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyRegistry);
  }
}
