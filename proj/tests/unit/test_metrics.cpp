#include <doctest.h>

#include <algorithm>
#include <vector>

#include "dqdetect/metrics.hpp"
#include "dqdetect/rng.hpp"

using namespace dqd;

TEST_CASE("confusion counts every pairing") {
  const std::vector<int> labels{1, 1, 0, 0, 1, 0};
  const std::vector<int> preds{1, 0, 0, 1, 1, 0};
  const Confusion c = confusion(labels, preds);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 1);
  CHECK(c.total() == 6);
}

TEST_CASE("length mismatch is rejected") {
  const std::vector<int> a{1, 0};
  const std::vector<int> b{1};
  CHECK_THROWS_AS(confusion(a, b), std::invalid_argument);
}

TEST_CASE("b=100 row of the bin-size table is reproduced from its counts") {
  // 10000 double and 10000 single patches, TPR 0.9048, TNR 0.9699.
  const Confusion c{9048, 9699, 301, 952};
  const ClassificationMetrics m = classificationMetrics(c);
  CHECK(*m.tpr == doctest::Approx(0.9048).epsilon(1e-12));
  CHECK(*m.tnr == doctest::Approx(0.9699).epsilon(1e-12));
  CHECK(*m.accuracy == doctest::Approx(0.93735).epsilon(1e-12));
  CHECK(*m.accuracy == doctest::Approx(0.9373).epsilon(1e-4));
}

TEST_CASE("rates with empty denominators are undefined") {
  const Confusion onlyNegatives{0, 5, 0, 0};
  const ClassificationMetrics m = classificationMetrics(onlyNegatives);
  CHECK_FALSE(m.tpr.has_value());
  CHECK(*m.tnr == 1.0);
  const PrfMetrics p = prf(onlyNegatives);
  CHECK_FALSE(p.precision.has_value());
  CHECK_FALSE(p.recall.has_value());
  CHECK_FALSE(p.f.has_value());
  CHECK_FALSE(classificationMetrics(Confusion{}).accuracy.has_value());
}

TEST_CASE("F is zero when precision and recall are both zero") {
  const Confusion c{0, 3, 2, 4};
  const PrfMetrics p = prf(c);
  CHECK(*p.precision == 0.0);
  CHECK(*p.recall == 0.0);
  CHECK(*p.f == 0.0);
}

TEST_CASE("random confusions match direct recomputation") {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Confusion c{rng.uniformInt(1, 50), rng.uniformInt(0, 50), rng.uniformInt(0, 50), rng.uniformInt(0, 50)};
    const PrfMetrics p = prf(c);
    const double P = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double R = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    CHECK(*p.precision == doctest::Approx(P));
    CHECK(*p.recall == doctest::Approx(R));
    CHECK(*p.f == doctest::Approx(2 * P * R / (P + R)));
    CHECK(*p.f <= std::max(P, R) + 1e-12);
    CHECK(*p.f >= std::min(P, R) - 1e-12);
    const double lo = std::min(P, R);
    CHECK(*p.f <= 2 * lo / (1 + lo) + 1e-12);
    const ClassificationMetrics m = classificationMetrics(c);
    CHECK(*m.accuracy >= 0.0);
    CHECK(*m.accuracy <= 1.0);
  }
}

TEST_CASE("report json has counts, rates and derived sections") {
  const nlohmann::json j = metricsJson(Confusion{3, 4, 1, 2});
  CHECK(j.at("counts").at("tp") == 3);
  CHECK(j.at("counts").at("total") == 10);
  CHECK(j.at("rates").at("tpr").get<double>() == doctest::Approx(0.6));
  CHECK(j.at("rates").at("tnr").get<double>() == doctest::Approx(0.8));
  CHECK(j.at("rates").at("precision").get<double>() == doctest::Approx(0.75));
  CHECK(j.at("derived").at("accuracy").get<double>() == doctest::Approx(0.7));
  CHECK(j.at("derived").contains("f_measure"));

  const nlohmann::json empty = metricsJson(Confusion{0, 2, 0, 0});
  CHECK(empty.at("rates").at("tpr").is_null());
  CHECK(empty.at("derived").at("f_measure").is_null());
}
