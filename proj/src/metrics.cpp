#include "dqdetect/metrics.hpp"

#include <stdexcept>

namespace dqd {
namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json orNull(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

Confusion confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("labels and predictions differ in length");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool actual = labels[i] != 0;
    const bool predicted = predictions[i] != 0;
    if (actual && predicted) {
      ++c.tp;
    } else if (!actual && !predicted) {
      ++c.tn;
    } else if (predicted) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

ClassificationMetrics classificationMetrics(const Confusion& c) {
  return {ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp)};
}

PrfMetrics prf(const Confusion& c) {
  PrfMetrics m{ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn), std::nullopt};
  if (m.precision && m.recall) {
    const double sum = *m.precision + *m.recall;
    m.f = sum > 0.0 ? 2.0 * *m.precision * *m.recall / sum : 0.0;
  }
  return m;
}

nlohmann::json metricsJson(const Confusion& c) {
  const auto cls = classificationMetrics(c);
  const auto p = prf(c);
  nlohmann::json j;
  j["counts"] = {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}, {"total", c.total()}};
  j["rates"] = {{"tpr", orNull(cls.tpr)},
                {"tnr", orNull(cls.tnr)},
                {"precision", orNull(p.precision)},
                {"recall", orNull(p.recall)}};
  j["derived"] = {{"accuracy", orNull(cls.accuracy)}, {"f_measure", orNull(p.f)}};
  return j;
}

}  // namespace dqd
