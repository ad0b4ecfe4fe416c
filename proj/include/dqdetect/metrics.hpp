#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

namespace dqd {

// Binary confusion counts. For classification the positive class is
// "double compressed"; for localization it is "tampered".
struct Confusion {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// labels and predictions are 0/1; throws std::invalid_argument on size mismatch.
Confusion confusion(std::span<const int> labels, std::span<const int> predictions);

// Rates with an empty denominator are std::nullopt rather than 0.
struct ClassificationMetrics {
  std::optional<double> accuracy;  // (tp+tn)/(tp+tn+fp+fn)
  std::optional<double> tpr;       // tp/(tp+fn)
  std::optional<double> tnr;       // tn/(tn+fp)
};

struct PrfMetrics {
  std::optional<double> precision;  // tp/(tp+fp)
  std::optional<double> recall;     // tp/(tp+fn)
  std::optional<double> f;          // 2PR/(P+R)
};

ClassificationMetrics classificationMetrics(const Confusion& c);
PrfMetrics prf(const Confusion& c);

// {"counts": {...}, "rates": {...}, "derived": {...}}; undefined values are null.
nlohmann::json metricsJson(const Confusion& c);

}  // namespace dqd
