#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/features.hpp"
#include "dqdetect/metrics.hpp"
#include "dqdetect/nn/model.hpp"
#include "dqdetect/synthesis.hpp"

namespace dqd {

// Network-ready samples: `inputs` holds size() consecutive channel-major
// feature tensors, `labels` 1 for double and 0 for single compression.
struct Dataset {
  FeatureOptions options;
  int channels = 0;
  int cols = 0;
  std::vector<float> inputs;
  std::vector<int> labels;
  std::vector<std::string> sourceIds;

  std::size_t size() const { return labels.size(); }
  std::size_t sampleSize() const {
    return static_cast<std::size_t>(channels) * kFrequencyRows * static_cast<std::size_t>(cols);
  }
  void add(const QuantizedBlockGrid& grid, int label, std::string sourceId = {});
};

Dataset makeDataset(const FeatureOptions& options);

// Decodes each patch and optionally keeps only the top-left `cropPixels`
// square (0 keeps the whole patch).
Dataset buildDataset(std::span<const LabeledPatch> patches, const FeatureOptions& options, int cropPixels = 0);

// Pairs sharing a source id stay on the same side; `firstSourceCount` distinct
// sources (in order of first appearance after a seeded shuffle) go first.
std::pair<std::vector<LabeledPatch>, std::vector<LabeledPatch>> splitBySource(
    std::span<const LabeledPatch> patches, std::size_t firstSourceCount, std::uint64_t seed);

struct TrainConfig {
  nn::ModelConfig model = nn::ModelConfig::full();
  int epochs = 40;
  int batchSize = 64;
  double learningRate = 1e-3;
  int decayEpoch = 30;  // 0-indexed first epoch at the decayed rate
  double decayedLearningRate = 5e-4;
  // Re-estimate batch-norm running statistics after every epoch by averaging
  // batch statistics over one pass of the training set with frozen weights.
  bool calibrateNormalization = true;
  std::uint64_t seed = 0;

  double learningRateForEpoch(int epoch) const {
    return epoch < decayEpoch ? learningRate : decayedLearningRate;
  }

  nlohmann::json toJson() const;
};

struct EpochRecord {
  int epoch = 0;
  double learningRate = 0;
  double loss = 0;          // mean training loss over the epoch's batches
  Confusion train;          // from the predictions made while training
  std::optional<Confusion> validation;
};

struct TrainResult {
  std::unique_ptr<nn::Model<float>> model;
  std::vector<EpochRecord> history;

  nlohmann::json historyJson() const;
};

// Reports progress once per epoch when set.
using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult trainModel(const Dataset& train, const Dataset* validation, const TrainConfig& config,
                       EpochCallback onEpoch = {});

// P(double) for every sample, evaluated in inference mode.
std::vector<double> predictProbabilities(nn::Model<float>& model, const Dataset& data, int batchSize = 64);

// Throws std::invalid_argument("empty test set") on an empty dataset.
Confusion evaluate(nn::Model<float>& model, const Dataset& test, int batchSize = 64);

// Anything that scores aligned block grids with P(double compressed).
class PatchClassifier {
 public:
  virtual ~PatchClassifier() = default;
  virtual std::vector<double> probabilityDouble(std::span<const QuantizedBlockGrid> grids) = 0;
};

class NetworkClassifier final : public PatchClassifier {
 public:
  NetworkClassifier(nn::Model<float>& model, FeatureOptions options, int batchSize = 64)
      : model_(model), options_(options), batchSize_(batchSize) {}

  std::vector<double> probabilityDouble(std::span<const QuantizedBlockGrid> grids) override;

 private:
  nn::Model<float>& model_;
  FeatureOptions options_;
  int batchSize_;
};

}  // namespace dqd
