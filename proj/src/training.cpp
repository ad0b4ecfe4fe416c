#include "dqdetect/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "dqdetect/rng.hpp"

namespace dqd {
namespace {

nn::Tensor<float> gatherBatch(const Dataset& data, std::span<const std::size_t> indices) {
  nn::Tensor<float> batch(static_cast<int>(indices.size()), data.channels, kFrequencyRows, data.cols);
  const std::size_t stride = data.sampleSize();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(data.inputs.begin() + static_cast<std::ptrdiff_t>(indices[i] * stride), stride,
                batch.data.begin() + static_cast<std::ptrdiff_t>(i * stride));
  }
  return batch;
}

void checkCompatible(const nn::ModelConfig& config, const Dataset& data) {
  if (config.inputChannels != data.channels || config.inputCols != data.cols ||
      config.inputRows != kFrequencyRows) {
    throw std::invalid_argument("dataset feature shape 64x" + std::to_string(data.cols) + "x" +
                                std::to_string(data.channels) + " does not match the model input 64x" +
                                std::to_string(config.inputCols) + "x" + std::to_string(config.inputChannels));
  }
}

nlohmann::json optionalJson(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

Dataset makeDataset(const FeatureOptions& options) {
  Dataset d;
  d.options = options;
  d.channels = options.withQFactors ? 2 : 1;
  d.cols = 2 * options.b + 1;
  return d;
}

void Dataset::add(const QuantizedBlockGrid& grid, int label, std::string sourceId) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  const FeatureTensor f = buildFeature(grid, options);
  const std::size_t offset = inputs.size();
  inputs.resize(offset + sampleSize());
  toNetworkInput(f, options, static_cast<std::int64_t>(grid.blockCount()), inputs.data() + offset);
  labels.push_back(label);
  sourceIds.push_back(std::move(sourceId));
}

Dataset buildDataset(std::span<const LabeledPatch> patches, const FeatureOptions& options, int cropPixels) {
  if (cropPixels % kBlockDim != 0 || cropPixels < 0) throw std::invalid_argument("crop must be a multiple of 8");
  Dataset d = makeDataset(options);
  d.inputs.reserve(patches.size() * d.sampleSize());
  for (const LabeledPatch& p : patches) {
    QuantizedBlockGrid grid = decodeCoefficients(p.stream);
    if (cropPixels > 0) {
      const int blocks = cropPixels / kBlockDim;
      if (blocks > grid.blocksX || blocks > grid.blocksY) {
        throw std::invalid_argument("crop of " + std::to_string(cropPixels) + " exceeds the patch size");
      }
      grid = grid.crop(0, 0, blocks, blocks);
    }
    d.add(grid, p.label == CompressionLabel::Double ? 1 : 0, p.sourceId);
  }
  return d;
}

std::pair<std::vector<LabeledPatch>, std::vector<LabeledPatch>> splitBySource(std::span<const LabeledPatch> patches,
                                                                              std::size_t firstSourceCount,
                                                                              std::uint64_t seed) {
  std::vector<std::string> sources;
  std::unordered_map<std::string, std::size_t> seen;
  for (const LabeledPatch& p : patches) {
    if (seen.emplace(p.sourceId, sources.size()).second) sources.push_back(p.sourceId);
  }
  if (firstSourceCount > sources.size()) throw std::invalid_argument("split asks for more sources than exist");
  std::vector<std::size_t> order(sources.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::uint8_t> first(sources.size(), 0);
  for (std::size_t i = 0; i < firstSourceCount; ++i) first[order[i]] = 1;
  std::pair<std::vector<LabeledPatch>, std::vector<LabeledPatch>> out;
  for (const LabeledPatch& p : patches) (first[seen.at(p.sourceId)] ? out.first : out.second).push_back(p);
  return out;
}

nlohmann::json TrainConfig::toJson() const {
  return {{"model", model.toJson()},
          {"epochs", epochs},
          {"batch_size", batchSize},
          {"learning_rate", learningRate},
          {"decay_epoch", decayEpoch},
          {"decayed_learning_rate", decayedLearningRate},
          {"calibrate_normalization", calibrateNormalization},
          {"seed", seed}};
}

nlohmann::json TrainResult::historyJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const EpochRecord& r : history) {
    const ClassificationMetrics m = classificationMetrics(r.train);
    nlohmann::json e = {{"epoch", r.epoch},
                        {"learning_rate", r.learningRate},
                        {"loss", r.loss},
                        {"accuracy", optionalJson(m.accuracy)},
                        {"tpr", optionalJson(m.tpr)},
                        {"tnr", optionalJson(m.tnr)}};
    if (r.validation) e["validation"] = metricsJson(*r.validation);
    out.push_back(std::move(e));
  }
  return out;
}

TrainResult trainModel(const Dataset& train, const Dataset* validation, const TrainConfig& config,
                       EpochCallback onEpoch) {
  if (train.size() == 0) throw std::invalid_argument("empty training set");
  if (validation && validation->size() == 0) throw std::invalid_argument("empty validation set");
  if (config.epochs < 0 || config.batchSize < 2) throw std::invalid_argument("invalid epoch count or batch size");
  checkCompatible(config.model, train);

  Rng rng(config.seed);
  TrainResult result;
  result.model = std::make_unique<nn::Model<float>>(config.model, rng.fork());
  nn::Adam<float> optimizer;
  const auto params = result.model->parameters();

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    EpochRecord record;
    record.epoch = epoch;
    record.learningRate = config.learningRateForEpoch(epoch);
    double lossSum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batchSize)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batchSize));
      // Batch statistics are undefined for a single sample.
      if (end - start < 2) continue;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const nn::Tensor<float> batch = gatherBatch(train, idx);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = train.labels[idx[i]];
      nn::Tensor<float> logits;
      const float loss = result.model->lossAndGradients(batch, labels, nn::Mode::Train, &logits);
      optimizer.step(params, record.learningRate);
      lossSum += loss;
      ++batches;
      std::vector<int> preds(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        preds[i] = logits.at(static_cast<int>(i), 1, 0, 0) > logits.at(static_cast<int>(i), 0, 0, 0) ? 1 : 0;
      }
      record.train += confusion(labels, preds);
    }
    record.loss = batches ? lossSum / static_cast<double>(batches) : 0.0;
    if (config.calibrateNormalization) {
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batchSize)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batchSize));
        if (end - start < 2) continue;
        result.model->logits(gatherBatch(train, std::span<const std::size_t>(order.data() + start, end - start)),
                             nn::Mode::Calibrate);
      }
    }
    if (validation) record.validation = evaluate(*result.model, *validation, config.batchSize);
    if (onEpoch) onEpoch(record);
    result.history.push_back(std::move(record));
  }
  return result;
}

std::vector<double> predictProbabilities(nn::Model<float>& model, const Dataset& data, int batchSize) {
  checkCompatible(model.config(), data);
  if (batchSize < 1) throw std::invalid_argument("batch size must be positive");
  std::vector<double> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batchSize)) {
    const std::size_t end = std::min(data.size(), start + static_cast<std::size_t>(batchSize));
    idx.clear();
    for (std::size_t i = start; i < end; ++i) idx.push_back(i);
    const nn::Tensor<float> probs = model.forward(gatherBatch(data, idx), nn::Mode::Eval);
    for (int i = 0; i < probs.n(); ++i) out.push_back(static_cast<double>(probs.at(i, 1, 0, 0)));
  }
  return out;
}

Confusion evaluate(nn::Model<float>& model, const Dataset& test, int batchSize) {
  if (test.size() == 0) throw std::invalid_argument("empty test set");
  const std::vector<double> p = predictProbabilities(model, test, batchSize);
  std::vector<int> preds(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) preds[i] = p[i] >= 0.5 ? 1 : 0;
  return confusion(test.labels, preds);
}

std::vector<double> NetworkClassifier::probabilityDouble(std::span<const QuantizedBlockGrid> grids) {
  Dataset d = makeDataset(options_);
  d.inputs.reserve(grids.size() * d.sampleSize());
  for (const QuantizedBlockGrid& g : grids) d.add(g, 0);
  return predictProbabilities(model_, d, batchSize_);
}

}  // namespace dqd
