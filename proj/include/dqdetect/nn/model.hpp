#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqdetect/nn/layers.hpp"
#include "dqdetect/nn/tensor.hpp"

namespace dqd::nn {

struct ModelConfig {
  int growthRate = 32;
  std::vector<int> blockLayers{6, 12, 24, 16};
  int stemKernels = 64;
  double compression = 0.5;
  int bottleneck = 4;  // 1x1 conv width is bottleneck * growthRate
  int inputRows = 64;
  int inputCols = 201;
  int inputChannels = 2;
  int classCount = 2;

  // DenseNet-121 layout on a 64 x (2b+1) x channels input.
  static ModelConfig full(int b = 100, bool withQFactors = true);
  // Reduced network for desk-scale runs: k = 8, four blocks of two layers.
  static ModelConfig toy(int b = 20, bool withQFactors = true);

  void validate() const;  // throws ShapeError / std::invalid_argument

  nlohmann::json toJson() const;
  static ModelConfig fromJson(const nlohmann::json& j);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Stem (7x7/2 conv, BN, ReLU, 3x3/2 max pool), dense blocks separated by
// transitions (BN, ReLU, 1x1 conv with compression, 2x2 average pool), final
// BN and ReLU, global average pooling and a linear layer giving class logits.
template <typename T>
class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  Tensor<T> logits(const Tensor<T>& input, Mode mode);
  // Softmax class probabilities, one row per sample.
  Tensor<T> forward(const Tensor<T>& input, Mode mode);

  // Zeroes gradients, runs a training-mode forward pass and backpropagates the
  // mean categorical cross-entropy. Returns the loss and optionally the logits.
  T lossAndGradients(const Tensor<T>& input, std::span<const int> labels, Mode mode = Mode::Train,
                     Tensor<T>* logitsOut = nullptr);

  std::vector<Parameter<T>*> parameters();
  std::size_t learnableParameterCount();
  void zeroGradients();

  // Input channel count entering each dense layer, per block.
  std::vector<std::vector<int>> denseLayerInputChannels() const;

  // Final spatial extent before global pooling.
  std::array<int, 4> featureShape() const;

 private:
  void checkInput(const Tensor<T>& input) const;

  ModelConfig config_;
  Sequential<T> body_;
  std::unique_ptr<Linear<T>> head_;
  std::vector<std::vector<int>> denseInputs_;
  std::array<int, 4> featureShape_{};
};

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

// Mean -log p(label). Optionally writes dLoss/dLogits.
template <typename T>
T crossEntropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* gradLogits);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // One bias-corrected update over the trainable parameters.
  void step(const std::vector<Parameter<T>*>& params, double learningRate);
  std::int64_t steps() const { return t_; }

 private:
  AdamOptions options_;
  std::int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace dqd::nn
