#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dqdetect/nn/tensor.hpp"
#include "dqdetect/rng.hpp"

namespace dqd::nn {

// Calibrate normalizes with batch statistics like Train but replaces the
// batch-norm running statistics by the plain average over consecutive
// Calibrate batches; gradients are not needed.
enum class Mode { Train, Eval, Calibrate };

// Layers cache what they need from forward() and consume it in backward(),
// which returns dL/dx and accumulates into parameter gradients. Calls must
// alternate forward/backward on the same batch.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& gradOut) = 0;
  virtual void collectParameters(std::vector<Parameter<T>*>& /*out*/) {}
  // Output shape for an input shape, without running the layer.
  virtual std::array<int, 4> outputShape(std::array<int, 4> in) const = 0;
};

template <typename T>
using LayerPtr = std::unique_ptr<Layer<T>>;

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  // Xavier-uniform weights, zero bias.
  Conv2d(std::string name, int inChannels, int outChannels, int kernel, int stride, int pad, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  void collectParameters(std::vector<Parameter<T>*>& out) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override;

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

 private:
  void im2col(const Tensor<T>& x, int outH, int outW, std::vector<T>& cols) const;

  int inChannels_, outChannels_, kernel_, stride_, pad_;
  Parameter<T> weight_;  // [out, in, k, k]
  Parameter<T> bias_;    // [out, 1, 1, 1]
  Tensor<T> input_;
};

template <typename T>
class BatchNorm2d final : public Layer<T> {
 public:
  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.9;  // weight kept on the old running value

  BatchNorm2d(std::string name, int channels);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  void collectParameters(std::vector<Parameter<T>*>& out) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override { return in; }

 private:
  int channels_;
  Parameter<T> gamma_, beta_, runningMean_, runningVar_;
  Tensor<T> normalized_;
  std::vector<T> invStd_;
  Mode lastMode_ = Mode::Eval;
  std::int64_t calibrationBatches_ = 0;
};

template <typename T>
class ReLU final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override { return in; }

 private:
  std::vector<std::uint8_t> mask_;
};

template <typename T>
class MaxPool2d final : public Layer<T> {
 public:
  MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override;

 private:
  int kernel_, stride_, pad_;
  std::array<int, 4> inShape_{};
  std::vector<std::size_t> argmax_;
};

// Non-overlapping average pooling (kernel == stride), trailing rows/cols dropped.
template <typename T>
class AvgPool2d final : public Layer<T> {
 public:
  explicit AvgPool2d(int kernel) : kernel_(kernel) {}
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override;

 private:
  int kernel_;
  std::array<int, 4> inShape_{};
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override { return {in[0], in[1], 1, 1}; }

 private:
  std::array<int, 4> inShape_{};
};

// Fully connected layer on N x C x 1 x 1 inputs.
template <typename T>
class Linear final : public Layer<T> {
 public:
  Linear(std::string name, int inFeatures, int outFeatures, Rng& rng);
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  void collectParameters(std::vector<Parameter<T>*>& out) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override { return {in[0], outFeatures_, 1, 1}; }

 private:
  int inFeatures_, outFeatures_;
  Parameter<T> weight_;  // [out, in, 1, 1]
  Parameter<T> bias_;
  Tensor<T> input_;
};

template <typename T>
class Sequential : public Layer<T> {
 public:
  Sequential() = default;
  void add(LayerPtr<T> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  void collectParameters(std::vector<Parameter<T>*>& out) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override;

 private:
  std::vector<LayerPtr<T>> layers_;
};

// Dense block: layer j sees the channel concatenation of the block input and
// the outputs of layers 0..j-1, and contributes `growth` new channels.
// Each layer is BN, ReLU, 1x1 conv (bottleneck * growth), BN, ReLU, 3x3 conv (growth).
template <typename T>
class DenseBlock final : public Layer<T> {
 public:
  DenseBlock(const std::string& name, int inChannels, int layers, int growth, int bottleneck, Rng& rng);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& gradOut) override;
  void collectParameters(std::vector<Parameter<T>*>& out) override;
  std::array<int, 4> outputShape(std::array<int, 4> in) const override;

  int inputChannelsOfLayer(int j) const { return inChannels_ + j * growth_; }
  int outChannels() const { return inChannels_ + static_cast<int>(layers_.size()) * growth_; }

 private:
  int inChannels_, growth_;
  std::vector<std::unique_ptr<Sequential<T>>> layers_;
};

// Appends channels of b after those of a.
template <typename T>
Tensor<T> concatChannels(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace dqd::nn
