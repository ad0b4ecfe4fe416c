#include "dqdetect/nn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dqd::nn {

ModelConfig ModelConfig::full(int b, bool withQFactors) {
  ModelConfig c;
  c.inputCols = 2 * b + 1;
  c.inputChannels = withQFactors ? 2 : 1;
  return c;
}

ModelConfig ModelConfig::toy(int b, bool withQFactors) {
  ModelConfig c;
  c.growthRate = 8;
  c.blockLayers = {2, 2, 2, 2};
  c.stemKernels = 16;
  c.inputCols = 2 * b + 1;
  c.inputChannels = withQFactors ? 2 : 1;
  return c;
}

void ModelConfig::validate() const {
  if (growthRate < 1 || stemKernels < 1 || bottleneck < 1) throw std::invalid_argument("widths must be positive");
  if (blockLayers.empty()) throw std::invalid_argument("at least one dense block required");
  for (int l : blockLayers) {
    if (l < 1) throw std::invalid_argument("dense blocks need at least one layer");
  }
  if (!(compression > 0.0 && compression <= 1.0)) throw std::invalid_argument("compression must be in (0,1]");
  if (classCount != 2) throw std::invalid_argument("classCount must be 2");
  if (inputRows < 1 || inputCols < 1 || inputChannels < 1) throw std::invalid_argument("bad input shape");
}

nlohmann::json ModelConfig::toJson() const {
  return {{"growth_rate", growthRate},   {"block_layers", blockLayers}, {"stem_kernels", stemKernels},
          {"compression", compression},  {"bottleneck", bottleneck},    {"input_rows", inputRows},
          {"input_cols", inputCols},     {"input_channels", inputChannels}, {"class_count", classCount}};
}

ModelConfig ModelConfig::fromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.growthRate = j.at("growth_rate").get<int>();
  c.blockLayers = j.at("block_layers").get<std::vector<int>>();
  c.stemKernels = j.at("stem_kernels").get<int>();
  c.compression = j.at("compression").get<double>();
  c.bottleneck = j.at("bottleneck").get<int>();
  c.inputRows = j.at("input_rows").get<int>();
  c.inputCols = j.at("input_cols").get<int>();
  c.inputChannels = j.at("input_channels").get<int>();
  c.classCount = j.at("class_count").get<int>();
  c.validate();
  return c;
}

template <typename T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  body_.add(std::make_unique<Conv2d<T>>("stem.conv", config_.inputChannels, config_.stemKernels, 7, 2, 3, rng));
  body_.add(std::make_unique<BatchNorm2d<T>>("stem.norm", config_.stemKernels));
  body_.add(std::make_unique<ReLU<T>>());
  body_.add(std::make_unique<MaxPool2d<T>>(3, 2, 1));

  int channels = config_.stemKernels;
  const auto blocks = config_.blockLayers.size();
  for (std::size_t i = 0; i < blocks; ++i) {
    const std::string name = "block" + std::to_string(i + 1);
    auto block = std::make_unique<DenseBlock<T>>(name, channels, config_.blockLayers[i], config_.growthRate,
                                                 config_.bottleneck, rng);
    std::vector<int> inputs;
    for (int j = 0; j < config_.blockLayers[i]; ++j) inputs.push_back(block->inputChannelsOfLayer(j));
    denseInputs_.push_back(std::move(inputs));
    channels = block->outChannels();
    body_.add(std::move(block));
    if (i + 1 < blocks) {
      const std::string tname = "transition" + std::to_string(i + 1);
      const int out = static_cast<int>(std::floor(channels * config_.compression));
      if (out < 1) throw ShapeError("transition would produce zero channels");
      body_.add(std::make_unique<BatchNorm2d<T>>(tname + ".norm", channels));
      body_.add(std::make_unique<ReLU<T>>());
      body_.add(std::make_unique<Conv2d<T>>(tname + ".conv", channels, out, 1, 1, 0, rng));
      body_.add(std::make_unique<AvgPool2d<T>>(2));
      channels = out;
    }
  }
  body_.add(std::make_unique<BatchNorm2d<T>>("final.norm", channels));
  body_.add(std::make_unique<ReLU<T>>());
  head_ = std::make_unique<Linear<T>>("classifier", channels, config_.classCount, rng);

  // Walk the shapes once so infeasible inputs fail at construction.
  try {
    featureShape_ = body_.outputShape({1, config_.inputChannels, config_.inputRows, config_.inputCols});
  } catch (const ShapeError& e) {
    throw ShapeError(std::string("input ") + std::to_string(config_.inputRows) + "x" +
                     std::to_string(config_.inputCols) + " too small for the network: " + e.what());
  }
  body_.add(std::make_unique<GlobalAvgPool<T>>());
}

template <typename T>
void Model<T>::checkInput(const Tensor<T>& input) const {
  if (input.c() != config_.inputChannels || input.h() != config_.inputRows || input.w() != config_.inputCols ||
      input.n() < 1) {
    throw ShapeError("input shape " + std::to_string(input.n()) + "x" + std::to_string(input.c()) + "x" +
                     std::to_string(input.h()) + "x" + std::to_string(input.w()) + " does not match model " +
                     std::to_string(config_.inputChannels) + "x" + std::to_string(config_.inputRows) + "x" +
                     std::to_string(config_.inputCols));
  }
}

template <typename T>
Tensor<T> Model<T>::logits(const Tensor<T>& input, Mode mode) {
  checkInput(input);
  return head_->forward(body_.forward(input, mode), mode);
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input, Mode mode) {
  return softmax(logits(input, mode));
}

template <typename T>
T Model<T>::lossAndGradients(const Tensor<T>& input, std::span<const int> labels, Mode mode,
                             Tensor<T>* logitsOut) {
  if (labels.size() != static_cast<std::size_t>(input.n())) throw ShapeError("label count differs from batch");
  zeroGradients();
  const Tensor<T> z = logits(input, mode);
  Tensor<T> dz;
  const T loss = crossEntropy(z, labels, &dz);
  body_.backward(head_->backward(dz));
  if (logitsOut) *logitsOut = z;
  return loss;
}

template <typename T>
std::vector<Parameter<T>*> Model<T>::parameters() {
  std::vector<Parameter<T>*> out;
  body_.collectParameters(out);
  head_->collectParameters(out);
  return out;
}

template <typename T>
std::size_t Model<T>::learnableParameterCount() {
  std::size_t n = 0;
  for (auto* p : parameters()) {
    if (p->trainable) n += p->value.size();
  }
  return n;
}

template <typename T>
void Model<T>::zeroGradients() {
  for (auto* p : parameters()) {
    if (p->trainable) p->grad.fill(T(0));
  }
}

template <typename T>
std::vector<std::vector<int>> Model<T>::denseLayerInputChannels() const {
  return denseInputs_;
}

template <typename T>
std::array<int, 4> Model<T>::featureShape() const {
  return featureShape_;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  Tensor<T> p(logits.n(), logits.c(), 1, 1);
  const int k = logits.c();
  for (int n = 0; n < logits.n(); ++n) {
    const T* z = logits.sample(n);
    T* out = p.sample(n);
    T mx = z[0];
    for (int i = 1; i < k; ++i) mx = std::max(mx, z[i]);
    T sum = T(0);
    for (int i = 0; i < k; ++i) {
      out[i] = std::exp(z[i] - mx);
      sum += out[i];
    }
    for (int i = 0; i < k; ++i) out[i] /= sum;
  }
  return p;
}

template <typename T>
T crossEntropy(const Tensor<T>& logits, std::span<const int> labels, Tensor<T>* gradLogits) {
  const int n = logits.n();
  const int k = logits.c();
  if (labels.size() != static_cast<std::size_t>(n)) throw ShapeError("label count differs from batch");
  if (gradLogits) *gradLogits = Tensor<T>(n, k, 1, 1);
  double loss = 0.0;
  for (int s = 0; s < n; ++s) {
    const int y = labels[static_cast<std::size_t>(s)];
    if (y < 0 || y >= k) throw std::invalid_argument("label out of range");
    const T* z = logits.sample(s);
    T mx = z[0];
    for (int i = 1; i < k; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::exp(static_cast<double>(z[i] - mx));
    const double logSum = std::log(sum) + static_cast<double>(mx);
    loss += logSum - static_cast<double>(z[y]);
    if (gradLogits) {
      T* g = gradLogits->sample(s);
      for (int i = 0; i < k; ++i) {
        const double p = std::exp(static_cast<double>(z[i]) - logSum);
        g[i] = static_cast<T>((p - (i == y ? 1.0 : 0.0)) / n);
      }
    }
  }
  return static_cast<T>(loss / n);
}

template <typename T>
void Adam<T>::step(const std::vector<Parameter<T>*>& params, double learningRate) {
  if (m_.empty()) {
    for (auto* p : params) {
      m_.emplace_back(p->trainable ? p->value.size() : 0, T(0));
      v_.emplace_back(p->trainable ? p->value.size() : 0, T(0));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("optimizer state does not match parameters");
  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(options_.beta1), b2 = static_cast<T>(options_.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto* p = params[i];
    if (!p->trainable) continue;
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.size() != p->value.size()) throw std::invalid_argument("optimizer state shape mismatch");
    for (std::size_t j = 0; j < m.size(); ++j) {
      const T g = p->grad.data[j];
      m[j] = b1 * m[j] + (T(1) - b1) * g;
      v[j] = b2 * v[j] + (T(1) - b2) * g * g;
      const double mhat = static_cast<double>(m[j]) / c1;
      const double vhat = static_cast<double>(v[j]) / c2;
      p->value.data[j] -= static_cast<T>(learningRate * mhat / (std::sqrt(vhat) + options_.epsilon));
    }
  }
}

template class Model<float>;
template class Model<double>;
template class Adam<float>;
template class Adam<double>;
template Tensor<float> softmax(const Tensor<float>&);
template Tensor<double> softmax(const Tensor<double>&);
template float crossEntropy(const Tensor<float>&, std::span<const int>, Tensor<float>*);
template double crossEntropy(const Tensor<double>&, std::span<const int>, Tensor<double>*);

}  // namespace dqd::nn
