#include "dqdetect/nn/layers.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace dqd::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

std::string shapeString(const std::array<int, 4>& s) {
  return std::to_string(s[0]) + "x" + std::to_string(s[1]) + "x" + std::to_string(s[2]) + "x" +
         std::to_string(s[3]);
}

template <typename T>
void xavierUniform(Tensor<T>& w, int fanIn, int fanOut, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fanIn + fanOut));
  for (auto& v : w.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(std::string name, int inChannels, int outChannels, int kernel, int stride, int pad,
                  Rng& rng)
    : inChannels_(inChannels),
      outChannels_(outChannels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      weight_(name + ".weight", {outChannels, inChannels, kernel, kernel}),
      bias_(name + ".bias", {outChannels, 1, 1, 1}) {
  xavierUniform(weight_.value, inChannels * kernel * kernel, outChannels * kernel * kernel, rng);
}

template <typename T>
std::array<int, 4> Conv2d<T>::outputShape(std::array<int, 4> in) const {
  if (in[1] != inChannels_) {
    throw ShapeError("conv expects " + std::to_string(inChannels_) + " channels, got " + shapeString(in));
  }
  const int h = (in[2] + 2 * pad_ - kernel_) / stride_ + 1;
  const int w = (in[3] + 2 * pad_ - kernel_) / stride_ + 1;
  if (in[2] + 2 * pad_ < kernel_ || in[3] + 2 * pad_ < kernel_ || h <= 0 || w <= 0) {
    throw ShapeError("conv input too small: " + shapeString(in));
  }
  return {in[0], outChannels_, h, w};
}

template <typename T>
void Conv2d<T>::im2col(const Tensor<T>& x, int outH, int outW, std::vector<T>& cols) const {
  const int n = x.n();
  const std::size_t p = static_cast<std::size_t>(outH) * static_cast<std::size_t>(outW);
  const std::size_t np = static_cast<std::size_t>(n) * p;
  const std::size_t k = static_cast<std::size_t>(inChannels_ * kernel_ * kernel_);
  cols.assign(k * np, T(0));
  for (int in = 0; in < n; ++in) {
    for (int c = 0; c < inChannels_; ++c) {
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          const std::size_t row = static_cast<std::size_t>((c * kernel_ + ky) * kernel_ + kx);
          T* dst = cols.data() + row * np + static_cast<std::size_t>(in) * p;
          for (int oy = 0; oy < outH; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= x.h()) continue;
            const T* src = &x.data[x.index(in, c, iy, 0)];
            T* d = dst + static_cast<std::size_t>(oy) * static_cast<std::size_t>(outW);
            for (int ox = 0; ox < outW; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix >= 0 && ix < x.w()) d[ox] = src[ix];
            }
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Mode) {
  const auto os = outputShape(x.shape);
  input_ = x;
  const int outH = os[2], outW = os[3];
  const auto p = static_cast<Eigen::Index>(outH) * outW;
  const auto np = static_cast<Eigen::Index>(x.n()) * p;
  const auto k = static_cast<Eigen::Index>(inChannels_) * kernel_ * kernel_;

  std::vector<T> cols;
  im2col(x, outH, outW, cols);
  RowMat<T> y = ConstMatMap<T>(weight_.value.data.data(), outChannels_, k) * ConstMatMap<T>(cols.data(), k, np);

  Tensor<T> out(os[0], os[1], os[2], os[3]);
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < outChannels_; ++co) {
      const T b = bias_.value.data[static_cast<std::size_t>(co)];
      const T* src = y.data() + co * np + n * p;
      T* dst = &out.data[out.index(n, co, 0, 0)];
      for (Eigen::Index i = 0; i < p; ++i) dst[i] = src[i] + b;
    }
  }
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& gradOut) {
  const Tensor<T>& x = input_;
  const int outH = gradOut.h(), outW = gradOut.w();
  const auto p = static_cast<Eigen::Index>(outH) * outW;
  const auto np = static_cast<Eigen::Index>(x.n()) * p;
  const auto k = static_cast<Eigen::Index>(inChannels_) * kernel_ * kernel_;

  RowMat<T> dy(outChannels_, np);
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < outChannels_; ++co) {
      const T* src = &gradOut.data[gradOut.index(n, co, 0, 0)];
      std::copy(src, src + p, dy.data() + co * np + n * p);
    }
  }

  std::vector<T> cols;
  im2col(x, outH, outW, cols);
  ConstMatMap<T> colMat(cols.data(), k, np);
  MatMap<T>(weight_.grad.data.data(), outChannels_, k).noalias() += dy * colMat.transpose();
  for (int co = 0; co < outChannels_; ++co) bias_.grad.data[static_cast<std::size_t>(co)] += dy.row(co).sum();

  RowMat<T> dcols = ConstMatMap<T>(weight_.value.data.data(), outChannels_, k).transpose() * dy;

  Tensor<T> dx(x.n(), x.c(), x.h(), x.w());
  for (int in = 0; in < x.n(); ++in) {
    for (int c = 0; c < inChannels_; ++c) {
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          const auto row = static_cast<Eigen::Index>((c * kernel_ + ky) * kernel_ + kx);
          const T* src = dcols.data() + row * np + in * p;
          for (int oy = 0; oy < outH; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= x.h()) continue;
            T* d = &dx.data[dx.index(in, c, iy, 0)];
            const T* s = src + static_cast<std::ptrdiff_t>(oy) * outW;
            for (int ox = 0; ox < outW; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix >= 0 && ix < x.w()) d[ix] += s[ox];
            }
          }
        }
      }
    }
  }
  return dx;
}

template <typename T>
void Conv2d<T>::collectParameters(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ----------------------------------------------------------- BatchNorm2d

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::string name, int channels)
    : channels_(channels),
      gamma_(name + ".gamma", {channels, 1, 1, 1}),
      beta_(name + ".beta", {channels, 1, 1, 1}),
      runningMean_(name + ".running_mean", {channels, 1, 1, 1}, false),
      runningVar_(name + ".running_var", {channels, 1, 1, 1}, false) {
  gamma_.value.fill(T(1));
  runningVar_.value.fill(T(1));
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
  if (x.c() != channels_) throw ShapeError("batch norm channel mismatch: " + shapeString(x.shape));
  if (mode == Mode::Calibrate) calibrationBatches_ = lastMode_ == Mode::Calibrate ? calibrationBatches_ + 1 : 0;
  lastMode_ = mode;
  Tensor<T> out(x.n(), x.c(), x.h(), x.w());
  const std::size_t plane = x.plane();
  const double count = static_cast<double>(x.n()) * static_cast<double>(plane);
  normalized_ = Tensor<T>(x.n(), x.c(), x.h(), x.w());
  invStd_.assign(static_cast<std::size_t>(channels_), T(0));

  for (int c = 0; c < channels_; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    double mean, var;
    if (mode != Mode::Eval) {
      double sum = 0.0;
      for (int n = 0; n < x.n(); ++n) {
        const T* s = &x.data[x.index(n, c, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) sum += static_cast<double>(s[i]);
      }
      mean = sum / count;
      double sq = 0.0;
      for (int n = 0; n < x.n(); ++n) {
        const T* s = &x.data[x.index(n, c, 0, 0)];
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = static_cast<double>(s[i]) - mean;
          sq += d * d;
        }
      }
      var = sq / count;
      const double unbiased = count > 1 ? sq / (count - 1) : var;
      auto& rm = runningMean_.value.data[cs];
      auto& rv = runningVar_.value.data[cs];
      const double keep =
          mode == Mode::Train ? kMomentum : static_cast<double>(calibrationBatches_) / (calibrationBatches_ + 1.0);
      rm = static_cast<T>(keep * static_cast<double>(rm) + (1.0 - keep) * mean);
      rv = static_cast<T>(keep * static_cast<double>(rv) + (1.0 - keep) * unbiased);
    } else {
      mean = static_cast<double>(runningMean_.value.data[cs]);
      var = static_cast<double>(runningVar_.value.data[cs]);
    }
    const T inv = static_cast<T>(1.0 / std::sqrt(var + kEpsilon));
    const T m = static_cast<T>(mean);
    invStd_[cs] = inv;
    const T g = gamma_.value.data[cs];
    const T b = beta_.value.data[cs];
    for (int n = 0; n < x.n(); ++n) {
      const std::size_t base = x.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = (x.data[base + i] - m) * inv;
        normalized_.data[base + i] = xh;
        out.data[base + i] = g * xh + b;
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& gradOut) {
  const Tensor<T>& xh = normalized_;
  Tensor<T> dx(xh.n(), xh.c(), xh.h(), xh.w());
  const std::size_t plane = xh.plane();
  const double count = static_cast<double>(xh.n()) * static_cast<double>(plane);
  for (int c = 0; c < channels_; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    double dbeta = 0.0, dgamma = 0.0;
    for (int n = 0; n < xh.n(); ++n) {
      const std::size_t base = xh.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        dbeta += static_cast<double>(gradOut.data[base + i]);
        dgamma += static_cast<double>(gradOut.data[base + i]) * static_cast<double>(xh.data[base + i]);
      }
    }
    beta_.grad.data[cs] += static_cast<T>(dbeta);
    gamma_.grad.data[cs] += static_cast<T>(dgamma);
    const double g = static_cast<double>(gamma_.value.data[cs]);
    const double inv = static_cast<double>(invStd_[cs]);
    for (int n = 0; n < xh.n(); ++n) {
      const std::size_t base = xh.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const double dy = static_cast<double>(gradOut.data[base + i]);
        if (lastMode_ == Mode::Train) {
          dx.data[base + i] = static_cast<T>(
              g * inv / count * (count * dy - dbeta - static_cast<double>(xh.data[base + i]) * dgamma));
        } else {
          dx.data[base + i] = static_cast<T>(g * inv * dy);
        }
      }
    }
  }
  return dx;
}

template <typename T>
void BatchNorm2d<T>::collectParameters(std::vector<Parameter<T>*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
  out.push_back(&runningMean_);
  out.push_back(&runningVar_);
}

// ------------------------------------------------------------------ ReLU

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> out = x;
  mask_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool on = x.data[i] > T(0);
    mask_[i] = on ? 1 : 0;
    if (!on) out.data[i] = T(0);
  }
  return out;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& gradOut) {
  Tensor<T> dx = gradOut;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!mask_[i]) dx.data[i] = T(0);
  }
  return dx;
}

// ------------------------------------------------------------- MaxPool2d

template <typename T>
std::array<int, 4> MaxPool2d<T>::outputShape(std::array<int, 4> in) const {
  const int h = (in[2] + 2 * pad_ - kernel_) / stride_ + 1;
  const int w = (in[3] + 2 * pad_ - kernel_) / stride_ + 1;
  if (in[2] + 2 * pad_ < kernel_ || in[3] + 2 * pad_ < kernel_ || h <= 0 || w <= 0) {
    throw ShapeError("max pool input too small: " + shapeString(in));
  }
  return {in[0], in[1], h, w};
}

template <typename T>
Tensor<T> MaxPool2d<T>::forward(const Tensor<T>& x, Mode) {
  const auto os = outputShape(x.shape);
  inShape_ = x.shape;
  Tensor<T> out(os[0], os[1], os[2], os[3]);
  argmax_.assign(out.size(), 0);
  std::size_t o = 0;
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      for (int oy = 0; oy < os[2]; ++oy) {
        for (int ox = 0; ox < os[3]; ++ox, ++o) {
          T best = -std::numeric_limits<T>::infinity();
          std::size_t bestIdx = 0;
          for (int ky = 0; ky < kernel_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= x.h()) continue;
            for (int kx = 0; kx < kernel_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= x.w()) continue;
              const std::size_t idx = x.index(n, c, iy, ix);
              if (x.data[idx] > best) {
                best = x.data[idx];
                bestIdx = idx;
              }
            }
          }
          out.data[o] = best;
          argmax_[o] = bestIdx;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> MaxPool2d<T>::backward(const Tensor<T>& gradOut) {
  Tensor<T> dx(inShape_[0], inShape_[1], inShape_[2], inShape_[3]);
  for (std::size_t o = 0; o < gradOut.size(); ++o) dx.data[argmax_[o]] += gradOut.data[o];
  return dx;
}

// ------------------------------------------------------------- AvgPool2d

template <typename T>
std::array<int, 4> AvgPool2d<T>::outputShape(std::array<int, 4> in) const {
  const int h = in[2] / kernel_;
  const int w = in[3] / kernel_;
  if (h <= 0 || w <= 0) throw ShapeError("average pool input too small: " + shapeString(in));
  return {in[0], in[1], h, w};
}

template <typename T>
Tensor<T> AvgPool2d<T>::forward(const Tensor<T>& x, Mode) {
  const auto os = outputShape(x.shape);
  inShape_ = x.shape;
  Tensor<T> out(os[0], os[1], os[2], os[3]);
  const T scale = T(1) / static_cast<T>(kernel_ * kernel_);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      for (int oy = 0; oy < os[2]; ++oy) {
        for (int ox = 0; ox < os[3]; ++ox) {
          T s = T(0);
          for (int ky = 0; ky < kernel_; ++ky) {
            for (int kx = 0; kx < kernel_; ++kx) s += x.at(n, c, oy * kernel_ + ky, ox * kernel_ + kx);
          }
          out.at(n, c, oy, ox) = s * scale;
        }
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> AvgPool2d<T>::backward(const Tensor<T>& gradOut) {
  Tensor<T> dx(inShape_[0], inShape_[1], inShape_[2], inShape_[3]);
  const T scale = T(1) / static_cast<T>(kernel_ * kernel_);
  for (int n = 0; n < gradOut.n(); ++n) {
    for (int c = 0; c < gradOut.c(); ++c) {
      for (int oy = 0; oy < gradOut.h(); ++oy) {
        for (int ox = 0; ox < gradOut.w(); ++ox) {
          const T g = gradOut.at(n, c, oy, ox) * scale;
          for (int ky = 0; ky < kernel_; ++ky) {
            for (int kx = 0; kx < kernel_; ++kx) dx.at(n, c, oy * kernel_ + ky, ox * kernel_ + kx) += g;
          }
        }
      }
    }
  }
  return dx;
}

// --------------------------------------------------------- GlobalAvgPool

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, Mode) {
  inShape_ = x.shape;
  Tensor<T> out(x.n(), x.c(), 1, 1);
  const std::size_t plane = x.plane();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const T* s = &x.data[x.index(n, c, 0, 0)];
      T sum = T(0);
      for (std::size_t i = 0; i < plane; ++i) sum += s[i];
      out.at(n, c, 0, 0) = sum / static_cast<T>(plane);
    }
  }
  return out;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& gradOut) {
  Tensor<T> dx(inShape_[0], inShape_[1], inShape_[2], inShape_[3]);
  const std::size_t plane = dx.plane();
  for (int n = 0; n < dx.n(); ++n) {
    for (int c = 0; c < dx.c(); ++c) {
      const T g = gradOut.at(n, c, 0, 0) / static_cast<T>(plane);
      T* d = &dx.data[dx.index(n, c, 0, 0)];
      for (std::size_t i = 0; i < plane; ++i) d[i] = g;
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(std::string name, int inFeatures, int outFeatures, Rng& rng)
    : inFeatures_(inFeatures),
      outFeatures_(outFeatures),
      weight_(name + ".weight", {outFeatures, inFeatures, 1, 1}),
      bias_(name + ".bias", {outFeatures, 1, 1, 1}) {
  xavierUniform(weight_.value, inFeatures, outFeatures, rng);
}

template <typename T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x, Mode) {
  if (x.perSample() != static_cast<std::size_t>(inFeatures_)) {
    throw ShapeError("linear layer expects " + std::to_string(inFeatures_) + " features, got " +
                     shapeString(x.shape));
  }
  input_ = x;
  Tensor<T> out(x.n(), outFeatures_, 1, 1);
  MatMap<T>(out.data.data(), x.n(), outFeatures_) =
      ConstMatMap<T>(x.data.data(), x.n(), inFeatures_) *
      ConstMatMap<T>(weight_.value.data.data(), outFeatures_, inFeatures_).transpose();
  for (int n = 0; n < x.n(); ++n) {
    for (int o = 0; o < outFeatures_; ++o) out.at(n, o, 0, 0) += bias_.value.data[static_cast<std::size_t>(o)];
  }
  return out;
}

template <typename T>
Tensor<T> Linear<T>::backward(const Tensor<T>& gradOut) {
  const int n = input_.n();
  ConstMatMap<T> dy(gradOut.data.data(), n, outFeatures_);
  MatMap<T>(weight_.grad.data.data(), outFeatures_, inFeatures_).noalias() +=
      dy.transpose() * ConstMatMap<T>(input_.data.data(), n, inFeatures_);
  for (int o = 0; o < outFeatures_; ++o) bias_.grad.data[static_cast<std::size_t>(o)] += dy.col(o).sum();
  Tensor<T> dx(input_.n(), input_.c(), input_.h(), input_.w());
  MatMap<T>(dx.data.data(), n, inFeatures_) =
      dy * ConstMatMap<T>(weight_.value.data.data(), outFeatures_, inFeatures_);
  return dx;
}

template <typename T>
void Linear<T>::collectParameters(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------------ Sequential

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
  if (layers_.empty()) return x;
  Tensor<T> h = layers_.front()->forward(x, mode);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& gradOut) {
  if (layers_.empty()) return gradOut;
  Tensor<T> g = layers_.back()->backward(gradOut);
  for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename T>
void Sequential<T>::collectParameters(std::vector<Parameter<T>*>& out) {
  for (auto& l : layers_) l->collectParameters(out);
}

template <typename T>
std::array<int, 4> Sequential<T>::outputShape(std::array<int, 4> in) const {
  for (const auto& l : layers_) in = l->outputShape(in);
  return in;
}

// ------------------------------------------------------------ DenseBlock

template <typename T>
Tensor<T> concatChannels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
    throw ShapeError("concat shape mismatch: " + shapeString(a.shape) + " vs " + shapeString(b.shape));
  }
  Tensor<T> out(a.n(), a.c() + b.c(), a.h(), a.w());
  for (int n = 0; n < a.n(); ++n) {
    std::copy(a.sample(n), a.sample(n) + a.perSample(), out.sample(n));
    std::copy(b.sample(n), b.sample(n) + b.perSample(), out.sample(n) + a.perSample());
  }
  return out;
}

template <typename T>
DenseBlock<T>::DenseBlock(const std::string& name, int inChannels, int layers, int growth, int bottleneck,
                          Rng& rng)
    : inChannels_(inChannels), growth_(growth) {
  for (int j = 0; j < layers; ++j) {
    const std::string prefix = name + ".layer" + std::to_string(j + 1);
    const int cin = inputChannelsOfLayer(j);
    auto seq = std::make_unique<Sequential<T>>();
    seq->add(std::make_unique<BatchNorm2d<T>>(prefix + ".norm1", cin));
    seq->add(std::make_unique<ReLU<T>>());
    seq->add(std::make_unique<Conv2d<T>>(prefix + ".conv1", cin, bottleneck * growth, 1, 1, 0, rng));
    seq->add(std::make_unique<BatchNorm2d<T>>(prefix + ".norm2", bottleneck * growth));
    seq->add(std::make_unique<ReLU<T>>());
    seq->add(std::make_unique<Conv2d<T>>(prefix + ".conv2", bottleneck * growth, growth, 3, 1, 1, rng));
    layers_.push_back(std::move(seq));
  }
}

template <typename T>
Tensor<T> DenseBlock<T>::forward(const Tensor<T>& x, Mode mode) {
  Tensor<T> features = x;
  for (auto& layer : layers_) features = concatChannels(features, layer->forward(features, mode));
  return features;
}

template <typename T>
Tensor<T> DenseBlock<T>::backward(const Tensor<T>& gradOut) {
  Tensor<T> g = gradOut;
  for (std::size_t j = layers_.size(); j-- > 0;) {
    const int prev = inputChannelsOfLayer(static_cast<int>(j));
    Tensor<T> gPrev(g.n(), prev, g.h(), g.w());
    Tensor<T> gNew(g.n(), growth_, g.h(), g.w());
    for (int n = 0; n < g.n(); ++n) {
      std::copy(g.sample(n), g.sample(n) + gPrev.perSample(), gPrev.sample(n));
      std::copy(g.sample(n) + gPrev.perSample(), g.sample(n) + g.perSample(), gNew.sample(n));
    }
    const Tensor<T> gx = layers_[j]->backward(gNew);
    for (std::size_t i = 0; i < gPrev.size(); ++i) gPrev.data[i] += gx.data[i];
    g = std::move(gPrev);
  }
  return g;
}

template <typename T>
void DenseBlock<T>::collectParameters(std::vector<Parameter<T>*>& out) {
  for (auto& l : layers_) l->collectParameters(out);
}

template <typename T>
std::array<int, 4> DenseBlock<T>::outputShape(std::array<int, 4> in) const {
  if (in[1] != inChannels_) throw ShapeError("dense block channel mismatch: " + shapeString(in));
  for (const auto& l : layers_) {
    const auto y = l->outputShape(in);
    in[1] += y[1];
  }
  return in;
}

#define DQD_INSTANTIATE(T)                                                   \
  template class Conv2d<T>;                                                  \
  template class BatchNorm2d<T>;                                             \
  template class ReLU<T>;                                                    \
  template class MaxPool2d<T>;                                               \
  template class AvgPool2d<T>;                                               \
  template class GlobalAvgPool<T>;                                           \
  template class Linear<T>;                                                  \
  template class Sequential<T>;                                              \
  template class DenseBlock<T>;                                              \
  template Tensor<T> concatChannels<T>(const Tensor<T>&, const Tensor<T>&);

DQD_INSTANTIATE(float)
DQD_INSTANTIATE(double)

#undef DQD_INSTANTIATE

}  // namespace dqd::nn
