#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqd::nn {

// Dense NCHW tensor. Vectors and matrices use trailing unit dimensions.
template <typename T>
struct Tensor {
  std::array<int, 4> shape{0, 0, 0, 0};
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n, int c, int h, int w, T fill = T(0))
      : shape{n, c, h, w},
        data(static_cast<std::size_t>(n) * static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
                 static_cast<std::size_t>(w),
             fill) {}

  int n() const { return shape[0]; }
  int c() const { return shape[1]; }
  int h() const { return shape[2]; }
  int w() const { return shape[3]; }
  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(shape[2]) * static_cast<std::size_t>(shape[3]); }

  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * static_cast<std::size_t>(shape[1]) +
             static_cast<std::size_t>(ic)) *
                static_cast<std::size_t>(shape[2]) +
            static_cast<std::size_t>(ih)) *
               static_cast<std::size_t>(shape[3]) +
           static_cast<std::size_t>(iw);
  }
  T& at(int in, int ic, int ih, int iw) { return data[index(in, ic, ih, iw)]; }
  T at(int in, int ic, int ih, int iw) const { return data[index(in, ic, ih, iw)]; }

  T* sample(int in) { return data.data() + static_cast<std::size_t>(in) * perSample(); }
  const T* sample(int in) const { return data.data() + static_cast<std::size_t>(in) * perSample(); }
  std::size_t perSample() const {
    return static_cast<std::size_t>(shape[1]) * plane();
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }
  bool sameShape(const Tensor& o) const { return shape == o.shape; }
};

// A named model tensor with its gradient. Non-trainable parameters (batch-norm
// running statistics) are checkpointed but never updated by the optimizer.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, std::array<int, 4> shape, bool isTrainable = true)
      : name(std::move(n)),
        value(shape[0], shape[1], shape[2], shape[3]),
        grad(isTrainable ? Tensor<T>(shape[0], shape[1], shape[2], shape[3]) : Tensor<T>()),
        trainable(isTrainable) {}
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dqd::nn
