#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semcom/rng.hpp"
#include "semcom/tensor.hpp"

namespace semcom {

struct Param {
  std::string name;
  Tensor w;  // value
  Tensor g;  // gradient, same shape
};

// A differentiable block. forward() stores whatever backward() needs, so each
// layer supports one in-flight forward/backward pair at a time.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& gy) = 0;
  virtual void collect(std::vector<Param*>& out) { (void)out; }
  // Non-trainable state that still belongs in checkpoints (batchnorm stats).
  virtual void collect_buffers(std::vector<Param*>& out) { (void)out; }
};

class Dense : public Layer {
 public:
  Dense(int in, int out, Stream& init, std::string name);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Param*>& out) override;

 private:
  int in_, out_;
  Param w_, b_;
  Tensor x_;
};

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;

 private:
  Tensor y_;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;

 private:
  Tensor y_;
};

class Dropout : public Layer {
 public:
  Dropout(double rate, Stream* stream) : rate_(rate), stream_(stream) {}
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;

 private:
  double rate_;
  Stream* stream_;
  std::vector<float> mask_;
  bool active_ = false;
};

// Reshape [B, ...] to [B, dims...]; Flatten is Reshape to one axis.
class Reshape : public Layer {
 public:
  explicit Reshape(std::vector<int> dims_after_batch) : dims_(std::move(dims_after_batch)) {}
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;

 private:
  std::vector<int> dims_;
  std::vector<int> in_shape_;
};

class BatchNorm2d : public Layer {
 public:
  BatchNorm2d(int channels, std::string name, double momentum = 0.1, double eps = 1e-5);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Param*>& out) override;
  void collect_buffers(std::vector<Param*>& out) override;

 private:
  int c_;
  double momentum_, eps_;
  Param gamma_, beta_;
  Param running_mean_, running_var_;  // buffers
  Tensor xhat_;
  std::vector<float> invstd_;
  bool last_train_ = false;
  std::vector<int> in_shape_;
};

class MaxPool2 : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;

 private:
  std::vector<int> in_shape_;
  std::vector<int> argmax_;
};

// 3x3 conv, stride 1, zero padding 1 (shape preserving).
class Conv2d : public Layer {
 public:
  Conv2d(int cin, int cout, Stream& init, std::string name);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Param*>& out) override;

 private:
  int cin_, cout_;
  Param w_;  // [cout, cin*9]
  Param b_;  // [cout]
  Tensor x_;
};

// 3x3 transposed conv, stride 2, padding 1, output padding 1 (2x upsampling).
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(int cin, int cout, Stream& init, std::string name);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Param*>& out) override;

 private:
  int cin_, cout_;
  Param w_;  // [cin, cout*9]
  Param b_;  // [cout]
  Tensor x_;
};

class Sequential : public Layer {
 public:
  Sequential() = default;
  template <typename T, typename... Args>
  T& add(Args&&... args) {
    auto l = std::make_unique<T>(std::forward<Args>(args)...);
    T& ref = *l;
    layers_.push_back(std::move(l));
    return ref;
  }
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& gy) override;
  void collect(std::vector<Param*>& out) override;
  void collect_buffers(std::vector<Param*>& out) override;

  std::vector<Param*> params();          // trainable
  std::vector<Param*> all_state();       // trainable + buffers
  std::size_t parameter_count();
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Adam with bias correction; one instance per trained network.
class Adam {
 public:
  Adam(std::vector<Param*> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step();
  void zero_grads();

 private:
  std::vector<Param*> params_;
  std::vector<std::vector<float>> m_, v_;
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
};

}  // namespace semcom
