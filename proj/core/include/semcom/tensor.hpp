#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <vector>

#include "semcom/common.hpp"

namespace semcom {

using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXf;
using MatMap = Eigen::Map<Mat>;
using CMatMap = Eigen::Map<const Mat>;

// 64-byte aligned storage so vectorized Eigen kernels see identical buffer
// alignment on every allocation; this keeps repeated runs bitwise identical.
using FloatVec = std::vector<float, Eigen::aligned_allocator<float>>;

// Dense n-d float array, row-major.
struct Tensor {
  std::vector<int> shape;
  FloatVec v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(count(shape), 0.f) {}

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t size() const { return v.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  float* data() { return v.data(); }
  const float* data() const { return v.data(); }

  // 2-d view with explicit dimensions (product must equal size()).
  MatMap mat(int rows, int cols) {
    if (static_cast<std::size_t>(rows) * cols != v.size())
      throw ContractViolation("tensor view shape mismatch");
    return MatMap(v.data(), rows, cols);
  }
  CMatMap mat(int rows, int cols) const {
    if (static_cast<std::size_t>(rows) * cols != v.size())
      throw ContractViolation("tensor view shape mismatch");
    return CMatMap(v.data(), rows, cols);
  }

  // [B, rest] view for layer I/O.
  MatMap rows_by_rest() {
    return mat(shape[0], static_cast<int>(v.size()) / shape[0]);
  }
  CMatMap rows_by_rest() const {
    return mat(shape[0], static_cast<int>(v.size()) / shape[0]);
  }

  Tensor reshaped(std::vector<int> s) const {
    if (count(s) != v.size()) throw ContractViolation("reshape size mismatch");
    Tensor t;
    t.shape = std::move(s);
    t.v = v;
    return t;
  }

  bool finite() const {
    for (float x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

}  // namespace semcom
