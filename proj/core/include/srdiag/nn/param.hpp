#pragma once

#include <string>
#include <vector>

#include "srdiag/nn/tensor.hpp"

namespace srdiag::nn {

/// Trainable tensor plus its gradient accumulator. `dims` is the shape reported
/// in serialized form (e.g. [out, in, k, k] for conv weights, [out] for biases).
template <typename T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
  std::vector<int> dims;

  Param() = default;
  Param(Shape shape, std::vector<int> declared) : value(shape), grad(shape), dims(std::move(declared)) {}

  void zero_grad() { grad.zero(); }
};

template <typename T>
struct ParamRef {
  std::string name;
  Param<T>* param;
};

/// Non-trainable state that is still persisted (batch-norm running statistics).
template <typename T>
struct BufferRef {
  std::string name;
  Tensor<T>* tensor;
  std::vector<int> dims;
};

template <typename T>
void zero_grads(const std::vector<ParamRef<T>>& params) {
  for (const auto& p : params) p.param->zero_grad();
}

}  // namespace srdiag::nn
