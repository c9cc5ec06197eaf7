#include "srdiag/nn/tensor.hpp"

#include "srdiag/error.hpp"

namespace srdiag::nn {

std::string to_string(const Shape& s) {
  return "[" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, const std::vector<T>& values) : shape_(shape), data_(values.begin(), values.end()) {
  if (data_.size() != shape_.count()) {
    throw InvalidArgument("Tensor: " + std::to_string(data_.size()) + " values for shape " +
                          to_string(shape_));
  }
}

template <typename T>
void Tensor<T>::reshape_to(Shape shape) {
  if (shape == shape_) return;
  shape_ = shape;
  data_.resize(shape.count());
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace srdiag::nn
