#include "protomol/tensor.hpp"

#include <cmath>
#include <utility>

#include "protomol/errors.hpp"

namespace protomol {

Tensor::Tensor(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != size_t(rows) * size_t(cols)) {
    throw ShapeMismatch("tensor data length does not match shape");
  }
}

Tensor Tensor::scalar(double v) { return Tensor(1, 1, {v}); }

Tensor Tensor::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(1, n, std::move(values));
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace protomol
