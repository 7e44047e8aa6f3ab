#pragma once

#include <vector>

namespace protomol {

// Dense row-major f64 matrix. Everything in the model is rank 2: scalars are
// 1x1, vectors are 1xN rows, parameter stacks are RxC. requires_grad only
// matters when the tensor is bound to a tape as a leaf.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, 0.0) {}
  Tensor(int rows, int cols, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }

  double& at(int r, int c) { return data_[size_t(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[size_t(r) * cols_ + c]; }
  double& operator[](int i) { return data_[i]; }
  double operator[](int i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const;

  bool requires_grad() const { return requires_grad_; }
  Tensor& set_requires_grad(bool b) {
    requires_grad_ = b;
    return *this;
  }

  void fill(double v) { data_.assign(data_.size(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
  bool requires_grad_ = false;
};

}  // namespace protomol
