#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace safetext {

// Dense row-major n-d array of f64. Plain value type: copy copies the buffer.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape);

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> data);
  static Tensor scalar(double v) { return from({1}, {v}); }

  std::size_t size() const { return data_.size(); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) {
    assert(rank() == 2 && i < shape_[0] && j < shape_[1]);
    return data_[i * shape_[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    return const_cast<Tensor*>(this)->at(i, j);
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    assert(rank() == 3 && i < shape_[0] && j < shape_[1] && k < shape_[2]);
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return const_cast<Tensor*>(this)->at(i, j, k);
  }

  void fill(double v);
  bool all_finite() const;
  // Throws NumericError naming `what` if any entry is NaN/Inf.
  void require_finite(const std::string& what) const;

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  // Reinterpret the buffer under a new shape of identical total size.
  Tensor reshaped(std::vector<std::size_t> shape) const;

  bool requires_grad = false;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_str(const std::vector<std::size_t>& shape);

}  // namespace safetext
