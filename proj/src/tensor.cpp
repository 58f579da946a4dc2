#include "safetext/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "safetext/errors.hpp"

namespace safetext {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ConfigError("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data) {
  if (shape_product(shape) != data.size())
    throw ConfigError("tensor data length does not match shape " + shape_str(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

void Tensor::require_finite(const std::string& what) const {
  if (!all_finite()) throw NumericError("non-finite values in " + what);
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_product(shape) != size())
    throw ConfigError("reshape size mismatch: " + shape_str(shape_) + " -> " +
                      shape_str(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

}  // namespace safetext
