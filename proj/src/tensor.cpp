#include "bandit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bandit/errors.hpp"

namespace bandit {

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (auto d : shape)
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  values_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  validate_shape(shape_);
  if (values_.size() != element_count(shape_))
    throw ShapeError("tensor of shape " + to_string(shape_) + " needs " +
                     std::to_string(element_count(shape_)) + " values, got " +
                     std::to_string(values_.size()));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (values_.size() != 1)
    throw ShapeError("item() requires a scalar, got shape " + to_string(shape_));
  return values_[0];
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t cols = values_.size() / shape_.at(0);
  return {values_.data() + r * cols, cols};
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t cols = values_.size() / shape_.at(0);
  return {values_.data() + r * cols, cols};
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void Tensor::axpy(double scale, const Tensor& other) {
  require_same_shape(*this, other, "axpy");
  const double* src = other.data();
  double* dst = values_.data();
  for (std::size_t i = 0, n = values_.size(); i < n; ++i) dst[i] += scale * src[i];
}

void Tensor::scale(double factor) {
  for (auto& v : values_) v *= factor;
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

bool Tensor::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

}  // namespace bandit
