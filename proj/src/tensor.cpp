#include "dscnet/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace dscnet {

std::size_t shape_volume(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : storage_(std::make_shared<Storage>()) {
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
  }
  storage_->values.assign(shape_volume(shape), fill);
  storage_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : storage_(std::make_shared<Storage>()) {
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
  }
  if (shape_volume(shape) != values.size()) {
    throw ShapeError("shape " + shape_string(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  storage_->shape = std::move(shape);
  storage_->values = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{1}, std::vector<double>{value}); }

const Tensor::Storage& Tensor::storage() const {
  if (!storage_) throw std::logic_error("use of an undefined tensor");
  return *storage_;
}

Tensor::Storage& Tensor::storage() {
  if (!storage_) throw std::logic_error("use of an undefined tensor");
  return *storage_;
}

const Shape& Tensor::shape() const { return storage().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const { return storage().values.size(); }

std::span<double> Tensor::data() { return storage().values; }
std::span<const double> Tensor::data() const { return storage().values; }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_string(shape()));
  return storage().values[0];
}

double& Tensor::at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
  const Shape& s = storage().shape;
  return storage().values[((b * s[1] + c) * s[2] + y) * s[3] + x];
}

double Tensor::at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
  const Shape& s = storage().shape;
  return storage().values[((b * s[1] + c) * s[2] + y) * s[3] + x];
}

bool Tensor::has_grad() const { return storage_ && storage_->has_grad; }

std::span<double> Tensor::grad() const {
  if (!has_grad()) throw std::logic_error("tensor has no gradient");
  return storage_->grad;
}

std::span<double> Tensor::ensure_grad() const {
  if (!storage_) throw std::logic_error("use of an undefined tensor");
  Storage& s = *storage_;
  if (!s.has_grad) {
    s.grad.assign(s.values.size(), 0.0);
    s.has_grad = true;
  }
  return s.grad;
}

void Tensor::zero_grad() {
  Storage& s = storage();
  s.grad.assign(s.values.size(), 0.0);
  s.has_grad = true;
}

void Tensor::drop_grad() {
  Storage& s = storage();
  s.grad.clear();
  s.grad.shrink_to_fit();
  s.has_grad = false;
}

bool Tensor::requires_grad() const { return storage_ && storage_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  storage().requires_grad = on;
  return *this;
}

Tensor Tensor::clone() const {
  return Tensor(shape(), std::vector<double>(data().begin(), data().end()));
}

void require_rank4(const Tensor& t, const char* what) {
  if (t.rank() != 4) {
    throw ShapeError(std::string(what) + ": expected a 4-D tensor, got " + shape_string(t.shape()));
  }
}

}  // namespace dscnet
