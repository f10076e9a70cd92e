#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dscnet {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t shape_volume(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles with an optional gradient slot.
///
/// Tensor is a handle: copies share storage, so a parameter referenced from
/// two places accumulates into one gradient buffer. Use clone() for a deep
/// copy. 4-D feature maps use (batch, channel, height, width) order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  bool defined() const { return static_cast<bool>(storage_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<double> data();
  std::span<const double> data() const;
  double item() const;

  // Access into a 4-D tensor.
  double& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x);
  double at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const;

  bool has_grad() const;
  // The gradient slot belongs to the shared storage, so const handles can
  // still accumulate into it.
  std::span<double> grad() const;
  /// Allocates a zero gradient if absent and returns it.
  std::span<double> ensure_grad() const;
  void zero_grad();
  void drop_grad();

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);

  Tensor clone() const;
  bool shares_storage_with(const Tensor& other) const {
    return storage_ == other.storage_;
  }

 private:
  struct Storage {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool has_grad = false;
    bool requires_grad = false;
  };
  const Storage& storage() const;
  Storage& storage();

  std::shared_ptr<Storage> storage_;
};

void require_rank4(const Tensor& t, const char* what);

}  // namespace dscnet
