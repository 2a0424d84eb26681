#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tli {

using Shape = std::vector<std::int64_t>;

/// Number of elements described by `shape`; 1 for an empty shape.
std::int64_t element_count(const Shape& shape);

std::string shape_to_string(const Shape& shape);

/// Dense row-major f32 tensor.
struct Tensor {
  Shape shape;
  std::vector<float> data;

  Tensor() = default;
  Tensor(Shape s, std::vector<float> d);
  /// Zero-filled tensor of the given shape.
  explicit Tensor(Shape s);

  std::int64_t rank() const { return static_cast<std::int64_t>(shape.size()); }
  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Bitwise comparison of values (distinguishes -0.0 from 0.0), plus shape equality.
bool bitwise_equal(const Tensor& a, const Tensor& b);

/// Row-major strides for `shape`.
std::vector<std::int64_t> strides_of(const Shape& shape);

}  // namespace tli
