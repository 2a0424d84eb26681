#pragma once

// Phase two of a transfer: reshape teacher tensors into student shapes.

#include <cstdint>
#include <span>
#include <vector>

#include "tli/tensor.hpp"

namespace tli {

struct InjectionConfig {
  /// Blend strength between center crop (lambda) and resize (1 - lambda).
  double lambda = 0.75;
  double temperature = 1.0;
  std::size_t k = 1;

  /// Throws ConfigError on lambda outside [0,1], temperature <= 0 or k == 0.
  void validate() const;
};

struct CropResult {
  Tensor tensor;
  /// 1 where the value was copied from the source, 0 where it is zero padding.
  std::vector<std::uint8_t> overlap;
};

/// Centered window when shrinking (start floor((n-m)/2)), centered placement with zero
/// fill when growing (offset floor((m-n)/2)). Throws RankMismatchError.
CropResult center_crop(const Tensor& src, const Shape& target);

/// Multilinear interpolation with endpoint alignment: target index j maps to source
/// coordinate j*(n-1)/(m-1), or (n-1)/2 when m == 1. Same-shape resize is the identity.
Tensor resize(const Tensor& src, const Shape& target);

/// lambda*crop + (1-lambda)*resize on the crop overlap, pure resize elsewhere.
/// Returns src unchanged when the shapes already agree.
Tensor combo_injection(const Tensor& src, const Shape& target, double lambda);

struct WeightedCandidate {
  Tensor tensor;
  double score = 0.0;
};

struct MixResult {
  Tensor tensor;
  std::vector<double> weights;
};

/// Softmax over score/temperature, then the weighted sum of candidate tensors.
/// Throws ShapeMismatchError when candidate shapes differ, ConfigError when empty.
MixResult softmax_mix(std::span<const WeightedCandidate> candidates, double temperature);

std::vector<double> softmax(std::span<const double> scores, double temperature);

/// Pads the lower-rank shape with leading 1s so both have equal rank.
Shape align_rank(const Shape& shape, std::size_t rank);

}  // namespace tli
