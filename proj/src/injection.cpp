#include "tli/injection.hpp"

#include <algorithm>
#include <cmath>

#include "tli/errors.hpp"

namespace tli {

void InjectionConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("temperature must be positive");
  if (k < 1) throw ConfigError("top-k must be at least 1");
}

namespace {

void require_same_rank(const Shape& src, const Shape& target) {
  if (src.size() != target.size()) {
    throw RankMismatchError("cannot map shape " + shape_to_string(src) + " onto " + shape_to_string(target));
  }
  for (auto d : target) {
    if (d < 1) throw ShapeError("target shape " + shape_to_string(target) + " has a non-positive dimension");
  }
}

// Advances a row-major multi-index; returns false after the last position.
bool next_index(std::vector<std::int64_t>& idx, const Shape& shape) {
  for (std::size_t d = shape.size(); d-- > 0;) {
    if (++idx[d] < shape[d]) return true;
    idx[d] = 0;
  }
  return false;
}

}  // namespace

CropResult center_crop(const Tensor& src, const Shape& target) {
  require_same_rank(src.shape, target);
  const std::size_t rank = target.size();

  // Signed shift per dimension: source index = target index + shift.
  std::vector<std::int64_t> shift(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    const std::int64_t n = src.shape[d];
    const std::int64_t m = target[d];
    shift[d] = m <= n ? (n - m) / 2 : -((m - n) / 2);
  }

  CropResult out{Tensor(target), std::vector<std::uint8_t>(static_cast<std::size_t>(element_count(target)), 0)};
  const auto src_strides = strides_of(src.shape);
  std::vector<std::int64_t> idx(rank, 0);
  std::size_t flat = 0;
  do {
    std::int64_t src_flat = 0;
    bool inside = true;
    for (std::size_t d = 0; d < rank && inside; ++d) {
      const std::int64_t s = idx[d] + shift[d];
      inside = s >= 0 && s < src.shape[d];
      src_flat += s * src_strides[d];
    }
    if (inside) {
      out.tensor.data[flat] = src.data[static_cast<std::size_t>(src_flat)];
      out.overlap[flat] = 1;
    }
    ++flat;
  } while (next_index(idx, target));
  return out;
}

Tensor resize(const Tensor& src, const Shape& target) {
  require_same_rank(src.shape, target);
  if (src.shape == target) return src;

  Shape shape = src.shape;
  std::vector<double> buf(src.data.begin(), src.data.end());

  // Separable passes, one per dimension whose extent changes.
  for (std::size_t d = 0; d < target.size(); ++d) {
    const std::int64_t n = shape[d];
    const std::int64_t m = target[d];
    if (n == m) continue;

    std::int64_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < d; ++i) outer *= shape[i];
    for (std::size_t i = d + 1; i < shape.size(); ++i) inner *= shape[i];

    std::vector<double> next(static_cast<std::size_t>(outer * m * inner));
    for (std::int64_t j = 0; j < m; ++j) {
      const double coord = m > 1 ? static_cast<double>(j * (n - 1)) / static_cast<double>(m - 1)
                                 : static_cast<double>(n - 1) / 2.0;
      auto lo = static_cast<std::int64_t>(std::floor(coord));
      double frac = coord - static_cast<double>(lo);
      if (lo >= n - 1) {
        lo = n - 1;
        frac = 0.0;
      }
      for (std::int64_t o = 0; o < outer; ++o) {
        const double* row = buf.data() + o * n * inner;
        double* dst = next.data() + (o * m + j) * inner;
        for (std::int64_t i = 0; i < inner; ++i) {
          const double a = row[lo * inner + i];
          if (frac == 0.0) {
            dst[i] = a;
            continue;
          }
          const double b = row[(lo + 1) * inner + i];
          dst[i] = std::clamp((1.0 - frac) * a + frac * b, std::min(a, b), std::max(a, b));
        }
      }
    }
    buf = std::move(next);
    shape[d] = m;
  }

  Tensor out(target);
  std::transform(buf.begin(), buf.end(), out.data.begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

Tensor combo_injection(const Tensor& src, const Shape& target, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  require_same_rank(src.shape, target);
  if (src.shape == target) return src;

  const CropResult crop = center_crop(src, target);
  Tensor out = resize(src, target);
  if (lambda == 0.0) return out;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!crop.overlap[i]) continue;
    if (lambda == 1.0) {
      out.data[i] = crop.tensor.data[i];
    } else {
      out.data[i] = static_cast<float>(lambda * static_cast<double>(crop.tensor.data[i]) +
                                       (1.0 - lambda) * static_cast<double>(out.data[i]));
    }
  }
  return out;
}

std::vector<double> softmax(std::span<const double> scores, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (scores.empty()) return {};
  const double peak = *std::max_element(scores.begin(), scores.end()) / temperature;
  std::vector<double> weights(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(scores[i] / temperature - peak);
    sum += weights[i];
  }
  for (double& w : weights) w /= sum;
  return weights;
}

MixResult softmax_mix(std::span<const WeightedCandidate> candidates, double temperature) {
  if (candidates.empty()) throw ConfigError("softmax_mix needs at least one candidate");
  const Shape& shape = candidates.front().tensor.shape;
  for (const auto& c : candidates) {
    if (c.tensor.shape != shape) {
      throw ShapeMismatchError("candidate shapes differ: " + shape_to_string(shape) + " vs " +
                               shape_to_string(c.tensor.shape));
    }
  }
  std::vector<double> scores;
  for (const auto& c : candidates) scores.push_back(c.score);
  MixResult out{Tensor{}, softmax(scores, temperature)};
  if (candidates.size() == 1) {
    out.tensor = candidates.front().tensor;
    return out;
  }

  std::vector<double> acc(candidates.front().tensor.data.size(), 0.0);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto& data = candidates[c].tensor.data;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += out.weights[c] * static_cast<double>(data[i]);
  }
  out.tensor = Tensor(shape);
  std::transform(acc.begin(), acc.end(), out.tensor.data.begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

Shape align_rank(const Shape& shape, std::size_t rank) {
  if (shape.size() >= rank) return shape;
  Shape out(rank - shape.size(), 1);
  out.insert(out.end(), shape.begin(), shape.end());
  return out;
}

}  // namespace tli
