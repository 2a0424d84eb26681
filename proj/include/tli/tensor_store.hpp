#pragma once

// `.tlitensors` container: 8-byte little-endian header length, UTF-8 JSON index,
// then a data section of little-endian f32 values. Offsets are relative to the data
// section; canonical files store tensors in ascending name order with no gaps.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tli/tensor.hpp"

namespace tli {

using TensorMap = std::map<std::string, Tensor>;

struct TensorMeta {
  std::string name;
  std::string dtype = "f32";
  Shape shape;
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;
};

/// Parses a container. Throws HeaderError, BoundsError or NonFiniteError.
TensorMap read_store(std::span<const std::uint8_t> bytes);
/// Canonical encoding; a pure function of `tensors`.
std::vector<std::uint8_t> write_store(const TensorMap& tensors);

TensorMap read_store_file(const std::filesystem::path& path);
/// Writes through a temporary sibling file and renames it into place, so a failed
/// write never leaves a partial file at `path`.
void write_store_file(const std::filesystem::path& path, const TensorMap& tensors);

}  // namespace tli
