#include "tli/tensor_store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "tli/errors.hpp"

namespace tli {

namespace {

using Json = nlohmann::json;

constexpr std::size_t kHeaderLenBytes = 8;

std::uint64_t read_u64_le(std::span<const std::uint8_t> b) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (std::size_t i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void validate_shape(const Shape& shape, const std::string& name) {
  if (shape.empty() || shape.size() > 4) {
    throw HeaderError("tensor '" + name + "': rank must be 1..4");
  }
  for (auto d : shape) {
    if (d <= 0) throw HeaderError("tensor '" + name + "': dimensions must be positive");
  }
}

TensorMeta parse_meta(const std::string& name, const Json& j) {
  if (!j.is_object()) throw HeaderError("tensor '" + name + "': index entry must be an object");
  TensorMeta meta;
  meta.name = name;
  auto dtype = j.find("dtype");
  if (dtype == j.end() || !dtype->is_string()) {
    throw HeaderError("tensor '" + name + "': missing dtype");
  }
  meta.dtype = dtype->get<std::string>();
  if (meta.dtype != "f32") throw HeaderError("tensor '" + name + "': unsupported dtype '" + meta.dtype + "'");
  auto shape = j.find("shape");
  if (shape == j.end() || !shape->is_array()) throw HeaderError("tensor '" + name + "': missing shape");
  for (const auto& d : *shape) {
    if (!d.is_number_integer()) throw HeaderError("tensor '" + name + "': shape must hold integers");
    meta.shape.push_back(d.get<std::int64_t>());
  }
  validate_shape(meta.shape, name);
  for (const char* key : {"offset", "nbytes"}) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_unsigned()) {
      throw HeaderError("tensor '" + name + "': '" + key + "' must be a non-negative integer");
    }
  }
  meta.offset = j["offset"].get<std::uint64_t>();
  meta.nbytes = j["nbytes"].get<std::uint64_t>();
  if (meta.nbytes != 4 * static_cast<std::uint64_t>(element_count(meta.shape))) {
    throw HeaderError("tensor '" + name + "': nbytes does not equal 4 * element count");
  }
  return meta;
}

}  // namespace

TensorMap read_store(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderLenBytes) throw HeaderError("container shorter than its 8-byte header length");
  const std::uint64_t header_len = read_u64_le(bytes.first(kHeaderLenBytes));
  if (header_len > bytes.size() - kHeaderLenBytes) {
    throw HeaderError("header length " + std::to_string(header_len) + " exceeds file size");
  }
  auto header = bytes.subspan(kHeaderLenBytes, header_len);
  auto data = bytes.subspan(kHeaderLenBytes + header_len);

  Json index;
  try {
    index = Json::parse(header.begin(), header.end());
  } catch (const Json::parse_error& e) {
    throw HeaderError(std::string("index is not valid JSON: ") + e.what());
  }
  if (!index.is_object() || !index.contains("tensors") || !index["tensors"].is_object()) {
    throw HeaderError("index must be an object with a 'tensors' object");
  }

  TensorMap out;
  std::uint64_t expected_offset = 0;
  // nlohmann::json objects iterate in ascending key order, which is the index order.
  for (const auto& [name, entry] : index["tensors"].items()) {
    TensorMeta meta = parse_meta(name, entry);
    if (meta.offset > data.size() || meta.nbytes > data.size() - meta.offset) {
      throw BoundsError("tensor '" + name + "': region [" + std::to_string(meta.offset) + ", " +
                        std::to_string(meta.offset + meta.nbytes) + ") exceeds data section of " +
                        std::to_string(data.size()) + " bytes");
    }
    if (meta.offset != expected_offset) {
      throw HeaderError("tensor '" + name + "': regions must be contiguous in index order");
    }
    expected_offset += meta.nbytes;

    std::vector<float> values(meta.nbytes / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::size_t at = meta.offset + 4 * i;
      const std::uint32_t bits = static_cast<std::uint32_t>(data[at]) |
                                 static_cast<std::uint32_t>(data[at + 1]) << 8 |
                                 static_cast<std::uint32_t>(data[at + 2]) << 16 |
                                 static_cast<std::uint32_t>(data[at + 3]) << 24;
      values[i] = std::bit_cast<float>(bits);
      if (!std::isfinite(values[i])) {
        throw NonFiniteError("tensor '" + name + "': non-finite value at element " + std::to_string(i));
      }
    }
    out.emplace(name, Tensor(std::move(meta.shape), std::move(values)));
  }
  if (expected_offset != data.size()) {
    throw HeaderError("data section has " + std::to_string(data.size() - expected_offset) +
                      " trailing bytes not covered by the index");
  }
  return out;
}

std::vector<std::uint8_t> write_store(const TensorMap& tensors) {
  nlohmann::ordered_json index;
  index["tensors"] = nlohmann::ordered_json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    if (static_cast<std::int64_t>(t.data.size()) != element_count(t.shape)) {
      throw ShapeError("tensor '" + name + "': data length does not match shape");
    }
    if (t.shape.empty() || t.shape.size() > 4) throw ShapeError("tensor '" + name + "': rank must be 1..4");
    const std::uint64_t nbytes = 4 * static_cast<std::uint64_t>(t.data.size());
    index["tensors"][name] = {{"dtype", "f32"}, {"shape", t.shape}, {"offset", offset}, {"nbytes", nbytes}};
    offset += nbytes;
  }
  const std::string header = index.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderLenBytes + header.size() + offset);
  append_u64_le(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& [name, t] : tensors) {
    for (float v : t.data) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

TensorMap read_store_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HeaderError(path.string() + ": cannot open tensor file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return read_store(bytes);
  } catch (const HeaderError& e) {
    throw HeaderError(path.string() + ": " + e.what());
  } catch (const BoundsError& e) {
    throw BoundsError(path.string() + ": " + e.what());
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(path.string() + ": " + e.what());
  }
}

void write_store_file(const std::filesystem::path& path, const TensorMap& tensors) {
  const auto bytes = write_store(tensors);
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(path.string() + ": " + ec.message());
  }
}

}  // namespace tli
