#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

// "SWCK" tensor container, little-endian:
//   magic "SWCK" | version u32 | tensor count u32
//   per tensor: name length u16 | UTF-8 name | dtype u8 (0 = f32) | rank u8 |
//               dims u32 x rank | row-major f32 data
//   CRC32 (zlib polynomial) of every preceding byte
namespace swcnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t numel() const noexcept;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

struct TensorShape {
  std::string name;
  std::vector<std::uint32_t> dims;
};

std::vector<unsigned char> encode_checkpoint(std::span<const NamedTensor> tensors);

// When `expected` is given, the tensor count, names (in order) and shapes
// must match it; the first mismatch is reported by tensor name.
std::vector<NamedTensor> decode_checkpoint(std::span<const unsigned char> bytes,
                                           const std::vector<TensorShape>* expected = nullptr,
                                           const std::string& source = "checkpoint");

void write_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path,
                                         const std::vector<TensorShape>* expected = nullptr);

std::string format_dims(std::span<const std::uint32_t> dims);

}  // namespace swcnn
