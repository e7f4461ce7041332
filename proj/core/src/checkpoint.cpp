#include "swcnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "swcnn/error.hpp"

namespace swcnn {

namespace {

constexpr unsigned char kMagic[4] = {'S', 'W', 'C', 'K'};
constexpr std::uint8_t kDtypeF32 = 0;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  std::vector<unsigned char>& buffer() { return out_; }

 private:
  std::vector<unsigned char> out_;
};

class Reader {
 public:
  Reader(std::span<const unsigned char> bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  void need(std::size_t n, const std::string& what) const {
    if (pos_ + n > bytes_.size()) throw Error(source_ + ": truncated while reading " + what);
  }
  std::uint8_t u8(const std::string& what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint16_t u16(const std::string& what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::span<const unsigned char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const unsigned char> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::size_t NamedTensor::numel() const noexcept {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::string format_dims(std::span<const std::uint32_t> dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

std::vector<unsigned char> encode_checkpoint(std::span<const NamedTensor> tensors) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 0xFFFF) throw Error("tensor name too long: " + t.name.substr(0, 64));
    if (t.dims.size() > 0xFF) throw Error("tensor '" + t.name + "' has too many dimensions");
    if (t.numel() != t.values.size()) {
      throw Error("tensor '" + t.name + "': " + std::to_string(t.values.size()) +
                  " values do not fill shape " + format_dims(t.dims));
    }
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(kDtypeF32);
    w.u8(static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) w.u32(d);
    for (float v : t.values) w.f32(v);
  }
  const std::uint32_t crc = crc_of(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

std::vector<NamedTensor> decode_checkpoint(std::span<const unsigned char> bytes,
                                           const std::vector<TensorShape>* expected,
                                           const std::string& source) {
  Reader r(bytes, source);
  const std::string magic = r.str(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw Error(source + ": not an SWCK checkpoint");
  const std::uint32_t version = r.u32("format version");
  if (version != kCheckpointVersion) {
    throw Error(source + ": unsupported checkpoint version " + std::to_string(version) +
                " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint32_t count = r.u32("tensor count");
  if (expected && count != expected->size()) {
    throw Error(source + ": checkpoint holds " + std::to_string(count) + " tensors, expected " +
                std::to_string(expected->size()));
  }
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::uint16_t name_len = r.u16("name length of tensor #" + std::to_string(i));
    t.name = r.str(name_len, "name of tensor #" + std::to_string(i));
    const std::string label = "tensor '" + t.name + "'";
    const std::uint8_t dtype = r.u8("dtype of " + label);
    if (dtype != kDtypeF32) {
      throw Error(source + ": " + label + " has unsupported dtype tag " + std::to_string(dtype));
    }
    const std::uint8_t rank = r.u8("rank of " + label);
    t.dims.resize(rank);
    for (auto& d : t.dims) d = r.u32("dims of " + label);
    if (expected) {
      const auto& want = (*expected)[i];
      if (want.name != t.name) {
        throw Error(source + ": " + label + " found where '" + want.name + "' was expected");
      }
      if (want.dims != t.dims) {
        throw Error(source + ": " + label + " has shape " + format_dims(t.dims) +
                    ", expected " + format_dims(want.dims));
      }
    }
    const std::size_t n = t.numel();
    r.need(n * 4, "data of " + label);
    t.values.resize(n);
    for (auto& v : t.values) v = std::bit_cast<float>(r.u32("data of " + label));
    tensors.push_back(std::move(t));
  }
  const std::size_t payload = r.pos();
  const std::uint32_t stored = r.u32("trailing CRC32");
  if (r.remaining() != 0) throw Error(source + ": unexpected bytes after the CRC32");
  if (stored != crc_of(bytes.first(payload))) throw Error(source + ": CRC32 mismatch (corrupt file)");
  return tensors;
}

void write_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  const auto bytes = encode_checkpoint(tensors);
  // path is either the old file or the complete new one, never a partial write.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing checkpoint '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move checkpoint into place at '" + path.string() + "': " + ec.message());
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path,
                                         const std::vector<TensorShape>* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes, expected, path.string());
}

}  // namespace swcnn
