#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include <jpeglib.h>

#include "swcnn/error.hpp"
#include "swcnn/image.hpp"

namespace swcnn {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open image file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image from_bytes(int height, int width, int channels, const unsigned char* bytes) {
  std::vector<float> data(static_cast<std::size_t>(height) * width * channels);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(bytes[i]) / 255.0f;
  return Image(height, width, channels, std::move(data));
}

bool is_png(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

bool is_jpeg(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

Image decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw Error("cannot decode PNG '" + name + "': " + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&png);
    throw Error("unsupported bit depth in '" + name + "': only 8-bit PNG is supported");
  }
  const bool color = png.format & PNG_FORMAT_FLAG_COLOR;
  const bool alpha = png.format & PNG_FORMAT_FLAG_ALPHA;
  int channels = 1;
  if (alpha) {
    png.format = PNG_FORMAT_RGBA;
    channels = 4;
  } else if (color) {
    png.format = PNG_FORMAT_RGB;
    channels = 3;
  } else {
    png.format = PNG_FORMAT_GRAY;
  }
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    throw Error("cannot decode PNG '" + name + "': " + png.message);
  }
  return from_bytes(static_cast<int>(png.height), static_cast<int>(png.width), channels,
                    buffer.data());
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(const std::vector<unsigned char>& bytes, const std::string& name) {
  jpeg_decompress_struct info{};
  JpegErrorManager err{};
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  // Everything that needs cleanup after a longjmp lives outside this frame's
  // automatic objects with non-trivial destructors.
  std::vector<unsigned char> pixels;
  int height = 0;
  int width = 0;
  int channels = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw Error("cannot decode JPEG '" + name + "': " + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&info, TRUE);
  if (info.data_precision != 8) {
    jpeg_destroy_decompress(&info);
    throw Error("unsupported bit depth in '" + name + "': only 8-bit JPEG is supported");
  }
  info.out_color_space = info.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&info);
  height = static_cast<int>(info.output_height);
  width = static_cast<int>(info.output_width);
  channels = info.output_components;
  pixels.resize(static_cast<std::size_t>(height) * width * channels);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = &pixels[static_cast<std::size_t>(info.output_scanline) * width * channels];
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return from_bytes(height, width, channels, pixels.data());
}

}  // namespace

Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes, path.string());
  if (is_jpeg(bytes)) return decode_jpeg(bytes, path.string());
  throw Error("unsupported image format for '" + path.string() + "' (expected PNG or JPEG)");
}

std::vector<unsigned char> encode_png(const Image& img) {
  if (img.empty()) throw Error("cannot encode an empty image");
  std::vector<unsigned char> bytes(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const float v = px[i] > 0.0f ? (px[i] < 1.0f ? px[i] : 1.0f) : 0.0f;
    bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 4   ? PNG_FORMAT_RGBA
               : img.channels() == 3 ? PNG_FORMAT_RGB
                                     : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
    throw Error(std::string("cannot encode PNG: ") + png.message);
  }
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
    throw Error(std::string("cannot encode PNG: ") + png.message);
  }
  out.resize(size);
  return out;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace swcnn
