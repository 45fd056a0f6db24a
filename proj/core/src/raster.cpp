#include <png.h>

#include <cstring>
#include <memory>

#include "iconometer/error.hpp"
#include "iconometer/synthetic.hpp"

namespace iconometer {
namespace {

struct PngImageGuard {
  png_image* image;
  ~PngImageGuard() { png_image_free(image); }
};

}  // namespace

RasterImage::RasterImage(int w, int h)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0) {
  if (w <= 0 || h <= 0) throw ContractViolation("raster dimensions must be positive");
}

RasterImage::RasterImage(int w, int h, std::vector<std::uint8_t> pixels)
    : width(w), height(h), rgb(std::move(pixels)) {
  if (w <= 0 || h <= 0) throw ContractViolation("raster dimensions must be positive");
  if (rgb.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3) {
    throw ContractViolation("raster pixel buffer does not match dimensions");
  }
}

RasterImage read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  PngImageGuard guard{&image};
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw std::runtime_error("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RasterImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RasterImage& raster) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = PNG_FORMAT_RGB;
  PngImageGuard guard{&image};
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, raster.rgb.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG " + path.string() + ": " + image.message);
  }
}

}  // namespace iconometer
