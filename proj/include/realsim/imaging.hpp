#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "realsim/errors.hpp"

namespace realsim {

/// Row-major interleaved 8-bit RGB.
struct ImageRGB8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  ImageRGB8() = default;
  ImageRGB8(int w, int h, std::uint8_t fill = 0);
  bool operator==(const ImageRGB8&) const = default;
};

/// Row-major 8-bit single channel.
struct MaskGray8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;  // width * height

  MaskGray8() = default;
  MaskGray8(int w, int h, std::uint8_t fill = 0);
  bool operator==(const MaskGray8&) const = default;
};

/// Netpbm decoding failures, one type per failure mode.
class NetpbmError : public InputError {
 public:
  enum class Kind { BadMagic, AsciiVariant, BadHeader, UnsupportedMaxval, Truncated };
  NetpbmError(Kind kind, const std::string& what) : InputError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Binary P6 / P5 with maxval 255. Writers emit the canonical header
// "P6\n<w> <h>\n255\n" so that write(read(x)) == x for canonical files.
ImageRGB8 decode_ppm(std::string_view bytes);
MaskGray8 decode_pgm(std::string_view bytes);
std::string encode_ppm(const ImageRGB8& img);
std::string encode_pgm(const MaskGray8& mask);

ImageRGB8 read_ppm(const std::filesystem::path& path);
MaskGray8 read_pgm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const ImageRGB8& img);
void write_pgm(const std::filesystem::path& path, const MaskGray8& mask);

enum class CompositeMode {
  Hard,  // mask >= 128 selects sim, else real
  Soft,  // round((m * sim + (255 - m) * real) / 255), half away from zero
};

/// out = M * sim + (1 - M) * real, rows processed in parallel (OpenMP).
ImageRGB8 composite(const ImageRGB8& sim, const MaskGray8& mask, const ImageRGB8& real, CompositeMode mode);

/// Single-threaded reference of composite(); outputs are byte-identical.
ImageRGB8 composite_serial(const ImageRGB8& sim, const MaskGray8& mask, const ImageRGB8& real, CompositeMode mode);

}  // namespace realsim
