#include "realsim/imaging.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "realsim/errors.hpp"

namespace realsim {

ImageRGB8::ImageRGB8(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(3) * w * h, fill) {}

MaskGray8::MaskGray8(int w, int h, std::uint8_t fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

namespace {

struct Header {
  int width = 0;
  int height = 0;
  std::size_t payload_offset = 0;
};

// "<magic> <w> <h> <maxval>" separated by whitespace (and '#' comments running
// to end of line), then exactly one whitespace byte before the raster.
Header parse_header(std::string_view bytes, char binary_digit, char ascii_digit) {
  using K = NetpbmError::Kind;
  if (bytes.size() < 2 || bytes[0] != 'P') throw NetpbmError(K::BadMagic, "netpbm: bad magic number");
  if (bytes[1] == ascii_digit) throw NetpbmError(K::AsciiVariant, "unsupported: ASCII variant");
  if (bytes[1] != binary_digit) throw NetpbmError(K::BadMagic, std::string("netpbm: expected P") + binary_digit);

  std::size_t pos = 2;
  auto read_int = [&](const char* what) {
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      throw NetpbmError(K::BadHeader, std::string("netpbm: missing separator before ") + what);
    }
    while (pos < bytes.size() && (std::isspace(static_cast<unsigned char>(bytes[pos])) || bytes[pos] == '#')) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        ++pos;
      }
    }
    long value = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000) throw NetpbmError(K::BadHeader, std::string("netpbm: ") + what + " too large");
      ++pos;
      ++digits;
    }
    if (digits == 0 || value == 0) throw NetpbmError(K::BadHeader, std::string("netpbm: invalid ") + what);
    return static_cast<int>(value);
  };
  Header h;
  h.width = read_int("width");
  h.height = read_int("height");
  const int maxval = read_int("maxval");
  if (maxval != 255)
    throw NetpbmError(K::UnsupportedMaxval, "netpbm: maxval must be 255, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw NetpbmError(K::Truncated, "netpbm: truncated header");
  }
  h.payload_offset = pos + 1;
  return h;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void check_dims(const ImageRGB8& sim, const MaskGray8& mask, const ImageRGB8& real) {
  if (sim.width != real.width || sim.height != real.height || mask.width != sim.width || mask.height != sim.height) {
    throw ValidationError("composite: image and mask dimensions differ");
  }
  if (sim.pixels.size() != static_cast<std::size_t>(3) * sim.width * sim.height ||
      real.pixels.size() != sim.pixels.size() ||
      mask.values.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw ValidationError("composite: buffer size does not match dimensions");
  }
}

// Integer form of round-half-away-from-zero for non-negative numerators.
inline std::uint8_t blend(std::uint8_t m, std::uint8_t s, std::uint8_t r) {
  const unsigned num = static_cast<unsigned>(m) * s + static_cast<unsigned>(255 - m) * r;
  return static_cast<std::uint8_t>((2 * num + 255) / 510);
}

inline void composite_row(const ImageRGB8& sim, const MaskGray8& mask, const ImageRGB8& real, CompositeMode mode,
                          ImageRGB8& out, int y) {
  const std::size_t w = static_cast<std::size_t>(sim.width);
  for (std::size_t x = 0; x < w; ++x) {
    const std::uint8_t m = mask.values[y * w + x];
    const std::size_t base = 3 * (y * w + x);
    for (std::size_t c = 0; c < 3; ++c) {
      const std::uint8_t s = sim.pixels[base + c];
      const std::uint8_t r = real.pixels[base + c];
      out.pixels[base + c] = mode == CompositeMode::Hard ? (m >= 128 ? s : r) : blend(m, s, r);
    }
  }
}

}  // namespace

ImageRGB8 decode_ppm(std::string_view bytes) {
  const Header h = parse_header(bytes, '6', '3');
  const std::size_t need = static_cast<std::size_t>(3) * h.width * h.height;
  if (bytes.size() - h.payload_offset < need)
    throw NetpbmError(NetpbmError::Kind::Truncated, "netpbm: truncated payload");
  ImageRGB8 img(h.width, h.height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset), need, img.pixels.begin());
  return img;
}

MaskGray8 decode_pgm(std::string_view bytes) {
  const Header h = parse_header(bytes, '5', '2');
  const std::size_t need = static_cast<std::size_t>(h.width) * h.height;
  if (bytes.size() - h.payload_offset < need)
    throw NetpbmError(NetpbmError::Kind::Truncated, "netpbm: truncated payload");
  MaskGray8 mask(h.width, h.height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset), need, mask.values.begin());
  return mask;
}

std::string encode_ppm(const ImageRGB8& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

std::string encode_pgm(const MaskGray8& mask) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
  out.append(mask.values.begin(), mask.values.end());
  return out;
}

ImageRGB8 read_ppm(const std::filesystem::path& path) { return decode_ppm(slurp(path)); }
MaskGray8 read_pgm(const std::filesystem::path& path) { return decode_pgm(slurp(path)); }
void write_ppm(const std::filesystem::path& path, const ImageRGB8& img) { dump(path, encode_ppm(img)); }
void write_pgm(const std::filesystem::path& path, const MaskGray8& mask) { dump(path, encode_pgm(mask)); }

ImageRGB8 composite(const ImageRGB8& sim, const MaskGray8& mask, const ImageRGB8& real, CompositeMode mode) {
  check_dims(sim, mask, real);
  ImageRGB8 out(sim.width, sim.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < sim.height; ++y) composite_row(sim, mask, real, mode, out, y);
  return out;
}

ImageRGB8 composite_serial(const ImageRGB8& sim, const MaskGray8& mask, const ImageRGB8& real, CompositeMode mode) {
  check_dims(sim, mask, real);
  ImageRGB8 out(sim.width, sim.height);
  for (int y = 0; y < sim.height; ++y) composite_row(sim, mask, real, mode, out, y);
  return out;
}

}  // namespace realsim
