#pragma once
// Output helpers shared by the exporters: shortest round-trip number
// formatting and 16-bit binary PGM.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <system_error>

namespace qrw2d {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, res.ptr);
}

enum class Scale { Linear, Log };

inline Scale parse_scale(const std::string& s) {
  if (s == "linear") return Scale::Linear;
  if (s == "log") return Scale::Log;
  throw std::invalid_argument("unknown scale '" + s + "' (expected linear|log)");
}

inline constexpr double kLogFloor = 1e-16;

/// Maps non-negative values to 16-bit grey levels.
/// Linear: 65535 * v / v_max. Log: 65535 * (log10 v - log10 v_min) / (log10 v_max - log10 v_min)
/// with v_min floored at 1e-16; values below the floor map to 0.
inline std::uint16_t grey_level(double v, double v_min, double v_max, Scale scale) {
  double u = 0.0;
  if (scale == Scale::Linear) {
    u = v_max > 0.0 ? v / v_max : 0.0;
  } else {
    const double lo = std::log10(std::max(v_min, kLogFloor));
    const double hi = std::log10(std::max(v_max, kLogFloor));
    if (v < kLogFloor || hi <= lo) {
      u = (v >= kLogFloor && hi <= lo) ? 1.0 : 0.0;
    } else {
      u = (std::log10(v) - lo) / (hi - lo);
    }
  }
  u = std::clamp(u, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(65535.0 * u));
}

/// Binary P5 with maxval 65535 (big-endian samples). `pixels` is row-major,
/// top row first.
inline void write_pgm16(std::ostream& os, int width, int height,
                        std::span<const std::uint16_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw std::invalid_argument("write_pgm16: pixel count does not match dimensions");
  os << "P5\n" << width << ' ' << height << "\n65535\n";
  for (std::uint16_t p : pixels) {
    const char bytes[2] = {static_cast<char>(p >> 8), static_cast<char>(p & 0xff)};
    os.write(bytes, 2);
  }
}

}  // namespace qrw2d
