#include "fraudlens/color.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "fraudlens/errors.hpp"

namespace fraudlens {

namespace {

constexpr std::array<Rgb, 5> kStops{{
    {0, 0, 255},
    {0, 255, 255},
    {0, 255, 0},
    {255, 255, 0},
    {255, 0, 0},
}};

void check(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw ContractViolation("severity " + std::to_string(s) + " outside [0, 1]");
  }
}

std::uint8_t lerp(std::uint8_t a, std::uint8_t b, double t) {
  return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * t));
}

}  // namespace

int gradient_stop_index(double s) {
  check(s);
  return std::min(3, static_cast<int>(std::floor(s * 4.0)));
}

Rgb severity_color(double s) {
  const int i = gradient_stop_index(s);
  const double t = s * 4.0 - i;
  const Rgb& a = kStops[static_cast<std::size_t>(i)];
  const Rgb& b = kStops[static_cast<std::size_t>(i) + 1];
  return {lerp(a.r, b.r, t), lerp(a.g, b.g, t), lerp(a.b, b.b, t)};
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
  return buf;
}

}  // namespace fraudlens
