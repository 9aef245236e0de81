#pragma once

#include <cstdint>
#include <string>

namespace fraudlens {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kGray{160, 160, 160};

// Blue -> cyan -> green -> yellow -> red over [0, 1]. Throws
// ContractViolation outside the range (NaN included).
Rgb severity_color(double s);

// Index of the gradient segment holding s: 0 for [0, .25), ..., 3 for
// [.75, 1], so it is non-decreasing in s.
int gradient_stop_index(double s);

std::string to_hex(Rgb c);  // "#RRGGBB"

}  // namespace fraudlens
