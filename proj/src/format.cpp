#include "mmlink/format.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace mmlink {

namespace {

std::string printf_string(const char* fmt, int precision, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, precision, value);
  return buf;
}

}  // namespace

std::string format_general(double value, int digits) { return printf_string("%.*g", digits, value); }

std::string format_fixed(double value, int decimals) { return printf_string("%.*f", decimals, value); }

std::string format_uncertain(double value, double sigma) {
  if (!std::isfinite(value)) return format_general(value);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return format_general(value);

  // Scientific form for small or large magnitudes, anchored on the value.
  const double magnitude = std::abs(value) > 0.0 ? std::abs(value) : sigma;
  int exponent = static_cast<int>(std::floor(std::log10(magnitude)));
  if (exponent >= -2 && exponent < 4) exponent = 0;
  const double scale = std::pow(10.0, -exponent);
  const double v = value * scale;
  const double s = sigma * scale;

  int lead = static_cast<int>(std::floor(std::log10(s)));
  int digits = static_cast<int>(std::floor(s / std::pow(10.0, lead))) == 1 ? 2 : 1;
  int decimals = digits - 1 - lead;
  // Rounding can carry into a new leading digit (0.096 -> 0.10).
  if (std::round(s * std::pow(10.0, decimals)) >= std::pow(10.0, digits)) {
    ++lead;
    digits = 1;
    decimals = digits - 1 - lead;
  }

  std::string out;
  if (decimals >= 0) {
    const auto sig = static_cast<long long>(std::llround(s * std::pow(10.0, decimals)));
    out = format_fixed(v, decimals) + "(" + std::to_string(sig) + ")";
  } else {
    const double unit = std::pow(10.0, -decimals);
    out = format_fixed(std::round(v / unit) * unit, 0) + "(" + format_fixed(std::round(s / unit) * unit, 0) + ")";
  }
  if (exponent != 0) out += "e" + std::to_string(exponent);
  return out;
}

}  // namespace mmlink
