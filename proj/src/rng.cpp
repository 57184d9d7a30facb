#include "lfp/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lfp {

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0,1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t sround(double x, double u) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument("sround: argument must be a finite nonnegative number");
  }
  const double whole = std::floor(x);
  const auto base = static_cast<std::int64_t>(whole);
  return u < x - whole ? base + 1 : base;
}

}  // namespace lfp
