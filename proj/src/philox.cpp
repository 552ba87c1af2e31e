#include "amctl/philox.hpp"

#include <cmath>
#include <numbers>

namespace amctl {

namespace {

// 53-bit uniform in (0, 1].
double open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double philox_normal(std::uint64_t seed, std::uint64_t stream, std::uint32_t mode,
                     std::uint32_t step) {
  const Philox4x32::Counter ctr = {step, mode, static_cast<std::uint32_t>(stream),
                                   static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter out = Philox4x32::generate(ctr, key);
  const double u1 = open_unit(out[0], out[1]);
  const double u2 = open_unit(out[2], out[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace amctl
