#pragma once

#include <cmath>
#include <cstdint>

namespace netdecomp {

using NodeId = std::uint32_t;

// Simulation time in integer picoseconds.
using Time = std::int64_t;

inline constexpr Time kPicosPerSecond = 1'000'000'000'000;
inline constexpr Time kPicosPerNano = 1'000;

inline Time seconds_to_time(double s) { return static_cast<Time>(std::llround(s * 1e12)); }
inline double time_to_seconds(Time t) { return static_cast<double>(t) * 1e-12; }
inline double time_to_nanos(Time t) { return static_cast<double>(t) * 1e-3; }

// Serialization time of `bytes` on a link of `bandwidth_bps`, rounded to the
// nearest picosecond.
inline Time tx_time(std::uint64_t bytes, double bandwidth_bps) {
  return static_cast<Time>(std::llround(static_cast<double>(bytes) * 8e12 / bandwidth_bps));
}

inline std::uint64_t packets_for(std::uint64_t size, std::uint64_t mtu) {
  return (size + mtu - 1) / mtu;
}

}  // namespace netdecomp
