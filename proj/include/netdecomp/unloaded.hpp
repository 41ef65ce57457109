#pragma once

#include <algorithm>
#include <cstdint>
#include <span>

namespace netdecomp {

// Per-hop serialization cost of a full MTU packet and of the flow's final
// (possibly partial) packet.
template <typename T>
struct HopCost {
  T full{};
  T last{};
};

// Finish time of the final packet through a chain of store-and-forward
// queues, all initially empty, when `packets` packets are released at t = 0
// (propagation excluded; add it separately). This is the longest monotone
// path through the packet x hop grid: the first n-1 packets are MTU sized and
// pipeline at the slowest hop seen so far, the final packet then completes
// the remaining hops.
template <typename T>
T store_forward_latency(std::span<const HopCost<T>> hops, std::uint64_t packets) {
  if (hops.empty() || packets == 0) return T{};
  if (packets == 1) {
    T sum{};
    for (const auto& h : hops) sum += h.last;
    return sum;
  }
  T suffix_last{};
  for (const auto& h : hops) suffix_last += h.last;
  const auto repeats = static_cast<T>(packets - 2);
  T prefix_full{};
  T slowest{};
  T best{};
  bool first = true;
  for (const auto& h : hops) {
    prefix_full += h.full;
    slowest = std::max(slowest, h.full);
    T candidate = prefix_full + repeats * slowest + suffix_last;
    if (first || candidate > best) best = candidate;
    first = false;
    suffix_last -= h.last;
  }
  return best;
}

}  // namespace netdecomp
