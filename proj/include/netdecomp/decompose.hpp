#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netdecomp/topology.hpp"
#include "netdecomp/workload.hpp"

namespace netdecomp {

inline constexpr std::uint64_t kAckSize = 64;
inline constexpr double kInflationFactor = 10.0;

// Flows with the ECMP route each one takes.
struct RoutedWorkload {
  std::vector<Flow> flows;
  std::vector<Path> paths;
};

RoutedWorkload route_flows(const Topology& topo, std::vector<Flow> flows);

struct LinkWorkload {
  DirectedLink dlink;
  std::vector<std::uint32_t> flows;  // indices into RoutedWorkload, arrival order
};

// One entry per directed link, indexed by DirLinkId.
std::vector<LinkWorkload> assign_flows(const Topology& topo, const RoutedWorkload& routed);

struct AckCorrection {
  double bandwidth_bps = 0.0;
  bool clamped = false;
};

// Forward bandwidth minus the average ACK volume of the reverse-direction
// flows (one ACK_SIZE ack per data packet), floored at half the link rate.
AckCorrection ack_corrected_bandwidth(double link_bandwidth, const std::vector<std::uint64_t>& reverse_sizes,
                                      double duration_s, std::uint64_t mtu = kDefaultMtu,
                                      std::uint64_t ack_size = kAckSize);

enum class LinkCase { kFirstHop, kInternal, kLastHop };
const char* link_case_name(LinkCase c);

struct MiniLink {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  double bandwidth_bps = 0.0;
  bool inflated = false;
};

struct MiniFlow {
  std::uint64_t flow_id = 0;
  std::uint64_t size = 0;
  Time start = 0;
  NodeId orig_src = 0;
  NodeId orig_dst = 0;
  std::uint32_t src = 0;  // mini node ids
  std::uint32_t dst = 0;
  std::vector<std::uint32_t> hops;   // mini link indices
  std::vector<Time> hop_delays;      // per-hop propagation for this flow
};

// Self-contained simulation input for one directed link. Node 0 and 1 are the
// target link's input and output switches; mini link 0 is the target.
struct LinkSimSpec {
  DirLinkId target_id = 0;
  DirectedLink dlink;
  LinkCase link_case = LinkCase::kInternal;
  std::uint32_t num_nodes = 2;
  std::vector<MiniLink> links;
  std::vector<MiniFlow> flows;
  double target_bandwidth = 0.0;  // original
  double effective_target_bandwidth = 0.0;
  bool ack_clamped = false;

  bool trivial() const { return flows.empty(); }
  std::string to_json() const;
};

struct DecomposeOptions {
  std::uint64_t mtu = kDefaultMtu;
  std::uint64_t ack_size = kAckSize;
  double inflation_factor = kInflationFactor;
};

LinkSimSpec build_link_sim(const Topology& topo, DirLinkId dlink, const RoutedWorkload& routed,
                           const LinkWorkload& workload, const LinkWorkload& reverse, double duration_s,
                           const DecomposeOptions& opts = {});

}  // namespace netdecomp
