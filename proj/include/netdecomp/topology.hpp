#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netdecomp/types.hpp"

namespace netdecomp {

inline constexpr std::uint64_t kDefaultMtu = 1000;

enum class NodeKind { kHost, kTor, kFabric, kSpine };

const char* node_kind_name(NodeKind kind);
NodeKind parse_node_kind(const std::string& name);

struct Link {
  NodeId a = 0;
  NodeId b = 0;
  double bandwidth_bps = 0.0;
  double delay_s = 0.0;
};

struct DirectedLink {
  NodeId src = 0;
  NodeId dst = 0;
  friend auto operator<=>(const DirectedLink&, const DirectedLink&) = default;
};

// Dense directed-link index: link i yields 2i (a->b) and 2i+1 (b->a).
using DirLinkId = std::uint32_t;

struct ClosParams {
  std::uint32_t pods = 1;
  std::uint32_t racks_per_pod = 1;
  std::uint32_t hosts_per_rack = 1;
  std::uint32_t fabric_per_pod = 1;
  std::uint32_t spines_per_plane = 1;
  double host_link_bw = 10e9;
  double fabric_link_bw = 40e9;
  double host_link_delay = 1e-6;
  double fabric_link_delay = 1e-6;

  void validate() const;
  // Host-facing ToR capacity over spine-facing fabric capacity, worst tier.
  double oversubscription() const;
};

struct Path {
  NodeId src_host = 0;
  NodeId dst_host = 0;
  std::vector<DirLinkId> hops;

  std::size_t size() const { return hops.size(); }
};

// Immutable network graph. Copies share state, so passing by value is cheap
// and concurrent reads need no synchronization.
class Topology {
 public:
  Topology(std::vector<NodeKind> kinds, std::vector<Link> links);

  static Topology build_clos(const ClosParams& params);
  static Topology from_json(const std::string& text);
  static Topology load(const std::string& path);
  std::string to_json() const;

  std::size_t num_nodes() const;
  NodeKind kind(NodeId n) const;
  const std::vector<Link>& links() const;
  std::size_t num_directed_links() const { return 2 * links().size(); }

  DirectedLink directed(DirLinkId id) const;
  std::optional<DirLinkId> find(NodeId src, NodeId dst) const;
  // Throws kLinkNotFound.
  DirLinkId directed_id(NodeId src, NodeId dst) const;
  DirLinkId reverse(DirLinkId id) const { return id ^ 1U; }
  double bandwidth(DirLinkId id) const;
  double delay_s(DirLinkId id) const;
  Time delay(DirLinkId id) const;
  double max_bandwidth() const;

  const std::vector<NodeId>& hosts() const;
  // Hosts grouped by the ToR they attach to, ToRs in id order. Hosts with no
  // ToR neighbour each form a rack of their own, appended after.
  const std::vector<std::vector<NodeId>>& racks() const;
  std::size_t rack_of(NodeId host) const;

  // Equal-cost next hops from `at` toward host `dst`, ascending node id.
  std::vector<NodeId> next_hops(NodeId at, NodeId dst) const;
  bool reachable(NodeId src, NodeId dst) const;

  // Shortest path; each fan-out picks mix(flow_id, src, dst, node) modulo
  // the number of equal-cost choices.
  Path ecmp_route(NodeId src_host, NodeId dst_host, std::uint64_t flow_id) const;

  Topology fail_link(NodeId a, NodeId b) const;

  // Unloaded FCT in seconds: propagation plus store-and-forward of the flow's
  // packets along the path.
  double ideal_fct(const Path& path, std::uint64_t size, std::uint64_t mtu = kDefaultMtu) const;
  // Same convention on the integer picosecond clock the simulator uses.
  Time ideal_fct_time(const Path& path, std::uint64_t size, std::uint64_t mtu = kDefaultMtu) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

}  // namespace netdecomp
