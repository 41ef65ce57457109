#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "netdecomp/decompose.hpp"
#include "netdecomp/topology.hpp"
#include "netdecomp/workload.hpp"

namespace netdecomp {

struct DctcpParams {
  std::uint64_t mtu = kDefaultMtu;
  std::uint32_t ecn_threshold_k = 65;  // packets
  double gain_g = 1.0 / 16.0;
  // 0 selects one bandwidth-delay product of the flow's own path (rounded up
  // to whole packets, plus one packet).
  std::uint64_t init_window = 0;
  std::uint64_t min_window = 0;         // 0 selects one MTU
  std::uint64_t additive_increase = 0;  // bytes per RTT; 0 selects one MTU
  double init_alpha = 1.0;
  std::size_t max_pending = 20'000'000;  // events plus live packets
  // Source egresses serve their own flows one packet per turn, with transit
  // traffic as one more turn, instead of queueing whole windows FIFO.
  bool host_round_robin = true;

  void validate() const;
  std::uint64_t effective_min_window() const { return min_window ? min_window : mtu; }
  std::uint64_t effective_additive_increase() const { return additive_increase ? additive_increase : mtu; }
};

struct FctRecord {
  std::uint64_t flow_id = 0;
  std::uint64_t size = 0;
  Time fct = 0;
  Time ideal = 0;
  friend bool operator==(const FctRecord&, const FctRecord&) = default;
};

// Engine input: unidirectional egress links and flows with explicit routes.
// Each flow carries its own per-hop propagation delays.
struct SimFlow {
  std::uint64_t id = 0;
  std::uint64_t size = 0;
  Time start = 0;
  std::vector<std::uint32_t> links;
  std::vector<Time> delays;
};

struct SimNetwork {
  std::vector<double> link_bandwidth;
  std::vector<SimFlow> flows;
};

// Optional hooks for tests and tracing. Packet uids are assigned in creation
// order.
class SimObserver {
 public:
  virtual ~SimObserver() = default;
  virtual void on_enqueue(std::uint32_t /*link*/, std::uint64_t /*uid*/, std::size_t /*depth*/, bool /*marked*/,
                          Time /*t*/) {}
  virtual void on_tx_start(std::uint32_t /*link*/, std::uint64_t /*uid*/, Time /*t*/) {}
  virtual void on_tx_end(std::uint32_t /*link*/, std::uint64_t /*uid*/, Time /*t*/) {}
  virtual void on_deliver(std::uint64_t /*flow_id*/, std::uint32_t /*bytes*/, Time /*t*/) {}
  virtual void on_window(std::uint64_t /*flow_id*/, double /*cwnd*/, Time /*t*/) {}
};

struct SimStats {
  std::uint64_t events = 0;
  std::uint64_t packets = 0;
  std::uint64_t marks = 0;
  std::size_t max_queue = 0;
};

// Unloaded FCT of `flow` in `net` (store-and-forward convention).
Time ideal_time(const SimNetwork& net, const SimFlow& flow, std::uint64_t mtu);

// Records come back in the order of net.flows. Throws kSimDiverged when the
// pending-work cap is exceeded. The engine draws no random numbers; `seed` is
// accepted so callers can derive per-instance streams uniformly.
std::vector<FctRecord> run_dctcp(const SimNetwork& net, const DctcpParams& params, std::uint64_t seed,
                                 SimObserver* observer = nullptr, SimStats* stats = nullptr);

SimNetwork to_sim_network(const LinkSimSpec& spec);
SimNetwork to_sim_network(const Topology& topo, const RoutedWorkload& routed);

std::vector<FctRecord> simulate_link(const LinkSimSpec& spec, const DctcpParams& params, std::uint64_t seed);
std::vector<FctRecord> simulate_network(const Topology& topo, const std::vector<Flow>& flows,
                                        const DctcpParams& params, std::uint64_t seed);

Time ideal_fct_mini(const LinkSimSpec& spec, const MiniFlow& flow, std::uint64_t mtu = kDefaultMtu);

}  // namespace netdecomp
