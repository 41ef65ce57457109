#include "netdecomp/decompose.hpp"

#include <algorithm>
#include <unordered_map>

#include "json.hpp"
#include "netdecomp/error.hpp"

namespace netdecomp {

RoutedWorkload route_flows(const Topology& topo, std::vector<Flow> flows) {
  RoutedWorkload out;
  out.paths.reserve(flows.size());
  for (const auto& f : flows) out.paths.push_back(topo.ecmp_route(f.src, f.dst, f.id));
  out.flows = std::move(flows);
  return out;
}

std::vector<LinkWorkload> assign_flows(const Topology& topo, const RoutedWorkload& routed) {
  std::vector<LinkWorkload> out(topo.num_directed_links());
  for (DirLinkId id = 0; id < out.size(); ++id) out[id].dlink = topo.directed(id);
  for (std::uint32_t i = 0; i < routed.paths.size(); ++i)
    for (DirLinkId id : routed.paths[i].hops) out[id].flows.push_back(i);
  return out;
}

AckCorrection ack_corrected_bandwidth(double link_bandwidth, const std::vector<std::uint64_t>& reverse_sizes,
                                      double duration_s, std::uint64_t mtu, std::uint64_t ack_size) {
  require(duration_s > 0, "ack correction: duration must be positive");
  double ack_bits = 0;
  for (auto s : reverse_sizes) ack_bits += static_cast<double>(packets_for(s, mtu) * ack_size * 8);
  AckCorrection out{link_bandwidth - ack_bits / duration_s, false};
  if (out.bandwidth_bps < 0.5 * link_bandwidth) {
    out.bandwidth_bps = 0.5 * link_bandwidth;
    out.clamped = true;
  }
  return out;
}

const char* link_case_name(LinkCase c) {
  switch (c) {
    case LinkCase::kFirstHop: return "first_hop";
    case LinkCase::kInternal: return "internal";
    case LinkCase::kLastHop: return "last_hop";
  }
  return "?";
}

LinkSimSpec build_link_sim(const Topology& topo, DirLinkId dlink, const RoutedWorkload& routed,
                           const LinkWorkload& workload, const LinkWorkload& reverse, double duration_s,
                           const DecomposeOptions& opts) {
  LinkSimSpec spec;
  spec.target_id = dlink;
  spec.dlink = topo.directed(dlink);
  spec.target_bandwidth = topo.bandwidth(dlink);

  std::vector<std::uint64_t> reverse_sizes;
  reverse_sizes.reserve(reverse.flows.size());
  for (auto i : reverse.flows) reverse_sizes.push_back(routed.flows[i].size);
  const auto corrected = ack_corrected_bandwidth(spec.target_bandwidth, reverse_sizes, duration_s, opts.mtu,
                                                 opts.ack_size);
  spec.effective_target_bandwidth = corrected.bandwidth_bps;
  spec.ack_clamped = corrected.clamped;
  spec.links.push_back({0, 1, spec.effective_target_bandwidth, false});

  const double inflated_bw = opts.inflation_factor * topo.max_bandwidth();
  const Time target_delay = topo.delay(dlink);
  std::unordered_map<NodeId, std::uint32_t> src_link, dst_link;  // host -> mini link
  bool all_first = true, all_last = true;

  for (auto idx : workload.flows) {
    const Flow& f = routed.flows[idx];
    const Path& path = routed.paths[idx];
    auto pos = static_cast<std::size_t>(std::find(path.hops.begin(), path.hops.end(), dlink) - path.hops.begin());
    require(pos < path.size(), "build_link_sim: flow does not traverse the target link");
    Time total_delay = 0;
    for (DirLinkId h : path.hops) total_delay += topo.delay(h);
    const bool first = pos == 0;
    const bool last = pos + 1 == path.size();
    all_first = all_first && first;
    all_last = all_last && last;

    MiniFlow mf;
    mf.flow_id = f.id;
    mf.size = f.size;
    mf.start = f.start;
    mf.orig_src = f.src;
    mf.orig_dst = f.dst;
    if (first) {
      mf.src = 0;
      mf.hops.push_back(0);
      mf.hop_delays.push_back(total_delay);
    } else {
      auto [it, inserted] = src_link.try_emplace(f.src, static_cast<std::uint32_t>(spec.links.size()));
      if (inserted) spec.links.push_back({spec.num_nodes++, 0, topo.bandwidth(path.hops.front()), false});
      mf.src = spec.links[it->second].from;
      mf.hops.push_back(it->second);
      mf.hop_delays.push_back(total_delay - target_delay);
      mf.hops.push_back(0);
      mf.hop_delays.push_back(target_delay);
    }
    if (last) {
      mf.dst = 1;
    } else {
      auto [it, inserted] = dst_link.try_emplace(f.dst, static_cast<std::uint32_t>(spec.links.size()));
      if (inserted) spec.links.push_back({1, spec.num_nodes++, inflated_bw, true});
      mf.dst = spec.links[it->second].to;
      mf.hops.push_back(it->second);
      mf.hop_delays.push_back(0);
    }
    spec.flows.push_back(std::move(mf));
  }

  if (spec.flows.empty()) {
    all_first = topo.kind(spec.dlink.src) == NodeKind::kHost;
    all_last = !all_first && topo.kind(spec.dlink.dst) == NodeKind::kHost;
  }
  spec.link_case = all_first ? LinkCase::kFirstHop : all_last ? LinkCase::kLastHop : LinkCase::kInternal;
  return spec;
}

std::string LinkSimSpec::to_json() const {
  nlohmann::json j;
  j["target"] = {{"id", target_id}, {"src", dlink.src}, {"dst", dlink.dst}};
  j["case"] = link_case_name(link_case);
  j["num_nodes"] = num_nodes;
  j["target_bandwidth_bps"] = target_bandwidth;
  j["effective_target_bandwidth_bps"] = effective_target_bandwidth;
  j["ack_clamped"] = ack_clamped;
  auto& jl = j["links"] = nlohmann::json::array();
  for (const auto& l : links)
    jl.push_back({{"from", l.from}, {"to", l.to}, {"bandwidth_bps", l.bandwidth_bps}, {"inflated", l.inflated}});
  auto& jf = j["flows"] = nlohmann::json::array();
  for (const auto& f : flows) {
    std::vector<double> delays_ns;
    for (Time d : f.hop_delays) delays_ns.push_back(time_to_nanos(d));
    jf.push_back({{"id", f.flow_id}, {"size", f.size}, {"start_s", time_to_seconds(f.start)},
                  {"src", f.src}, {"dst", f.dst}, {"hops", f.hops}, {"hop_delays_ns", delays_ns}});
  }
  return j.dump();
}

}  // namespace netdecomp
