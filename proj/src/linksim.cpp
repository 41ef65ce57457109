#include "netdecomp/linksim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "netdecomp/error.hpp"
#include "netdecomp/unloaded.hpp"

namespace netdecomp {

void DctcpParams::validate() const {
  require(mtu >= 1, "dctcp: mtu must be >= 1");
  require(ecn_threshold_k >= 1, "dctcp: K must be >= 1");
  require(gain_g > 0 && gain_g <= 1, "dctcp: g must be in (0,1]");
  require(effective_min_window() >= mtu, "dctcp: min window must be >= mtu");
  require(init_alpha >= 0 && init_alpha <= 1, "dctcp: initial alpha must be in [0,1]");
  require(max_pending >= 1, "dctcp: max_pending must be >= 1");
}

Time ideal_time(const SimNetwork& net, const SimFlow& flow, std::uint64_t mtu) {
  const std::uint64_t packets = packets_for(flow.size, mtu);
  const std::uint64_t last = flow.size - (packets - 1) * mtu;
  std::vector<HopCost<Time>> hops;
  hops.reserve(flow.links.size());
  Time prop = 0;
  for (std::size_t h = 0; h < flow.links.size(); ++h) {
    const double bw = net.link_bandwidth[flow.links[h]];
    hops.push_back({tx_time(mtu, bw), tx_time(last, bw)});
    prop += flow.delays[h];
  }
  return prop + store_forward_latency<Time>(hops, packets);
}

namespace {

enum EventKind : std::uint32_t { kTxDone, kArrive, kAck };

struct Event {
  Time t;
  std::uint64_t seq;
  std::uint32_t kind;
  std::uint32_t a;
  std::uint64_t b;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return x.t != y.t ? x.t > y.t : x.seq > y.seq;
  }
};

struct Packet {
  std::uint64_t uid;
  std::uint32_t flow;
  std::uint32_t bytes;
  std::uint32_t hop;
  bool ce;
};

// Sources taking turns at an egress: local flows (index) or the transit FIFO.
constexpr std::uint32_t kTransit = UINT32_MAX;

struct LinkState {
  std::deque<std::uint32_t> fifo;   // waiting packets, excluding the one in service
  std::deque<std::uint32_t> ready;  // round-robin order of sources with work
  bool transit_ready = false;
  bool busy = false;
  std::uint32_t in_service = 0;
  std::uint32_t serving = kTransit;
  double bandwidth = 0;
  Time mtu_tx = 0;
};

struct FlowState {
  std::uint64_t snd_nxt = 0;
  std::uint64_t snd_una = 0;
  std::uint64_t delivered = 0;
  double cwnd = 0;
  double alpha = 0;
  std::uint64_t window_end = 0;
  std::uint64_t acked_in_window = 0;
  std::uint64_t marked_in_window = 0;
  Time next_decrease = 0;
  Time rtt = 0;
  Time ack_delay = 0;
  bool done = false;
  bool ready = false;  // queued for a turn at its source egress
};

class Engine {
 public:
  Engine(const SimNetwork& net, const DctcpParams& params, SimObserver* obs)
      : net_(net), params_(params), obs_(obs), links_(net.link_bandwidth.size()), flows_(net.flows.size()) {
    for (std::size_t i = 0; i < links_.size(); ++i) {
      require(net.link_bandwidth[i] > 0, "sim: link bandwidth must be positive");
      links_[i].bandwidth = net.link_bandwidth[i];
      links_[i].mtu_tx = tx_time(params.mtu, net.link_bandwidth[i]);
    }
    order_.resize(net.flows.size());
    for (std::uint32_t i = 0; i < order_.size(); ++i) {
      const SimFlow& f = net.flows[i];
      require(!f.links.empty() && f.links.size() == f.delays.size(), "sim: flow route malformed");
      require(f.size >= 1 && f.start >= 0, "sim: flow size/start invalid");
      for (auto l : f.links) require(l < links_.size(), "sim: flow references unknown link");
      order_[i] = i;
    }
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return net.flows[a].start < net.flows[b].start; });
    records_.resize(net.flows.size());
  }

  std::vector<FctRecord> run(SimStats* stats) {
    std::size_t next_start = 0;
    while (true) {
      const bool have_start = next_start < order_.size();
      if (!have_start && heap_.empty()) break;
      if (have_start && (heap_.empty() || net_.flows[order_[next_start]].start <= heap_.top().t)) {
        const std::uint32_t fi = order_[next_start++];
        start_flow(fi, net_.flows[fi].start);
        continue;
      }
      Event ev = heap_.top();
      heap_.pop();
      ++stats_.events;
      switch (ev.kind) {
        case kTxDone: tx_done(ev.a, ev.t); break;
        case kArrive: arrive(ev.a, ev.t); break;
        case kAck: ack(ev.a, static_cast<std::uint32_t>(ev.b), (ev.b >> 32) != 0, ev.t); break;
      }
    }
    for (std::size_t i = 0; i < flows_.size(); ++i)
      if (!flows_[i].done) fail(ErrorCode::kSimDiverged, "sim: flow did not complete");
    if (stats) *stats = stats_;
    return std::move(records_);
  }

 private:
  void schedule(Time t, EventKind kind, std::uint32_t a, std::uint64_t b = 0) {
    heap_.push({t, seq_++, kind, a, b});
    if (heap_.size() + live_packets_ > params_.max_pending)
      fail(ErrorCode::kSimDiverged, "sim: pending work exceeded cap (offered load at or above capacity?)");
  }

  void start_flow(std::uint32_t fi, Time t) {
    const SimFlow& f = net_.flows[fi];
    FlowState& st = flows_[fi];
    Time ser = 0;
    double min_bw = links_[f.links[0]].bandwidth;
    for (std::size_t h = 0; h < f.links.size(); ++h) {
      st.ack_delay += f.delays[h];
      ser += links_[f.links[h]].mtu_tx;
      min_bw = std::min(min_bw, links_[f.links[h]].bandwidth);
    }
    st.rtt = 2 * st.ack_delay + ser;
    if (params_.init_window) {
      st.cwnd = static_cast<double>(params_.init_window);
    } else {
      const double bdp_bytes = min_bw * time_to_seconds(st.rtt) / 8.0;
      const double mtu = static_cast<double>(params_.mtu);
      st.cwnd = (std::ceil(bdp_bytes / mtu) + 1.0) * mtu;
    }
    st.cwnd = std::max(st.cwnd, static_cast<double>(params_.effective_min_window()));
    st.alpha = params_.init_alpha;
    records_[fi] = {f.id, f.size, 0, ideal_time(net_, f, params_.mtu)};
    if (obs_) obs_->on_window(f.id, st.cwnd, t);
    try_send(fi, t);
    st.window_end = st.snd_nxt;
  }

  bool can_send(std::uint32_t fi) const {
    const SimFlow& f = net_.flows[fi];
    const FlowState& st = flows_[fi];
    if (st.snd_nxt >= f.size) return false;
    const std::uint64_t bytes = std::min<std::uint64_t>(params_.mtu, f.size - st.snd_nxt);
    const std::uint64_t inflight = st.snd_nxt - st.snd_una;
    return inflight == 0 || static_cast<double>(inflight + bytes) <= st.cwnd + 1e-9;
  }

  std::uint32_t make_packet(std::uint32_t fi) {
    const SimFlow& f = net_.flows[fi];
    FlowState& st = flows_[fi];
    const auto bytes = static_cast<std::uint32_t>(std::min<std::uint64_t>(params_.mtu, f.size - st.snd_nxt));
    st.snd_nxt += bytes;
    return alloc_packet({uid_++, fi, bytes, 0, false});
  }

  void try_send(std::uint32_t fi, Time t) {
    const std::uint32_t li = net_.flows[fi].links[0];
    if (params_.host_round_robin) {
      FlowState& st = flows_[fi];
      if (st.ready || !can_send(fi)) return;
      st.ready = true;
      links_[li].ready.push_back(fi);
      if (!links_[li].busy) begin_next(li, t);
      return;
    }
    while (can_send(fi)) enqueue(li, make_packet(fi), t);
  }

  std::uint32_t alloc_packet(const Packet& p) {
    ++live_packets_;
    ++stats_.packets;
    if (!free_.empty()) {
      auto idx = free_.back();
      free_.pop_back();
      packets_[idx] = p;
      return idx;
    }
    packets_.push_back(p);
    return static_cast<std::uint32_t>(packets_.size() - 1);
  }

  void release_packet(std::uint32_t pi) {
    --live_packets_;
    free_.push_back(pi);
  }

  void enqueue(std::uint32_t li, std::uint32_t pi, Time t) {
    LinkState& link = links_[li];
    Packet& p = packets_[pi];
    link.fifo.push_back(pi);
    const std::size_t depth = link.fifo.size() + (link.busy ? 1 : 0);
    stats_.max_queue = std::max(stats_.max_queue, depth);
    if (depth > params_.ecn_threshold_k) {
      p.ce = true;
      ++stats_.marks;
    }
    if (obs_) obs_->on_enqueue(li, p.uid, depth, p.ce, t);
    if (!link.transit_ready) {
      link.transit_ready = true;
      link.ready.push_back(kTransit);
    }
    if (!link.busy) begin_next(li, t);
  }

  void begin_next(std::uint32_t li, Time t) {
    LinkState& link = links_[li];
    while (!link.ready.empty()) {
      const std::uint32_t src = link.ready.front();
      link.ready.pop_front();
      std::uint32_t pi;
      if (src == kTransit) {
        link.transit_ready = false;
        pi = link.fifo.front();
        link.fifo.pop_front();
      } else {
        flows_[src].ready = false;
        if (!can_send(src)) continue;
        pi = make_packet(src);
        if (obs_) obs_->on_enqueue(li, packets_[pi].uid, 1, false, t);
      }
      const Packet& p = packets_[pi];
      link.busy = true;
      link.in_service = pi;
      link.serving = src;
      if (obs_) obs_->on_tx_start(li, p.uid, t);
      const Time tx = p.bytes == params_.mtu ? link.mtu_tx : tx_time(p.bytes, link.bandwidth);
      schedule(t + tx, kTxDone, li);
      return;
    }
  }

  void tx_done(std::uint32_t li, Time t) {
    LinkState& link = links_[li];
    const std::uint32_t pi = link.in_service;
    link.busy = false;
    Packet& p = packets_[pi];
    if (obs_) obs_->on_tx_end(li, p.uid, t);
    const SimFlow& f = net_.flows[p.flow];
    const Time prop = f.delays[p.hop];
    ++p.hop;
    schedule(t + prop, kArrive, pi);
    if (link.serving == kTransit) {
      if (!link.fifo.empty() && !link.transit_ready) {
        link.transit_ready = true;
        link.ready.push_back(kTransit);
      }
    } else if (!flows_[link.serving].ready && can_send(link.serving)) {
      flows_[link.serving].ready = true;
      link.ready.push_back(link.serving);
    }
    begin_next(li, t);
  }

  void arrive(std::uint32_t pi, Time t) {
    Packet& p = packets_[pi];
    const SimFlow& f = net_.flows[p.flow];
    if (p.hop < f.links.size()) {
      enqueue(f.links[p.hop], pi, t);
      return;
    }
    FlowState& st = flows_[p.flow];
    st.delivered += p.bytes;
    if (obs_) obs_->on_deliver(f.id, p.bytes, t);
    if (st.delivered == f.size) {
      st.done = true;
      records_[p.flow].fct = t - f.start;
    }
    const std::uint64_t ack_info = p.bytes | (static_cast<std::uint64_t>(p.ce) << 32);
    const std::uint32_t flow = p.flow;
    release_packet(pi);
    if (!st.done) schedule(t + st.ack_delay, kAck, flow, ack_info);
  }

  void ack(std::uint32_t fi, std::uint32_t bytes, bool ece, Time t) {
    const SimFlow& f = net_.flows[fi];
    FlowState& st = flows_[fi];
    if (st.done) return;
    st.snd_una += bytes;
    st.acked_in_window += bytes;
    if (ece) st.marked_in_window += bytes;
    if (st.snd_una >= st.window_end) {
      if (st.acked_in_window > 0) {
        const double frac = static_cast<double>(st.marked_in_window) / static_cast<double>(st.acked_in_window);
        st.alpha = (1.0 - params_.gain_g) * st.alpha + params_.gain_g * frac;
      }
      st.acked_in_window = 0;
      st.marked_in_window = 0;
      st.window_end = st.snd_nxt;
    }
    if (ece) {
      if (t >= st.next_decrease) {
        st.cwnd = std::max(static_cast<double>(params_.effective_min_window()), st.cwnd * (1.0 - st.alpha / 2.0));
        st.next_decrease = t + st.rtt;
        if (obs_) obs_->on_window(f.id, st.cwnd, t);
      }
    } else {
      st.cwnd += static_cast<double>(params_.effective_additive_increase()) * bytes / st.cwnd;
      if (obs_) obs_->on_window(f.id, st.cwnd, t);
    }
    try_send(fi, t);
  }

  const SimNetwork& net_;
  const DctcpParams& params_;
  SimObserver* obs_;
  std::vector<LinkState> links_;
  std::vector<FlowState> flows_;
  std::vector<std::uint32_t> order_;
  std::vector<FctRecord> records_;
  std::vector<Packet> packets_;
  std::vector<std::uint32_t> free_;
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t seq_ = 0;
  std::uint64_t uid_ = 0;
  std::size_t live_packets_ = 0;
  SimStats stats_;
};

}  // namespace

std::vector<FctRecord> run_dctcp(const SimNetwork& net, const DctcpParams& params, std::uint64_t /*seed*/,
                                 SimObserver* observer, SimStats* stats) {
  params.validate();
  Engine engine(net, params, observer);
  return engine.run(stats);
}

SimNetwork to_sim_network(const LinkSimSpec& spec) {
  SimNetwork net;
  for (const auto& l : spec.links) net.link_bandwidth.push_back(l.bandwidth_bps);
  net.flows.reserve(spec.flows.size());
  for (const auto& f : spec.flows) net.flows.push_back({f.flow_id, f.size, f.start, f.hops, f.hop_delays});
  return net;
}

SimNetwork to_sim_network(const Topology& topo, const RoutedWorkload& routed) {
  SimNetwork net;
  net.link_bandwidth.resize(topo.num_directed_links());
  std::vector<Time> delays(topo.num_directed_links());
  for (DirLinkId id = 0; id < net.link_bandwidth.size(); ++id) {
    net.link_bandwidth[id] = topo.bandwidth(id);
    delays[id] = topo.delay(id);
  }
  net.flows.reserve(routed.flows.size());
  for (std::size_t i = 0; i < routed.flows.size(); ++i) {
    const Flow& f = routed.flows[i];
    SimFlow sf{f.id, f.size, f.start, {}, {}};
    for (DirLinkId h : routed.paths[i].hops) {
      sf.links.push_back(h);
      sf.delays.push_back(delays[h]);
    }
    net.flows.push_back(std::move(sf));
  }
  return net;
}

std::vector<FctRecord> simulate_link(const LinkSimSpec& spec, const DctcpParams& params, std::uint64_t seed) {
  if (spec.trivial()) return {};
  return run_dctcp(to_sim_network(spec), params, seed);
}

std::vector<FctRecord> simulate_network(const Topology& topo, const std::vector<Flow>& flows,
                                        const DctcpParams& params, std::uint64_t seed) {
  if (flows.empty()) return {};
  const auto routed = route_flows(topo, flows);
  return run_dctcp(to_sim_network(topo, routed), params, seed);
}

Time ideal_fct_mini(const LinkSimSpec& spec, const MiniFlow& flow, std::uint64_t mtu) {
  SimNetwork net;
  for (const auto& l : spec.links) net.link_bandwidth.push_back(l.bandwidth_bps);
  return ideal_time(net, {flow.flow_id, flow.size, flow.start, flow.hops, flow.hop_delays}, mtu);
}

}  // namespace netdecomp
