#include "netdecomp/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "netdecomp/error.hpp"
#include "netdecomp/rng.hpp"
#include "netdecomp/unloaded.hpp"

namespace netdecomp {

namespace {

constexpr std::uint16_t kUnreachable = std::numeric_limits<std::uint16_t>::max();

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kHost: return "host";
    case NodeKind::kTor: return "tor";
    case NodeKind::kFabric: return "fabric";
    case NodeKind::kSpine: return "spine";
  }
  return "?";
}

NodeKind parse_node_kind(const std::string& name) {
  if (name == "host") return NodeKind::kHost;
  if (name == "tor") return NodeKind::kTor;
  if (name == "fabric") return NodeKind::kFabric;
  if (name == "spine") return NodeKind::kSpine;
  fail(ErrorCode::kParse, "unknown node kind '" + name + "'");
}

void ClosParams::validate() const {
  require(pods >= 1 && racks_per_pod >= 1 && hosts_per_rack >= 1 && fabric_per_pod >= 1 &&
              spines_per_plane >= 1,
          "clos: all counts must be >= 1");
  require(host_link_bw > 0 && fabric_link_bw > 0, "clos: bandwidths must be positive");
  require(host_link_delay >= 0 && fabric_link_delay >= 0, "clos: delays must be >= 0");
}

double ClosParams::oversubscription() const {
  const double tor = hosts_per_rack * host_link_bw / (fabric_per_pod * fabric_link_bw);
  double worst = tor;
  if (pods > 1) {
    const double fabric = racks_per_pod * fabric_link_bw / (spines_per_plane * fabric_link_bw);
    worst = std::max(worst, fabric);
  }
  return worst;
}

struct Topology::State {
  std::vector<NodeKind> kinds;
  std::vector<Link> links;
  std::vector<std::vector<std::pair<NodeId, DirLinkId>>> adjacency;  // (neighbour, out link)
  std::unordered_map<std::uint64_t, std::uint32_t> link_index;
  std::vector<NodeId> hosts;
  std::vector<std::int32_t> host_index;  // node -> index in hosts, or -1
  std::vector<std::vector<NodeId>> racks;
  std::vector<std::size_t> rack_of;      // by host index
  std::vector<std::uint16_t> dist;       // [host index][node] hop distance to that host
  double max_bw = 0.0;

  std::uint16_t distance(NodeId node, NodeId dst_host) const {
    return dist[static_cast<std::size_t>(host_index[dst_host]) * kinds.size() + node];
  }
};

Topology::Topology(std::vector<NodeKind> kinds, std::vector<Link> links) {
  auto st = std::make_shared<State>();
  const std::size_t n = kinds.size();
  st->adjacency.resize(n);
  for (std::uint32_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    require(l.a < n && l.b < n, "link endpoint out of range");
    require(l.a != l.b, "self-loop link");
    require(l.bandwidth_bps > 0, "link bandwidth must be positive");
    require(l.delay_s >= 0, "link delay must be >= 0");
    require(st->link_index.emplace(pair_key(l.a, l.b), i).second, "duplicate link between nodes");
    st->adjacency[l.a].emplace_back(l.b, 2 * i);
    st->adjacency[l.b].emplace_back(l.a, 2 * i + 1);
    st->max_bw = std::max(st->max_bw, l.bandwidth_bps);
  }
  for (auto& adj : st->adjacency) std::sort(adj.begin(), adj.end());

  st->host_index.assign(n, -1);
  for (NodeId v = 0; v < n; ++v) {
    if (kinds[v] == NodeKind::kHost) {
      st->host_index[v] = static_cast<std::int32_t>(st->hosts.size());
      st->hosts.push_back(v);
    }
  }

  st->rack_of.assign(st->hosts.size(), 0);
  std::vector<bool> placed(st->hosts.size(), false);
  for (NodeId v = 0; v < n; ++v) {
    if (kinds[v] != NodeKind::kTor) continue;
    std::vector<NodeId> members;
    for (auto [nb, _] : st->adjacency[v]) {
      auto hi = st->host_index[nb];
      if (hi >= 0 && !placed[hi]) {
        placed[hi] = true;
        members.push_back(nb);
      }
    }
    if (members.empty()) continue;
    for (NodeId h : members) st->rack_of[st->host_index[h]] = st->racks.size();
    st->racks.push_back(std::move(members));
  }
  for (std::size_t hi = 0; hi < st->hosts.size(); ++hi) {
    if (placed[hi]) continue;
    st->rack_of[hi] = st->racks.size();
    st->racks.push_back({st->hosts[hi]});
  }

  // BFS from every host over the whole graph.
  st->dist.assign(st->hosts.size() * n, kUnreachable);
  std::deque<NodeId> frontier;
  for (std::size_t hi = 0; hi < st->hosts.size(); ++hi) {
    std::uint16_t* d = st->dist.data() + hi * n;
    d[st->hosts[hi]] = 0;
    frontier.assign(1, st->hosts[hi]);
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop_front();
      for (auto [nb, _] : st->adjacency[u]) {
        if (d[nb] == kUnreachable) {
          d[nb] = static_cast<std::uint16_t>(d[u] + 1);
          frontier.push_back(nb);
        }
      }
    }
  }

  st->kinds = std::move(kinds);
  st->links = std::move(links);
  state_ = std::move(st);
}

Topology Topology::build_clos(const ClosParams& p) {
  p.validate();
  const std::uint32_t racks = p.pods * p.racks_per_pod;
  const std::uint32_t hosts = racks * p.hosts_per_rack;
  // A single rack needs no fabric; a single pod needs no spines.
  const bool with_fabric = racks > 1;
  const bool with_spines = with_fabric && p.pods > 1;
  const std::uint32_t fabrics = with_fabric ? p.pods * p.fabric_per_pod : 0;
  const std::uint32_t spines = with_spines ? p.fabric_per_pod * p.spines_per_plane : 0;

  std::vector<NodeKind> kinds;
  kinds.insert(kinds.end(), hosts, NodeKind::kHost);
  kinds.insert(kinds.end(), racks, NodeKind::kTor);
  kinds.insert(kinds.end(), fabrics, NodeKind::kFabric);
  kinds.insert(kinds.end(), spines, NodeKind::kSpine);
  const NodeId tor0 = hosts;
  const NodeId fabric0 = tor0 + racks;
  const NodeId spine0 = fabric0 + fabrics;

  std::vector<Link> links;
  for (std::uint32_t r = 0; r < racks; ++r)
    for (std::uint32_t h = 0; h < p.hosts_per_rack; ++h)
      links.push_back({r * p.hosts_per_rack + h, tor0 + r, p.host_link_bw, p.host_link_delay});
  if (with_fabric) {
    for (std::uint32_t pod = 0; pod < p.pods; ++pod)
      for (std::uint32_t r = 0; r < p.racks_per_pod; ++r)
        for (std::uint32_t k = 0; k < p.fabric_per_pod; ++k)
          links.push_back({tor0 + pod * p.racks_per_pod + r, fabric0 + pod * p.fabric_per_pod + k,
                           p.fabric_link_bw, p.fabric_link_delay});
  }
  if (with_spines) {
    // Fabric switch k of every pod connects to the spines of plane k.
    for (std::uint32_t pod = 0; pod < p.pods; ++pod)
      for (std::uint32_t k = 0; k < p.fabric_per_pod; ++k)
        for (std::uint32_t s = 0; s < p.spines_per_plane; ++s)
          links.push_back({fabric0 + pod * p.fabric_per_pod + k, spine0 + k * p.spines_per_plane + s,
                           p.fabric_link_bw, p.fabric_link_delay});
  }
  return Topology(std::move(kinds), std::move(links));
}

Topology Topology::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("topology json: ") + e.what());
  }
  try {
    const auto& nodes = j.at("nodes");
    std::vector<NodeKind> kinds(nodes.size(), NodeKind::kHost);
    std::vector<bool> seen(nodes.size(), false);
    for (const auto& nd : nodes) {
      auto id = nd.at("id").get<std::size_t>();
      if (id >= nodes.size() || seen[id]) fail(ErrorCode::kParse, "node ids must be dense and unique");
      seen[id] = true;
      kinds[id] = parse_node_kind(nd.at("kind").get<std::string>());
    }
    std::vector<Link> links;
    for (const auto& l : j.at("links")) {
      links.push_back({l.at("a").get<NodeId>(), l.at("b").get<NodeId>(),
                       l.at("bandwidth_bps").get<double>(), l.at("delay_s").get<double>()});
    }
    return Topology(std::move(kinds), std::move(links));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("topology json: ") + e.what());
  }
}

Topology Topology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open topology file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string Topology::to_json() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (NodeId v = 0; v < num_nodes(); ++v)
    j["nodes"].push_back({{"id", v}, {"kind", node_kind_name(kind(v))}});
  j["links"] = nlohmann::json::array();
  for (const auto& l : links())
    j["links"].push_back({{"a", l.a}, {"b", l.b}, {"bandwidth_bps", l.bandwidth_bps}, {"delay_s", l.delay_s}});
  return j.dump();
}

std::size_t Topology::num_nodes() const { return state_->kinds.size(); }
NodeKind Topology::kind(NodeId n) const { return state_->kinds.at(n); }
const std::vector<Link>& Topology::links() const { return state_->links; }

DirectedLink Topology::directed(DirLinkId id) const {
  const Link& l = state_->links.at(id / 2);
  return (id & 1U) ? DirectedLink{l.b, l.a} : DirectedLink{l.a, l.b};
}

std::optional<DirLinkId> Topology::find(NodeId src, NodeId dst) const {
  auto it = state_->link_index.find(pair_key(src, dst));
  if (it == state_->link_index.end()) return std::nullopt;
  const Link& l = state_->links[it->second];
  return 2 * it->second + (l.a == src ? 0U : 1U);
}

DirLinkId Topology::directed_id(NodeId src, NodeId dst) const {
  auto id = find(src, dst);
  if (!id) fail(ErrorCode::kLinkNotFound, "no link " + std::to_string(src) + "->" + std::to_string(dst));
  return *id;
}

double Topology::bandwidth(DirLinkId id) const { return state_->links.at(id / 2).bandwidth_bps; }
double Topology::delay_s(DirLinkId id) const { return state_->links.at(id / 2).delay_s; }
Time Topology::delay(DirLinkId id) const { return seconds_to_time(delay_s(id)); }
double Topology::max_bandwidth() const { return state_->max_bw; }

const std::vector<NodeId>& Topology::hosts() const { return state_->hosts; }
const std::vector<std::vector<NodeId>>& Topology::racks() const { return state_->racks; }

std::size_t Topology::rack_of(NodeId host) const {
  require(host < num_nodes() && state_->host_index[host] >= 0, "rack_of: not a host");
  return state_->rack_of[state_->host_index[host]];
}

std::vector<NodeId> Topology::next_hops(NodeId at, NodeId dst) const {
  require(dst < num_nodes() && state_->host_index[dst] >= 0, "next_hops: destination is not a host");
  std::vector<NodeId> out;
  const auto here = state_->distance(at, dst);
  if (here == kUnreachable || here == 0) return out;
  for (auto [nb, _] : state_->adjacency[at])
    if (state_->distance(nb, dst) + 1 == here) out.push_back(nb);
  return out;
}

bool Topology::reachable(NodeId src, NodeId dst) const {
  return state_->distance(src, dst) != kUnreachable;
}

Path Topology::ecmp_route(NodeId src, NodeId dst, std::uint64_t flow_id) const {
  require(src < num_nodes() && dst < num_nodes(), "route endpoint out of range");
  require(kind(src) == NodeKind::kHost && kind(dst) == NodeKind::kHost, "route endpoints must be hosts");
  if (src == dst) fail(ErrorCode::kSameEndpoint, "route source equals destination " + std::to_string(src));
  if (!reachable(src, dst))
    fail(ErrorCode::kNoRoute, "no route " + std::to_string(src) + "->" + std::to_string(dst));

  Path path{src, dst, {}};
  const std::uint64_t flow_key = mix_seed(mix_seed(flow_id, src), dst);
  NodeId at = src;
  std::vector<NodeId> choices;
  while (at != dst) {
    choices = next_hops(at, dst);
    NodeId next = choices.size() == 1 ? choices[0] : choices[mix_seed(flow_key, at) % choices.size()];
    path.hops.push_back(*find(at, next));
    at = next;
  }
  return path;
}

Topology Topology::fail_link(NodeId a, NodeId b) const {
  auto it = state_->link_index.find(pair_key(a, b));
  if (it == state_->link_index.end())
    fail(ErrorCode::kLinkNotFound, "fail_link: no link " + std::to_string(a) + "-" + std::to_string(b));
  std::vector<Link> remaining;
  remaining.reserve(state_->links.size() - 1);
  for (std::uint32_t i = 0; i < state_->links.size(); ++i)
    if (i != it->second) remaining.push_back(state_->links[i]);
  return Topology(state_->kinds, std::move(remaining));
}

double Topology::ideal_fct(const Path& path, std::uint64_t size, std::uint64_t mtu) const {
  require(size >= 1, "ideal_fct: size must be >= 1");
  require(mtu >= 1, "ideal_fct: mtu must be >= 1");
  const std::uint64_t packets = packets_for(size, mtu);
  const std::uint64_t last = size - (packets - 1) * mtu;
  std::vector<HopCost<double>> hops;
  double prop = 0.0;
  for (DirLinkId id : path.hops) {
    const double bw = bandwidth(id);
    hops.push_back({static_cast<double>(mtu) * 8.0 / bw, static_cast<double>(last) * 8.0 / bw});
    prop += delay_s(id);
  }
  return prop + store_forward_latency<double>(hops, packets);
}

Time Topology::ideal_fct_time(const Path& path, std::uint64_t size, std::uint64_t mtu) const {
  require(size >= 1, "ideal_fct: size must be >= 1");
  const std::uint64_t packets = packets_for(size, mtu);
  const std::uint64_t last = size - (packets - 1) * mtu;
  std::vector<HopCost<Time>> hops;
  Time prop = 0;
  for (DirLinkId id : path.hops) {
    hops.push_back({tx_time(mtu, bandwidth(id)), tx_time(last, bandwidth(id))});
    prop += delay(id);
  }
  return prop + store_forward_latency<Time>(hops, packets);
}

}  // namespace netdecomp
