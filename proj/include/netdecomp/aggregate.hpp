#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "netdecomp/cluster.hpp"
#include "netdecomp/delaydist.hpp"
#include "netdecomp/topology.hpp"
#include "netdecomp/workload.hpp"

namespace netdecomp {

enum class Provenance { kSimulated, kInherited, kNoFlows };
const char* provenance_name(Provenance p);

struct ProfileEntry {
  std::shared_ptr<const BucketedDist> dist;
  Provenance provenance = Provenance::kNoFlows;
  DirLinkId representative = 0;
};

// Every directed link of the topology mapped to a packet-normalized delay
// distribution, either its own or its cluster representative's.
class NetworkProfile {
 public:
  NetworkProfile(Topology topo, std::uint64_t mtu, std::vector<ProfileEntry> entries);

  const Topology& topology() const { return topo_; }
  std::uint64_t mtu() const { return mtu_; }
  const ProfileEntry& entry(DirLinkId id) const { return entries_.at(id); }
  const BucketedDist& dist(DirLinkId id) const { return *entries_.at(id).dist; }
  std::size_t size() const { return entries_.size(); }
  std::size_t simulated_count() const;

  std::string to_json() const;
  static NetworkProfile from_json(const std::string& text);
  void save(const std::string& path) const;
  static NetworkProfile load(const std::string& path);

 private:
  Topology topo_;
  std::uint64_t mtu_;
  std::vector<ProfileEntry> entries_;
};

// `simulated` holds one distribution per cluster representative. Throws
// kMissingRepresentative otherwise. Links outside every cluster carried no
// flows and get the zero distribution.
NetworkProfile build_profile(const Topology& topo, const std::vector<Cluster>& clusters,
                             const std::map<DirLinkId, BucketedDist>& simulated, std::uint64_t mtu = kDefaultMtu);

struct PointEstimate {
  std::uint64_t flow_id = 0;
  double estimated_fct = 0.0;  // seconds
  double ideal_fct = 0.0;
  double slowdown = 1.0;
};

// D = P * sum_i D*_i with one uniform draw per hop.
PointEstimate estimate_flow(const NetworkProfile& profile, const Flow& flow, const Path& path,
                            std::span<const double> uniforms);
PointEstimate estimate_flow(const NetworkProfile& profile, const Flow& flow, std::span<const double> uniforms);

struct FlowFilter {
  std::string name = "all";
  std::optional<std::set<std::uint64_t>> flow_ids;
  std::optional<std::set<NodeId>> srcs;
  std::optional<std::set<NodeId>> dsts;
  std::uint64_t min_size = 0;
  std::uint64_t max_size = UINT64_MAX;
  std::optional<std::set<std::uint32_t>> tags;

  bool matches(const Flow& f) const;
  std::string describe() const;
};

enum class QueryMode { kPerFlow, kDistribution };

struct QuerySpec {
  FlowFilter filter;
  QueryMode mode = QueryMode::kPerFlow;
  std::size_t n_samples = 10000;
  std::vector<double> percentiles{50, 90, 99, 99.9};
};

struct FlowEstimate {
  Flow flow;
  PointEstimate estimate;
};

struct QueryResult {
  std::string name;
  std::string filter_description;
  std::vector<FlowEstimate> estimates;
  std::vector<std::pair<double, double>> percentiles;  // (rank, slowdown)
  std::size_t sample_count = 0;
};

// Lower order statistic at rank ceil(q/100 * n) of ascending `sorted`.
double percentile(const std::vector<double>& sorted, double q);
std::vector<std::pair<double, double>> percentiles_of(std::vector<double> values, const std::vector<double>& qs);

// Per-flow mode estimates every matching flow once; each flow's draws come
// from mix(seed, flow id), so results do not depend on population order.
// Throws kEmptyFilter when nothing matches.
QueryResult query(const NetworkProfile& profile, const std::vector<Flow>& population, const QuerySpec& spec,
                  std::uint64_t seed);

}  // namespace netdecomp
