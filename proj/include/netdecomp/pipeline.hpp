#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netdecomp/aggregate.hpp"
#include "netdecomp/cluster.hpp"
#include "netdecomp/decompose.hpp"
#include "netdecomp/linksim.hpp"
#include "netdecomp/topology.hpp"
#include "netdecomp/workload.hpp"

namespace netdecomp {

enum class RunMode { kEstimate, kOracle, kBoth };

// Above this node count the oracle refuses to run unless the config raises
// `oracle_max_nodes`.
inline constexpr std::size_t kOracleDefaultMaxNodes = 4096;

struct GenerateSpec {
  WorkloadSpec spec;
  bool seed_given = false;      // otherwise derived from the master seed
  bool uniform_matrix = false;  // sized to the topology's racks
};

struct RunConfig {
  // Topology: exactly one source.
  std::optional<ClosParams> clos;
  std::optional<Topology> topology;  // file or inline node/link list
  std::vector<std::pair<NodeId, NodeId>> failed_links;

  // Workload: a flow list or one or more generated parts (merged).
  std::string flows_csv;
  std::vector<GenerateSpec> generate;
  double duration_s = 0.0;  // 0 with a flow list: last start time

  std::uint64_t mtu = kDefaultMtu;
  std::uint64_t ack_size = kAckSize;
  DctcpParams dctcp;
  bool clustering = true;
  Thresholds thresholds;
  std::size_t bucket_min_count = 100;
  double bucket_size_ratio = 2.0;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::vector<QuerySpec> queries;
  std::vector<double> percentiles{50, 90, 99, 99.9};
  std::vector<std::uint64_t> size_bins{1000, 10000, 100000};
  RunMode mode = RunMode::kEstimate;
  std::size_t oracle_max_nodes = kOracleDefaultMaxNodes;
  // The oracle charges each directed link the same average ACK volume the
  // decomposition subtracts, so both sides model the same network.
  bool oracle_ack_load = true;

  void validate() const;

  // Relative paths resolve against `base_dir`.
  static RunConfig from_json(const std::string& text, const std::string& base_dir = ".");
  static RunConfig load(const std::string& path);
};

// Topology and flows after all sources are resolved.
struct Scenario {
  Topology topology;
  std::vector<Flow> flows;
  double duration_s = 0.0;
};

Scenario materialize(const RunConfig& config);

struct EstimateOptions {
  std::uint64_t mtu = kDefaultMtu;
  std::uint64_t ack_size = kAckSize;
  DctcpParams dctcp;
  bool clustering = true;
  Thresholds thresholds;
  std::size_t bucket_min_count = 100;
  double bucket_size_ratio = 2.0;
  unsigned workers = 1;
  std::uint64_t seed = 1;
  bool keep_debug = false;  // retain specs and FCT records

  static EstimateOptions from_config(const RunConfig& config);
};

struct PhaseTime {
  std::string name;
  double seconds = 0.0;
};

struct RunReport {
  std::vector<PhaseTime> phases;
  double total_s = 0.0;
  std::size_t num_flows = 0;
  std::size_t links_total = 0;  // directed links carrying at least one flow
  std::size_t links_simulated = 0;
  double pruning_ratio = 0.0;
  double longest_sim_s = 0.0;
  DirLinkId longest_sim_link = 0;
  std::vector<std::string> query_outputs;

  std::string to_json() const;
};

struct EstimateResult {
  NetworkProfile profile;
  std::vector<Cluster> clusters;
  RunReport report;
  std::map<DirLinkId, LinkSimSpec> specs;               // keep_debug only
  std::map<DirLinkId, std::vector<FctRecord>> records;  // keep_debug only
};

// Decompose, cluster, simulate representatives on a worker pool and assemble
// the profile. Link seeds are mix(seed, link id) so results do not depend on
// the worker count. SimDiverged names the offending link.
EstimateResult build_estimate(const Scenario& scenario, const EstimateOptions& options);

// Per-bin percentile table of one query result.
struct BinSummary {
  std::string label;
  std::size_t count = 0;
  std::vector<std::pair<double, double>> percentiles;
};

std::string bin_label(const std::vector<std::uint64_t>& edges, std::size_t bin);
std::size_t bin_index(const std::vector<std::uint64_t>& edges, std::uint64_t size);
// Parses "1000,10000,100000" into ascending edges.
std::vector<std::uint64_t> parse_bins(const std::string& spec);
std::vector<BinSummary> summarize(const std::vector<std::pair<std::uint64_t, double>>& size_slowdown,
                                  const std::vector<std::uint64_t>& edges, const std::vector<double>& percentiles);

struct RunOutputOptions {
  bool dump_specs = false;
  bool dump_fcts = false;
  bool dump_clusters = false;
};

// Full estimate run writing per-query CSVs, summary.json, report.json and
// profile.json into `out_dir`.
RunReport run_estimate(const RunConfig& config, const std::string& out_dir, const RunOutputOptions& out = {});

// Full-network reference records in flow order. `ack_size` > 0 lowers every
// directed link's bandwidth by the reverse direction's ACK volume; ideal
// times stay those of the original topology.
std::vector<FctRecord> oracle_records(const Scenario& scenario, const DctcpParams& params, std::uint64_t ack_size,
                                      std::uint64_t seed);

// Full-network reference simulation writing the same per-query CSV and
// summary schema.
RunReport run_oracle(const RunConfig& config, const std::string& out_dir);

// Re-runs the configured queries against a saved profile.
RunReport run_query(const std::string& profile_path, const RunConfig& config, const std::string& out_dir);

// (p - n) / n per query, bin and percentile, with p from the estimate and n
// from the oracle. Returns JSON. Throws kSchemaMismatch.
std::string compare_reports(const std::string& estimate_dir, const std::string& oracle_dir,
                            const std::vector<std::uint64_t>& edges, const std::vector<double>& percentiles = {});

double relative_error(double estimate, double oracle);

}  // namespace netdecomp
