#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "netdecomp/rng.hpp"
#include "netdecomp/topology.hpp"
#include "netdecomp/types.hpp"

namespace netdecomp {

// Relative rack-to-rack traffic volume, row = source rack.
struct TrafficMatrix {
  std::size_t racks = 0;
  std::vector<double> weights;

  double at(std::size_t src, std::size_t dst) const { return weights[src * racks + dst]; }
  void validate() const;

  static TrafficMatrix uniform(std::size_t racks);
  static TrafficMatrix parse_csv(const std::string& text);
  static TrafficMatrix load_csv(const std::string& path);
};

// Piecewise-linear flow size CDF.
struct SizeDistribution {
  std::vector<std::pair<std::uint64_t, double>> points;  // (size bytes, cumulative probability)

  void validate() const;
  double mean() const;

  static SizeDistribution constant(std::uint64_t size) { return {{{size, 1.0}}}; }
  static SizeDistribution parse_csv(const std::string& text);
  static SizeDistribution load_csv(const std::string& path);
};

std::uint64_t sample_size(const SizeDistribution& dist, double u);

enum class ArrivalKind { kLogNormal, kPoisson };

struct ArrivalSpec {
  ArrivalKind kind = ArrivalKind::kLogNormal;
  double sigma = 1.0;
  double mean_interarrival = 1.0;  // seconds
};

// Renewal process of inter-arrival gaps. The log-normal location is
// ln(mean) - sigma^2/2 so sigma changes burstiness but not the mean.
class ArrivalProcess {
 public:
  explicit ArrivalProcess(const ArrivalSpec& spec);
  Time next_gap(Rng& rng);
  double mu() const { return mu_; }

 private:
  ArrivalSpec spec_;
  double mu_ = 0.0;
  Time fixed_gap_ = 0;
};

struct Flow {
  std::uint64_t id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::uint64_t size = 0;
  Time start = 0;
  std::uint32_t tag = 0;
};

struct WorkloadSpec {
  TrafficMatrix matrix;
  SizeDistribution sizes;
  ArrivalKind arrival = ArrivalKind::kLogNormal;
  double sigma = 1.0;
  double max_load = 0.5;
  double duration_s = 0.01;
  std::uint64_t seed = 1;
  std::uint32_t tag = 0;

  void validate() const;
};

// Expected bits/s on every directed link per unit flow arrival rate with
// uniform hosts within racks and uniform ECMP splitting.
std::vector<double> expected_link_bits(const Topology& topo, const TrafficMatrix& matrix,
                                       const SizeDistribution& sizes);

// Flows/second that bring the most loaded link to `max_load`.
double calibrate_rate(const Topology& topo, const TrafficMatrix& matrix, const SizeDistribution& sizes,
                      double max_load);

std::vector<Flow> generate_flows(const WorkloadSpec& spec, const Topology& topo);

// Arrival-ordered union; ids are reassigned from 0.
std::vector<Flow> merge_workloads(const std::vector<std::vector<Flow>>& parts);

std::vector<Flow> parse_flows_csv(const std::string& text);
std::vector<Flow> load_flows_csv(const std::string& path);
std::string flows_to_csv(const std::vector<Flow>& flows);

}  // namespace netdecomp
