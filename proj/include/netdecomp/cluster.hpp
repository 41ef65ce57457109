#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "netdecomp/decompose.hpp"

namespace netdecomp {

inline constexpr std::size_t kFeaturePercentiles = 1000;

struct LinkFeature {
  bool sentinel = true;  // fewer than two flows
  double load = 0.0;
  std::vector<double> size_percentiles;
  std::vector<double> interarrival_percentiles;
};

struct Thresholds {
  double eps_load = 0.002;
  double wmape_size_max = 0.1;
  double wmape_ia_max = 0.1;

  void validate() const;
};

struct Cluster {
  DirLinkId representative = 0;
  std::vector<DirLinkId> members;  // representative first
};

// Lower order statistic at rank ceil(k*n/count), k = 1..count, of sorted data.
std::vector<double> rank_percentiles(const std::vector<double>& sorted, std::size_t count = kFeaturePercentiles);

LinkFeature extract_feature(std::span<const std::uint64_t> sizes, std::span<const Time> starts,
                            double bandwidth_bps, double duration_s);
LinkFeature extract_feature(const RoutedWorkload& routed, const LinkWorkload& workload, double bandwidth_bps,
                            double duration_s);

// |a - b| / a, with a the representative's load.
double load_error(double a, double b);

// sum |A_i - B_i| / sum |A_i|. A zero reference gives 0 when B is also zero
// and +infinity otherwise.
double wmape(std::span<const double> reference, std::span<const double> candidate);

bool is_close_enough(const LinkFeature& representative, const LinkFeature& candidate, const Thresholds& t);

// Greedy single pass per cluster over links in id order; features[i] belongs
// to DirLinkId i.
std::vector<Cluster> greedy_cluster(const std::vector<LinkFeature>& features, const Thresholds& thresholds);

// Every link in its own cluster.
std::vector<Cluster> singleton_clusters(std::size_t num_links);

}  // namespace netdecomp
