#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netdecomp/linksim.hpp"

namespace netdecomp {

struct DelaySample {
  std::uint64_t flow_size = 0;
  double pn_delay = 0.0;  // seconds per packet
};

struct Bucket {
  std::uint64_t minf = 0;
  std::uint64_t maxf = 0;
  std::vector<double> samples;  // ascending
};

// Per-link packet-normalized delay distribution, bucketed by flow size. An
// empty bucket list is the degenerate all-zero distribution.
struct BucketedDist {
  std::vector<Bucket> buckets;
  std::size_t total_samples = 0;

  bool is_zero() const { return buckets.empty(); }
  const Bucket& bucket_for(std::uint64_t flow_size) const;
};

// FCT minus unloaded FCT, clamped at zero, in seconds.
double compute_delay(const FctRecord& record);
double packet_normalize(double delay_s, std::uint64_t size, std::uint64_t mtu = kDefaultMtu);

std::vector<DelaySample> delay_samples(const std::vector<FctRecord>& records, std::uint64_t mtu = kDefaultMtu);

// Greedy size-ordered bucketing: a bucket closes once it holds at least
// `min_count` samples and its largest size is at least `size_ratio` times its
// smallest. Samples of equal size never straddle a boundary. The last bucket
// takes whatever remains.
BucketedDist bucket_samples(std::vector<DelaySample> samples, std::size_t min_count = 100,
                            double size_ratio = 2.0);

// Empirical quantile (lower order statistic) of the bucket owning
// `flow_size`. Sizes outside the observed range clamp to the end buckets.
double lookup_and_sample(const BucketedDist& dist, std::uint64_t flow_size, double u);

}  // namespace netdecomp
