#include "netdecomp/delaydist.hpp"

#include <algorithm>
#include <cmath>

#include "netdecomp/error.hpp"

namespace netdecomp {

const Bucket& BucketedDist::bucket_for(std::uint64_t flow_size) const {
  require(!buckets.empty(), "bucket_for on the zero distribution");
  // Bucket i owns sizes up to bucket i+1's minf - 1.
  auto it = std::upper_bound(buckets.begin(), buckets.end(), flow_size,
                             [](std::uint64_t s, const Bucket& b) { return s < b.minf; });
  if (it == buckets.begin()) return buckets.front();
  return *(it - 1);
}

double compute_delay(const FctRecord& record) {
  return std::max(0.0, time_to_seconds(record.fct - record.ideal));
}

double packet_normalize(double delay_s, std::uint64_t size, std::uint64_t mtu) {
  require(size >= 1, "packet_normalize: size must be >= 1");
  return delay_s / static_cast<double>(packets_for(size, mtu));
}

std::vector<DelaySample> delay_samples(const std::vector<FctRecord>& records, std::uint64_t mtu) {
  std::vector<DelaySample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.size, packet_normalize(compute_delay(r), r.size, mtu)});
  return out;
}

BucketedDist bucket_samples(std::vector<DelaySample> samples, std::size_t min_count, double size_ratio) {
  require(min_count >= 1, "bucket_samples: B must be >= 1");
  require(size_ratio >= 1.0, "bucket_samples: x must be >= 1");
  BucketedDist dist;
  dist.total_samples = samples.size();
  if (samples.empty()) return dist;
  std::sort(samples.begin(), samples.end(), [](const DelaySample& a, const DelaySample& b) {
    return a.flow_size != b.flow_size ? a.flow_size < b.flow_size : a.pn_delay < b.pn_delay;
  });

  std::size_t begin = 0;
  const std::size_t n = samples.size();
  while (begin < n) {
    const std::uint64_t minf = samples[begin].flow_size;
    std::size_t end = begin;
    while (end < n) {
      ++end;
      const std::uint64_t maxf = samples[end - 1].flow_size;
      if (end - begin >= min_count && static_cast<double>(maxf) >= size_ratio * static_cast<double>(minf)) {
        while (end < n && samples[end].flow_size == maxf) ++end;
        break;
      }
    }
    Bucket b{minf, samples[end - 1].flow_size, {}};
    b.samples.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) b.samples.push_back(samples[i].pn_delay);
    std::sort(b.samples.begin(), b.samples.end());
    dist.buckets.push_back(std::move(b));
    begin = end;
  }
  return dist;
}

double lookup_and_sample(const BucketedDist& dist, std::uint64_t flow_size, double u) {
  if (dist.is_zero()) return 0.0;
  const auto& s = dist.bucket_for(flow_size).samples;
  auto idx = static_cast<std::size_t>(std::floor(u * static_cast<double>(s.size())));
  return s[std::min(idx, s.size() - 1)];
}

}  // namespace netdecomp
