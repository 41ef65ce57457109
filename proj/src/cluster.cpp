#include "netdecomp/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>

#include "netdecomp/error.hpp"

namespace netdecomp {

void Thresholds::validate() const {
  require(eps_load > 0 && wmape_size_max > 0 && wmape_ia_max > 0, "cluster thresholds must be positive");
}

std::vector<double> rank_percentiles(const std::vector<double>& sorted, std::size_t count) {
  std::vector<double> out;
  if (sorted.empty()) return out;
  out.reserve(count);
  const std::size_t n = sorted.size();
  for (std::size_t k = 1; k <= count; ++k) {
    const std::size_t rank = (k * n + count - 1) / count;
    out.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
  }
  return out;
}

LinkFeature extract_feature(std::span<const std::uint64_t> sizes, std::span<const Time> starts,
                            double bandwidth_bps, double duration_s) {
  require(duration_s > 0, "extract_feature: duration must be positive");
  require(sizes.size() == starts.size(), "extract_feature: sizes and starts differ in length");
  LinkFeature f;
  if (sizes.size() < 2) return f;
  f.sentinel = false;
  double bytes = 0;
  std::vector<double> sz(sizes.begin(), sizes.end());
  for (double s : sz) bytes += s;
  f.load = bytes * 8.0 / (bandwidth_bps * duration_s);
  std::sort(sz.begin(), sz.end());
  f.size_percentiles = rank_percentiles(sz);

  std::vector<Time> st(starts.begin(), starts.end());
  std::sort(st.begin(), st.end());
  std::vector<double> gaps;
  gaps.reserve(st.size() - 1);
  for (std::size_t i = 1; i < st.size(); ++i) gaps.push_back(time_to_seconds(st[i] - st[i - 1]));
  std::sort(gaps.begin(), gaps.end());
  f.interarrival_percentiles = rank_percentiles(gaps);
  return f;
}

LinkFeature extract_feature(const RoutedWorkload& routed, const LinkWorkload& workload, double bandwidth_bps,
                            double duration_s) {
  std::vector<std::uint64_t> sizes;
  std::vector<Time> starts;
  sizes.reserve(workload.flows.size());
  starts.reserve(workload.flows.size());
  for (auto i : workload.flows) {
    sizes.push_back(routed.flows[i].size);
    starts.push_back(routed.flows[i].start);
  }
  return extract_feature(sizes, starts, bandwidth_bps, duration_s);
}

double load_error(double a, double b) {
  require(a > 0, "load_error: reference load must be positive");
  return std::abs(a - b) / a;
}

double wmape(std::span<const double> reference, std::span<const double> candidate) {
  require(reference.size() == candidate.size(), "wmape: length mismatch");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    num += std::abs(reference[i] - candidate[i]);
    den += std::abs(reference[i]);
  }
  if (den == 0) return num == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

bool is_close_enough(const LinkFeature& rep, const LinkFeature& cand, const Thresholds& t) {
  if (rep.sentinel || cand.sentinel) return rep.sentinel && cand.sentinel;
  return load_error(rep.load, cand.load) < t.eps_load &&
         wmape(rep.size_percentiles, cand.size_percentiles) < t.wmape_size_max &&
         wmape(rep.interarrival_percentiles, cand.interarrival_percentiles) < t.wmape_ia_max;
}

std::vector<Cluster> greedy_cluster(const std::vector<LinkFeature>& features, const Thresholds& thresholds) {
  thresholds.validate();
  std::list<DirLinkId> unclustered;
  for (DirLinkId i = 0; i < features.size(); ++i) unclustered.push_back(i);
  std::vector<Cluster> clusters;
  while (!unclustered.empty()) {
    Cluster c;
    c.representative = unclustered.front();
    unclustered.pop_front();
    c.members.push_back(c.representative);
    const LinkFeature& rf = features[c.representative];
    for (auto it = unclustered.begin(); it != unclustered.end();) {
      if (is_close_enough(rf, features[*it], thresholds)) {
        c.members.push_back(*it);
        it = unclustered.erase(it);
      } else {
        ++it;
      }
    }
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<Cluster> singleton_clusters(std::size_t num_links) {
  std::vector<Cluster> out(num_links);
  for (DirLinkId i = 0; i < num_links; ++i) out[i] = {i, {i}};
  return out;
}

}  // namespace netdecomp
