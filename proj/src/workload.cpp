#include "netdecomp/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "netdecomp/error.hpp"
#include "text_io.hpp"

namespace netdecomp {

void TrafficMatrix::validate() const {
  require(racks >= 1, "matrix: needs at least one rack");
  require(weights.size() == racks * racks, "matrix: expected racks x racks entries");
  bool positive = false;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0, "matrix: weights must be finite and nonnegative");
    positive = positive || w > 0;
  }
  if (!positive) fail(ErrorCode::kZeroDemand, "matrix: all entries are zero");
}

TrafficMatrix TrafficMatrix::uniform(std::size_t racks) {
  return {racks, std::vector<double>(racks * racks, 1.0)};
}

TrafficMatrix TrafficMatrix::parse_csv(const std::string& text) {
  TrafficMatrix m;
  auto rows = detail::csv_rows(text);
  m.racks = rows.size();
  for (const auto& row : rows) {
    if (row.size() != m.racks) fail(ErrorCode::kParse, "matrix csv: row length differs from row count");
    for (auto f : row) m.weights.push_back(detail::field_double(f, "matrix weight"));
  }
  m.validate();
  return m;
}

TrafficMatrix TrafficMatrix::load_csv(const std::string& path) { return parse_csv(detail::read_file(path)); }

void SizeDistribution::validate() const {
  require(!points.empty(), "size distribution: no points");
  require(points.front().first >= 1, "size distribution: first size must be >= 1");
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].second >= 0 && points[i].second <= 1, "size distribution: cum_prob outside [0,1]");
    if (i > 0) {
      require(points[i].first > points[i - 1].first, "size distribution: sizes must strictly increase");
      require(points[i].second >= points[i - 1].second, "size distribution: cum_prob must not decrease");
    }
  }
  require(points.back().second == 1.0, "size distribution: final cum_prob must be 1");
}

double SizeDistribution::mean() const {
  double m = static_cast<double>(points[0].first) * points[0].second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double mass = points[i].second - points[i - 1].second;
    m += mass * 0.5 * static_cast<double>(points[i - 1].first + points[i].first);
  }
  return m;
}

SizeDistribution SizeDistribution::parse_csv(const std::string& text) {
  SizeDistribution d;
  for (const auto& row : detail::csv_rows(text)) {
    if (row.size() < 2) fail(ErrorCode::kParse, "size csv: expected size_bytes,cum_prob");
    d.points.emplace_back(detail::field_u64(row[0], "size"), detail::field_double(row[1], "cum_prob"));
  }
  d.validate();
  return d;
}

SizeDistribution SizeDistribution::load_csv(const std::string& path) {
  return parse_csv(detail::read_file(path));
}

std::uint64_t sample_size(const SizeDistribution& dist, double u) {
  const auto& pts = dist.points;
  auto it = std::lower_bound(pts.begin(), pts.end(), u,
                             [](const auto& p, double v) { return p.second < v; });
  if (it == pts.begin()) return pts.front().first;
  if (it == pts.end()) return pts.back().first;
  const auto& lo = *(it - 1);
  const auto& hi = *it;
  const double frac = (u - lo.second) / (hi.second - lo.second);
  const double s = static_cast<double>(lo.first) + frac * static_cast<double>(hi.first - lo.first);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(s)));
}

ArrivalProcess::ArrivalProcess(const ArrivalSpec& spec) : spec_(spec) {
  require(spec.mean_interarrival > 0, "arrival: mean inter-arrival must be positive");
  require(spec.sigma >= 0, "arrival: sigma must be >= 0");
  mu_ = std::log(spec.mean_interarrival) - spec.sigma * spec.sigma / 2.0;
  fixed_gap_ = std::max<Time>(1, seconds_to_time(spec.mean_interarrival));
}

Time ArrivalProcess::next_gap(Rng& rng) {
  double gap = 0.0;
  if (spec_.kind == ArrivalKind::kPoisson) {
    gap = -spec_.mean_interarrival * std::log1p(-uniform01(rng));
  } else {
    if (spec_.sigma == 0.0) return fixed_gap_;
    std::normal_distribution<double> normal(mu_, spec_.sigma);
    gap = std::exp(normal(rng));
  }
  return seconds_to_time(gap);
}

void WorkloadSpec::validate() const {
  matrix.validate();
  sizes.validate();
  require(sigma >= 0, "workload: sigma must be >= 0");
  require(max_load > 0 && max_load < 1, "workload: max_load must be in (0,1)");
  require(duration_s > 0, "workload: duration must be positive");
}

namespace {

struct PairChoice {
  std::size_t src_rack;
  std::size_t dst_rack;
  double weight;
};

// Matrix entries that can actually produce a flow.
std::vector<PairChoice> usable_pairs(const Topology& topo, const TrafficMatrix& matrix) {
  const auto& racks = topo.racks();
  if (matrix.racks != racks.size())
    fail(ErrorCode::kInvalidArgument, "matrix has " + std::to_string(matrix.racks) + " racks, topology has " +
                                          std::to_string(racks.size()));
  std::vector<PairChoice> out;
  for (std::size_t i = 0; i < matrix.racks; ++i)
    for (std::size_t j = 0; j < matrix.racks; ++j) {
      const double w = matrix.at(i, j);
      if (w <= 0) continue;
      if (i == j && racks[i].size() < 2) continue;
      out.push_back({i, j, w});
    }
  if (out.empty()) fail(ErrorCode::kZeroDemand, "traffic matrix yields no routable host pairs");
  return out;
}

}  // namespace

std::vector<double> expected_link_bits(const Topology& topo, const TrafficMatrix& matrix,
                                       const SizeDistribution& sizes) {
  const auto pairs = usable_pairs(topo, matrix);
  double total = 0;
  for (const auto& p : pairs) total += p.weight;
  const double bits_per_flow = sizes.mean() * 8.0;
  const auto& racks = topo.racks();

  std::vector<double> load(topo.num_directed_links(), 0.0);
  std::map<NodeId, double> level, next_level;
  for (const auto& p : pairs) {
    const auto& srcs = racks[p.src_rack];
    const auto& dsts = racks[p.dst_rack];
    const double n_pairs = p.src_rack == p.dst_rack ? static_cast<double>(srcs.size() * (srcs.size() - 1))
                                                    : static_cast<double>(srcs.size() * dsts.size());
    const double q = p.weight / total / n_pairs;
    for (NodeId s : srcs) {
      for (NodeId d : dsts) {
        if (s == d) continue;
        if (!topo.reachable(s, d)) fail(ErrorCode::kNoRoute, "host pair unreachable in load calibration");
        level.clear();
        level[s] = 1.0;
        while (!level.empty()) {
          next_level.clear();
          for (auto [u, frac] : level) {
            if (u == d) continue;
            auto hops = topo.next_hops(u, d);
            const double share = frac / static_cast<double>(hops.size());
            for (NodeId v : hops) {
              load[*topo.find(u, v)] += q * share * bits_per_flow;
              next_level[v] += share;
            }
          }
          std::swap(level, next_level);
        }
      }
    }
  }
  return load;
}

double calibrate_rate(const Topology& topo, const TrafficMatrix& matrix, const SizeDistribution& sizes,
                      double max_load) {
  matrix.validate();
  sizes.validate();
  require(max_load >= 0, "calibrate_rate: max_load must be >= 0");
  const auto bits = expected_link_bits(topo, matrix, sizes);
  double worst = 0;
  for (DirLinkId id = 0; id < bits.size(); ++id) worst = std::max(worst, bits[id] / topo.bandwidth(id));
  if (worst <= 0) fail(ErrorCode::kZeroDemand, "traffic matrix loads no link");
  return max_load / worst;
}

std::vector<Flow> generate_flows(const WorkloadSpec& spec, const Topology& topo) {
  spec.validate();
  const double rate = calibrate_rate(topo, spec.matrix, spec.sizes, spec.max_load);
  const auto pairs = usable_pairs(topo, spec.matrix);
  std::vector<double> cumulative;
  double acc = 0;
  for (const auto& p : pairs) cumulative.push_back(acc += p.weight);

  Rng rng(mix64(spec.seed));
  ArrivalProcess arrivals({spec.arrival, spec.sigma, 1.0 / rate});
  const Time horizon = seconds_to_time(spec.duration_s);
  const auto& racks = topo.racks();

  std::vector<Flow> flows;
  Time t = 0;
  while (true) {
    t += arrivals.next_gap(rng);
    if (t >= horizon) break;
    const double pick = uniform01(rng) * acc;
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                        cumulative.begin());
    idx = std::min(idx, pairs.size() - 1);
    const auto& srcs = racks[pairs[idx].src_rack];
    const auto& dsts = racks[pairs[idx].dst_rack];
    const NodeId src = srcs[rng() % srcs.size()];
    NodeId dst = dsts[rng() % dsts.size()];
    while (dst == src) dst = dsts[rng() % dsts.size()];
    const std::uint64_t size = sample_size(spec.sizes, uniform01(rng));
    flows.push_back({flows.size(), src, dst, size, t, spec.tag});
  }
  return flows;
}

std::vector<Flow> merge_workloads(const std::vector<std::vector<Flow>>& parts) {
  std::vector<Flow> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::stable_sort(all.begin(), all.end(), [](const Flow& a, const Flow& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < all.size(); ++i) all[i].id = i;
  return all;
}

std::vector<Flow> parse_flows_csv(const std::string& text) {
  std::vector<Flow> flows;
  for (const auto& row : detail::csv_rows(text)) {
    if (row.size() < 5) fail(ErrorCode::kParse, "flow csv: expected id,src,dst,size_bytes,start_s[,tag]");
    Flow f;
    f.id = detail::field_u64(row[0], "flow id");
    f.src = static_cast<NodeId>(detail::field_u64(row[1], "src"));
    f.dst = static_cast<NodeId>(detail::field_u64(row[2], "dst"));
    f.size = detail::field_u64(row[3], "size_bytes");
    f.start = seconds_to_time(detail::field_double(row[4], "start_s"));
    if (row.size() > 5) f.tag = static_cast<std::uint32_t>(detail::field_u64(row[5], "tag"));
    if (f.size < 1) fail(ErrorCode::kParse, "flow csv: size must be >= 1");
    if (f.start < 0) fail(ErrorCode::kParse, "flow csv: start must be >= 0");
    if (f.src == f.dst) fail(ErrorCode::kParse, "flow csv: src equals dst");
    flows.push_back(f);
  }
  return flows;
}

std::vector<Flow> load_flows_csv(const std::string& path) { return parse_flows_csv(detail::read_file(path)); }

std::string flows_to_csv(const std::vector<Flow>& flows) {
  std::string out = "id,src,dst,size_bytes,start_s,tag\n";
  char buf[160];
  for (const auto& f : flows) {
    std::snprintf(buf, sizeof buf, "%llu,%u,%u,%llu,%.12f,%u\n", static_cast<unsigned long long>(f.id), f.src,
                  f.dst, static_cast<unsigned long long>(f.size), time_to_seconds(f.start), f.tag);
    out += buf;
  }
  return out;
}

}  // namespace netdecomp
