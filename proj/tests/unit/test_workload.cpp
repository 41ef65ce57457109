#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "netdecomp/error.hpp"
#include "netdecomp/workload.hpp"

using namespace netdecomp;

namespace {

SizeDistribution two_point() { return {{{100, 0.5}, {1000, 1.0}}}; }

// 1 pod, 2 racks, 1 host each: one 10G host uplink carries every flow.
Topology pair_topology() {
  ClosParams p;
  p.racks_per_pod = 2;
  p.hosts_per_rack = 1;
  return Topology::build_clos(p);
}

// Piecewise-linear CDF evaluated independently of sample_size.
double cdf(const SizeDistribution& d, double x) {
  const auto& p = d.points;
  if (x < static_cast<double>(p[0].first)) return 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double lo = static_cast<double>(p[i - 1].first), hi = static_cast<double>(p[i].first);
    if (x < hi) return p[i - 1].second + (p[i].second - p[i - 1].second) * (x - lo) / (hi - lo);
  }
  return 1.0;
}

}  // namespace

TEST_CASE("sample_size inverse transform") {
  auto d = two_point();
  CHECK(sample_size(d, 0.5) == 100);
  CHECK(sample_size(d, 0.75) == 550);
  CHECK(sample_size(d, 0.1) == 100);
  CHECK(sample_size(d, 0.999999) == 1000);
  auto c = SizeDistribution::constant(4242);
  for (double u : {0.0, 0.3, 0.9999}) CHECK(sample_size(c, u) == 4242);
}

TEST_CASE("size samples follow the input cdf (KS < 0.01 at 1e6)") {
  auto d = SizeDistribution::parse_csv("size_bytes,cum_prob\n100,0.1\n1000,0.5\n20000,0.8\n1000000,1.0\n");
  Rng rng(99);
  std::vector<std::uint64_t> xs(1000000);
  for (auto& x : xs) x = sample_size(d, uniform01(rng));
  std::sort(xs.begin(), xs.end());
  double ks = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double v = static_cast<double>(xs[i]);
    // Samples are rounded to integers, so compare against the cdf at v + 0.5.
    ks = std::max(ks, std::abs(static_cast<double>(j) / n - cdf(d, v + 0.5)));
    ks = std::max(ks, std::abs(static_cast<double>(i) / n - cdf(d, v - 0.5)));
    i = j;
  }
  CHECK(ks < 0.01);
}

TEST_CASE("calibrate_rate single 10G bottleneck") {
  auto t = pair_topology();
  TrafficMatrix m{2, {0, 1, 0, 0}};
  auto sizes = SizeDistribution::constant(12500);
  CHECK(calibrate_rate(t, m, sizes, 0.5) == doctest::Approx(0.5 * 10e9 / (12500 * 8.0)).epsilon(1e-12));
  CHECK(calibrate_rate(t, m, sizes, 0.5) == doctest::Approx(50000.0).epsilon(1e-12));
  CHECK(calibrate_rate(t, m, sizes, 1e-9) < 1e-3);
  CHECK(calibrate_rate(t, m, sizes, 0.0) == 0.0);
}

TEST_CASE("zero demand and rack mismatch") {
  auto t = pair_topology();
  auto sizes = SizeDistribution::constant(100);
  try {
    calibrate_rate(t, TrafficMatrix{2, {0, 0, 0, 0}}, sizes, 0.5);
    FAIL("expected ZeroDemand");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroDemand);
  }
  // Only intra-rack demand on single-host racks produces nothing routable.
  try {
    calibrate_rate(t, TrafficMatrix{2, {1, 0, 0, 1}}, sizes, 0.5);
    FAIL("expected ZeroDemand");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kZeroDemand);
  }
  CHECK_THROWS_AS(calibrate_rate(t, TrafficMatrix::uniform(3), sizes, 0.5), Error);
}

TEST_CASE("uniform matrix on symmetric clos loads same-tier links equally") {
  ClosParams p;
  p.pods = 2;
  p.racks_per_pod = 2;
  p.hosts_per_rack = 2;
  p.fabric_per_pod = 2;
  p.spines_per_plane = 2;
  auto t = Topology::build_clos(p);
  auto bits = expected_link_bits(t, TrafficMatrix::uniform(4), SizeDistribution::constant(1000));
  std::map<std::pair<NodeKind, NodeKind>, std::vector<double>> tiers;
  for (DirLinkId id = 0; id < t.num_directed_links(); ++id) {
    auto d = t.directed(id);
    tiers[{t.kind(d.src), t.kind(d.dst)}].push_back(bits[id]);
  }
  CHECK(tiers.size() == 6);
  for (auto& [k, v] : tiers) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    CHECK(*hi == doctest::Approx(*lo).epsilon(1e-12));
    CHECK(*lo > 0);
  }
}

TEST_CASE("sigma 0 gives constant gaps") {
  ArrivalProcess a({ArrivalKind::kLogNormal, 0.0, 2e-5});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(a.next_gap(rng) == seconds_to_time(2e-5));
}

TEST_CASE("log-normal mean correction keeps mean gap at 1/rate for sigma 2") {
  const double mean = 1e-5;
  ArrivalProcess a({ArrivalKind::kLogNormal, 2.0, mean});
  CHECK(a.mu() == doctest::Approx(std::log(mean) - 2.0));
  Rng rng(2024);
  double sum = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += time_to_seconds(a.next_gap(rng));
  CHECK(std::abs(sum / n / mean - 1.0) < 0.01);
}

TEST_CASE("poisson arrivals have the right mean") {
  ArrivalProcess a({ArrivalKind::kPoisson, 0.0, 1e-6});
  Rng rng(3);
  double sum = 0;
  for (int i = 0; i < 200000; ++i) sum += time_to_seconds(a.next_gap(rng));
  CHECK(sum / 200000 == doctest::Approx(1e-6).epsilon(0.01));
}

TEST_CASE("generate_flows determinism and flow invariants") {
  ClosParams p;
  p.racks_per_pod = 3;
  p.hosts_per_rack = 3;
  auto t = Topology::build_clos(p);
  WorkloadSpec s;
  s.matrix = TrafficMatrix::uniform(3);
  s.sizes = two_point();
  s.duration_s = 0.002;
  s.seed = 77;
  s.tag = 4;
  auto a = generate_flows(s, t);
  auto b = generate_flows(s, t);
  REQUIRE(!a.empty());
  CHECK(flows_to_csv(a) == flows_to_csv(b));
  s.seed = 78;
  CHECK(flows_to_csv(generate_flows(s, t)) != flows_to_csv(a));
  const auto horizon = seconds_to_time(s.duration_s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == i);
    CHECK(a[i].src != a[i].dst);
    CHECK(t.kind(a[i].src) == NodeKind::kHost);
    CHECK(t.kind(a[i].dst) == NodeKind::kHost);
    CHECK(a[i].size >= 1);
    CHECK(a[i].start >= 0);
    CHECK(a[i].start < horizon);
    CHECK(a[i].tag == 4);
    if (i) CHECK(a[i].start >= a[i - 1].start);
  }
}

TEST_CASE("intra-rack traffic resamples self pairs") {
  ClosParams p;
  p.racks_per_pod = 2;
  p.hosts_per_rack = 2;
  auto t = Topology::build_clos(p);
  WorkloadSpec s;
  s.matrix = TrafficMatrix{2, {1, 0, 0, 0}};
  s.sizes = SizeDistribution::constant(500);
  s.duration_s = 0.001;
  auto flows = generate_flows(s, t);
  REQUIRE(flows.size() > 100);
  int forward = 0;
  for (const auto& f : flows) {
    CHECK(f.src != f.dst);
    CHECK(f.src < 2);
    CHECK(f.dst < 2);
    forward += f.src == 0;
  }
  CHECK(std::abs(forward - static_cast<int>(flows.size()) / 2) < static_cast<int>(flows.size()) / 10);
}

TEST_CASE("rack-pair frequencies follow the matrix (chi-square, 1e6 flows)") {
  ClosParams p;
  p.racks_per_pod = 3;
  p.hosts_per_rack = 2;
  auto t = Topology::build_clos(p);
  WorkloadSpec s;
  s.matrix = TrafficMatrix{3, {1, 2, 3, 0, 1, 5, 2, 0.5, 1}};
  s.sizes = SizeDistribution::constant(200);
  s.max_load = 0.5;
  s.sigma = 1.0;
  const double rate = calibrate_rate(t, s.matrix, s.sizes, s.max_load);
  s.duration_s = 1e6 / rate;
  auto flows = generate_flows(s, t);
  REQUIRE(flows.size() > 900000);
  std::map<std::pair<int, int>, double> counts;
  for (const auto& f : flows) counts[{static_cast<int>(f.src / 2), static_cast<int>(f.dst / 2)}] += 1;
  double total_w = 0;
  for (double w : s.matrix.weights) total_w += w;
  double chi2 = 0;
  int cells = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double w = s.matrix.at(i, j);
      const double observed = counts[{i, j}];
      if (w == 0) {
        CHECK(observed == 0);
        continue;
      }
      const double expected = static_cast<double>(flows.size()) * w / total_w;
      chi2 += (observed - expected) * (observed - expected) / expected;
      ++cells;
    }
  // 99.9th percentile of chi-square with 7 degrees of freedom.
  CHECK(cells == 8);
  CHECK(chi2 < 24.32);
}

TEST_CASE("offered load on the most loaded link matches max_load") {
  auto t = pair_topology();
  WorkloadSpec s;
  s.matrix = TrafficMatrix{2, {0, 3, 1, 0}};
  s.sizes = two_point();
  s.max_load = 0.4;
  s.sigma = 1.0;
  const auto bits = expected_link_bits(t, s.matrix, s.sizes);
  DirLinkId worst = 0;
  for (DirLinkId id = 0; id < bits.size(); ++id)
    if (bits[id] / t.bandwidth(id) > bits[worst] / t.bandwidth(worst)) worst = id;
  const double rate = calibrate_rate(t, s.matrix, s.sizes, s.max_load);
  s.duration_s = 1e6 / rate;
  auto flows = generate_flows(s, t);
  double offered = 0;
  for (const auto& f : flows) {
    auto path = t.ecmp_route(f.src, f.dst, f.id);
    if (std::find(path.hops.begin(), path.hops.end(), worst) != path.hops.end())
      offered += static_cast<double>(f.size) * 8;
  }
  const double load = offered / s.duration_s / t.bandwidth(worst);
  CHECK(std::abs(load / s.max_load - 1.0) < 0.02);
}

TEST_CASE("merge orders by arrival and renumbers") {
  std::vector<Flow> a{{0, 0, 1, 10, 5, 0}, {1, 0, 1, 10, 20, 0}};
  std::vector<Flow> b{{0, 1, 0, 99, 10, 1}, {1, 1, 0, 99, 20, 1}};
  auto m = merge_workloads({a, b});
  REQUIRE(m.size() == 4);
  CHECK(m[0].start == 5);
  CHECK(m[1].tag == 1);
  CHECK(m[2].tag == 0);  // ties keep part order
  CHECK(m[3].tag == 1);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i].id == i);
}

TEST_CASE("flow csv round trip and parse errors") {
  std::vector<Flow> f{{0, 3, 4, 1500, seconds_to_time(1.25e-3), 2}, {1, 4, 3, 1, 0, 0}};
  auto back = parse_flows_csv(flows_to_csv(f));
  REQUIRE(back.size() == 2);
  CHECK(back[0].src == 3);
  CHECK(back[0].size == 1500);
  CHECK(back[0].start == f[0].start);
  CHECK(back[0].tag == 2);
  CHECK(back[1].dst == 3);
  auto no_tag = parse_flows_csv("id,src,dst,size_bytes,start_s\n7,1,2,100,0.5\n");
  CHECK(no_tag.at(0).tag == 0);
  CHECK_THROWS_AS(parse_flows_csv("0,1,1,100,0\n"), Error);
  CHECK_THROWS_AS(parse_flows_csv("0,1,2,0,0\n"), Error);
  CHECK_THROWS_AS(parse_flows_csv("0,1,2\n"), Error);
  CHECK_THROWS_AS(parse_flows_csv("0,1,2,abc,0\n"), Error);
}

TEST_CASE("distribution and matrix validation") {
  CHECK_THROWS_AS(SizeDistribution::parse_csv("100,0.5\n50,1.0\n"), Error);
  CHECK_THROWS_AS(SizeDistribution::parse_csv("100,0.5\n200,0.4\n300,1.0\n"), Error);
  CHECK_THROWS_AS(SizeDistribution::parse_csv("100,0.5\n200,0.9\n"), Error);
  CHECK_THROWS_AS(SizeDistribution::parse_csv("0,1.0\n"), Error);
  CHECK(two_point().mean() == doctest::Approx(0.5 * 100 + 0.5 * 550));
  CHECK_THROWS_AS(TrafficMatrix::parse_csv("1,2\n3\n"), Error);
  CHECK_THROWS_AS(TrafficMatrix::parse_csv("1,-2\n3,4\n"), Error);
  auto m = TrafficMatrix::parse_csv("0,1\n2,0\n");
  CHECK(m.racks == 2);
  CHECK(m.at(1, 0) == 2.0);
}
