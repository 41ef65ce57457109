#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "netdecomp/error.hpp"
#include "netdecomp/topology.hpp"
#include "netdecomp/workload.hpp"

using namespace netdecomp;

namespace {

ClosParams small_params() {
  ClosParams p;
  p.pods = 2;
  p.racks_per_pod = 2;
  p.hosts_per_rack = 2;
  p.fabric_per_pod = 2;
  p.spines_per_plane = 2;
  return p;
}

std::size_t count_kind(const Topology& t, NodeKind k) {
  std::size_t n = 0;
  for (NodeId i = 0; i < t.num_nodes(); ++i) n += t.kind(i) == k;
  return n;
}

// Packet-by-packet store-and-forward recurrence.
double brute_force_fct(const std::vector<double>& bw, const std::vector<double>& delay, std::uint64_t size,
                       std::uint64_t mtu) {
  const std::size_t hops = bw.size();
  std::vector<double> prev_finish(hops, 0.0);
  double fct = 0;
  for (std::uint64_t sent = 0; sent < size; sent += mtu) {
    const double bytes = static_cast<double>(std::min(mtu, size - sent));
    double arrive = 0;
    for (std::size_t h = 0; h < hops; ++h) {
      const double finish = std::max(arrive, prev_finish[h]) + bytes * 8 / bw[h];
      prev_finish[h] = finish;
      arrive = finish + delay[h];
    }
    fct = arrive;
  }
  return fct;
}

Topology chain(const std::vector<double>& bw, const std::vector<double>& delay) {
  std::vector<NodeKind> kinds(bw.size() + 1, NodeKind::kHost);
  std::vector<Link> links;
  for (std::size_t i = 0; i < bw.size(); ++i)
    links.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1), bw[i], delay[i]});
  return Topology(kinds, links);
}

}  // namespace

TEST_CASE("clos host count for the downsampled evaluation topology") {
  ClosParams p;
  p.pods = 2;
  p.racks_per_pod = 16;
  p.hosts_per_rack = 8;
  auto t = Topology::build_clos(p);
  CHECK(t.hosts().size() == 256);
  CHECK(t.racks().size() == 32);
}

TEST_CASE("single rack degenerates to one ToR and host links only") {
  ClosParams p;
  p.hosts_per_rack = 2;
  auto t = Topology::build_clos(p);
  CHECK(t.hosts().size() == 2);
  CHECK(count_kind(t, NodeKind::kTor) == 1);
  CHECK(count_kind(t, NodeKind::kFabric) == 0);
  CHECK(t.links().size() == 2);
}

TEST_CASE("clos link count matches enumeration of the wiring rule") {
  auto p = small_params();
  auto t = Topology::build_clos(p);
  // Enumerate every pair that the rule says must be wired and check presence.
  std::set<std::pair<NodeId, NodeId>> expected;
  std::vector<NodeId> tors, fabrics, spines;
  for (NodeId i = 0; i < t.num_nodes(); ++i) {
    if (t.kind(i) == NodeKind::kTor) tors.push_back(i);
    if (t.kind(i) == NodeKind::kFabric) fabrics.push_back(i);
    if (t.kind(i) == NodeKind::kSpine) spines.push_back(i);
  }
  for (NodeId h : t.hosts()) expected.insert({h, tors[h / p.hosts_per_rack]});
  for (std::size_t r = 0; r < tors.size(); ++r) {
    std::size_t pod = r / p.racks_per_pod;
    for (std::size_t k = 0; k < p.fabric_per_pod; ++k) expected.insert({tors[r], fabrics[pod * p.fabric_per_pod + k]});
  }
  for (std::size_t f = 0; f < fabrics.size(); ++f) {
    std::size_t plane = f % p.fabric_per_pod;
    for (std::size_t s = 0; s < p.spines_per_plane; ++s)
      expected.insert({fabrics[f], spines[plane * p.spines_per_plane + s]});
  }
  CHECK(expected.size() == 24);
  CHECK(t.links().size() == 24);
  for (auto [a, b] : expected) CHECK(t.find(a, b).has_value());
  CHECK(t.num_directed_links() == 48);
}

TEST_CASE("directed ids pair up and reverse") {
  auto t = Topology::build_clos(small_params());
  for (DirLinkId id = 0; id < t.num_directed_links(); ++id) {
    auto d = t.directed(id);
    auto r = t.directed(t.reverse(id));
    CHECK(d.src == r.dst);
    CHECK(d.dst == r.src);
    CHECK(t.directed_id(d.src, d.dst) == id);
  }
  CHECK_THROWS_AS(t.directed_id(0, 1), Error);
}

TEST_CASE("same-rack route is two hops regardless of flow id") {
  auto t = Topology::build_clos(small_params());
  for (std::uint64_t id = 0; id < 50; ++id) {
    auto path = t.ecmp_route(0, 1, id);
    REQUIRE(path.size() == 2);
    CHECK(t.directed(path.hops[0]).src == 0);
    CHECK(t.directed(path.hops[1]).dst == 1);
  }
}

TEST_CASE("route errors") {
  auto t = Topology::build_clos(small_params());
  try {
    t.ecmp_route(3, 3, 0);
    FAIL("expected SameEndpoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSameEndpoint);
  }
  auto cut = t.fail_link(0, t.directed(t.ecmp_route(0, 1, 0).hops[0]).dst);
  try {
    cut.ecmp_route(1, 0, 0);
    FAIL("expected NoRoute");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoRoute);
  }
  try {
    t.fail_link(0, 1);
    FAIL("expected LinkNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLinkNotFound);
  }
}

TEST_CASE("two-spine ECMP split is balanced") {
  ClosParams p;
  p.pods = 2;
  p.racks_per_pod = 1;
  p.hosts_per_rack = 1;
  p.fabric_per_pod = 1;
  p.spines_per_plane = 2;
  auto t = Topology::build_clos(p);
  std::map<NodeId, int> spine_count;
  for (std::uint64_t id = 0; id < 10000; ++id) {
    auto path = t.ecmp_route(0, 1, id);
    for (auto h : path.hops)
      if (t.kind(t.directed(h).dst) == NodeKind::kSpine) spine_count[t.directed(h).dst]++;
  }
  REQUIRE(spine_count.size() == 2);
  for (auto [s, c] : spine_count) CHECK(std::abs(c - 5000) <= 250);
}

TEST_CASE("failing one of two parallel fabric-spine links forces the survivor") {
  ClosParams p;
  p.pods = 2;
  p.racks_per_pod = 1;
  p.hosts_per_rack = 1;
  p.fabric_per_pod = 1;
  p.spines_per_plane = 2;
  auto t = Topology::build_clos(p);
  const NodeId fabric = 4, spine_a = 6, spine_b = 7;
  REQUIRE(t.kind(fabric) == NodeKind::kFabric);
  REQUIRE(t.kind(spine_a) == NodeKind::kSpine);
  auto cut = t.fail_link(fabric, spine_a);
  CHECK(cut.links().size() == t.links().size() - 1);
  for (std::uint64_t id = 0; id < 200; ++id) {
    auto path = cut.ecmp_route(0, 1, id);
    bool via_b = false;
    for (auto h : path.hops) {
      CHECK(cut.directed(h).dst != spine_a);
      via_b |= cut.directed(h).dst == spine_b;
    }
    CHECK(via_b);
  }
}

TEST_CASE("failing 1 of 4 spine links raises survivor load by 4/3") {
  ClosParams p;
  p.pods = 2;
  p.racks_per_pod = 1;
  p.hosts_per_rack = 1;
  p.fabric_per_pod = 1;
  p.spines_per_plane = 4;
  auto t = Topology::build_clos(p);
  const NodeId fabric0 = 4, spine0 = 6;
  auto cut = t.fail_link(fabric0, spine0);
  TrafficMatrix m{2, {0, 1, 0, 0}};
  auto sizes = SizeDistribution::constant(1000);
  auto before = expected_link_bits(t, m, sizes);
  auto after = expected_link_bits(cut, m, sizes);
  for (NodeId s = spine0 + 1; s < spine0 + 4; ++s) {
    const double b = before[t.directed_id(fabric0, s)];
    const double a = after[cut.directed_id(fabric0, s)];
    CHECK(a / b == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  }
  // Hashing over many flows agrees with the fractional split.
  std::map<NodeId, int> hits;
  for (std::uint64_t id = 0; id < 30000; ++id)
    for (auto h : cut.ecmp_route(0, 1, id).hops)
      if (cut.kind(cut.directed(h).dst) == NodeKind::kSpine) hits[cut.directed(h).dst]++;
  for (auto [s, c] : hits) CHECK(std::abs(c - 10000) <= 500);
}

TEST_CASE("routes are contiguous, deterministic and avoid failed links") {
  auto t = Topology::build_clos(small_params());
  auto cut = t.fail_link(t.hosts().size() + 0, t.hosts().size() + 4);  // ToR0 - first fabric
  std::mt19937_64 rng(5);
  const auto& hosts = t.hosts();
  for (int i = 0; i < 500; ++i) {
    NodeId s = hosts[rng() % hosts.size()], d = hosts[rng() % hosts.size()];
    if (s == d) continue;
    std::uint64_t id = rng();
    for (const Topology* topo : {&t, &cut}) {
      auto path = topo->ecmp_route(s, d, id);
      CHECK(path.src_host == s);
      CHECK(path.dst_host == d);
      CHECK(topo->directed(path.hops.front()).src == s);
      CHECK(topo->directed(path.hops.back()).dst == d);
      std::set<NodeId> seen{s};
      for (std::size_t h = 0; h + 1 < path.size(); ++h)
        CHECK(topo->directed(path.hops[h]).dst == topo->directed(path.hops[h + 1]).src);
      for (auto h : path.hops) CHECK(seen.insert(topo->directed(h).dst).second);
      auto again = topo->ecmp_route(s, d, id);
      CHECK(again.hops == path.hops);
    }
  }
}

TEST_CASE("ideal fct hand examples") {
  auto one = chain({10e9}, {1e-6});
  CHECK(one.ideal_fct(one.ecmp_route(0, 1, 0), 1250) == doctest::Approx(2.0e-6).epsilon(1e-12));
  auto two = chain({10e9, 10e9}, {1e-6, 1e-6});
  CHECK(two.ideal_fct(two.ecmp_route(0, 2, 0), 10000, 1000) == doctest::Approx(10.8e-6).epsilon(1e-12));
  auto bare = chain({10e9}, {0.0});
  CHECK(bare.ideal_fct(bare.ecmp_route(0, 1, 0), 1) == doctest::Approx(0.8e-9).epsilon(1e-12));
  CHECK(bare.ideal_fct_time(bare.ecmp_route(0, 1, 0), 1) == 800);
  CHECK_THROWS_AS(bare.ideal_fct(bare.ecmp_route(0, 1, 0), 0), Error);
}

TEST_CASE("ideal fct equals packet-level store-and-forward recurrence") {
  std::mt19937_64 rng(11);
  const double rates[] = {10e9, 25e9, 40e9, 100e9};
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t hops = 1 + rng() % 6;
    std::vector<double> bw, delay;
    for (std::size_t h = 0; h < hops; ++h) {
      bw.push_back(rates[rng() % 4]);
      delay.push_back(static_cast<double>(rng() % 3000) * 1e-9);
    }
    auto t = chain(bw, delay);
    auto path = t.ecmp_route(0, static_cast<NodeId>(hops), 0);
    std::uint64_t size = 1 + rng() % 50000;
    CHECK(t.ideal_fct(path, size, 1000) == doctest::Approx(brute_force_fct(bw, delay, size, 1000)).epsilon(1e-12));
  }
}

TEST_CASE("spec formula agrees whenever the last packet is full") {
  auto t = chain({10e9, 40e9, 10e9}, {1e-6, 2e-6, 1e-6});
  auto path = t.ecmp_route(0, 3, 0);
  for (std::uint64_t size : {1000ULL, 5000ULL, 64000ULL}) {
    const double mtu_bits = 8000.0;
    const double formula = 4e-6 + mtu_bits / 10e9 + mtu_bits / 40e9 + mtu_bits / 10e9 + (size - 1000) * 8.0 / 10e9;
    CHECK(t.ideal_fct(path, size, 1000) == doctest::Approx(formula).epsilon(1e-12));
  }
}

TEST_CASE("ideal fct is monotone in size and propagation delay") {
  auto t = Topology::build_clos(small_params());
  auto path = t.ecmp_route(0, 7, 3);
  double prev = 0;
  for (std::uint64_t s = 1; s < 20000; s += 37) {
    double v = t.ideal_fct(path, s);
    CHECK(v >= prev);
    prev = v;
  }
  auto slow = chain({10e9, 10e9}, {1e-6, 1.5e-6});
  auto fast = chain({10e9, 10e9}, {1e-6, 1e-6});
  CHECK(slow.ideal_fct(slow.ecmp_route(0, 2, 0), 3000) > fast.ideal_fct(fast.ecmp_route(0, 2, 0), 3000));
}

TEST_CASE("json round trip and validation") {
  auto t = Topology::build_clos(small_params());
  auto back = Topology::from_json(t.to_json());
  CHECK(back.num_nodes() == t.num_nodes());
  REQUIRE(back.links().size() == t.links().size());
  for (std::size_t i = 0; i < t.links().size(); ++i) {
    CHECK(back.links()[i].a == t.links()[i].a);
    CHECK(back.links()[i].bandwidth_bps == t.links()[i].bandwidth_bps);
  }
  CHECK_THROWS_AS(Topology::from_json("{\"nodes\":[{\"id\":1,\"kind\":\"host\"}],\"links\":[]}"), Error);
  CHECK_THROWS_AS(Topology::from_json("not json"), Error);
  CHECK_THROWS_AS(Topology({NodeKind::kHost, NodeKind::kHost}, {{0, 0, 1e9, 0}}), Error);
  CHECK_THROWS_AS(Topology({NodeKind::kHost, NodeKind::kHost}, {{0, 1, 0, 0}}), Error);
  CHECK_THROWS_AS(Topology({NodeKind::kHost, NodeKind::kHost}, {{0, 1, 1e9, 0}, {1, 0, 1e9, 0}}), Error);
}

TEST_CASE("oversubscription is derived from counts") {
  auto p = small_params();
  p.hosts_per_rack = 8;
  CHECK(p.oversubscription() == doctest::Approx(1.0));  // 8x10G down vs 2x40G up
  p.spines_per_plane = 1;
  CHECK(p.oversubscription() == doctest::Approx(2.0));
}
