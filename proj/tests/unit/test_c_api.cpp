#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "netdecomp/netdecomp.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("nd_capi_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

const char* kConfig = R"({
  "topology": {"clos": {"pods": 1, "racks_per_pod": 2, "hosts_per_rack": 2, "fabric_per_pod": 2}},
  "workload": {"generate": [{"matrix": "uniform", "sizes": [[500, 0.5], [20000, 1.0]], "max_load": 0.3}]},
  "duration_s": 0.001,
  "seed": 5,
  "queries": [{"name": "all"}],
  "mode": "both"
})";

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(nd_status_name(ND_OK)) == "OK");
  CHECK(std::string(nd_status_name(ND_ERR_NO_ROUTE)) != "OK");
  CHECK(std::strlen(nd_version()) > 0);
}

TEST_CASE("topology handle lifecycle") {
  nd_clos_params p;
  nd_clos_defaults(&p);
  p.pods = 2;
  p.racks_per_pod = 16;
  p.hosts_per_rack = 8;
  nd_topology* t = nullptr;
  REQUIRE(nd_topology_build_clos(&p, &t) == ND_OK);
  CHECK(nd_topology_num_hosts(t) == 256);

  uint32_t hops[8];
  size_t len = 0;
  CHECK(nd_topology_route(t, 0, 1, 0, hops, 8, &len) == ND_OK);
  CHECK(len == 2);
  CHECK(nd_topology_route(t, 0, 0, 0, hops, 8, &len) == ND_ERR_SAME_ENDPOINT);
  CHECK(std::strlen(nd_last_error()) > 0);
  CHECK(nd_topology_route(t, 0, 255, 0, hops, 1, &len) == ND_OK);
  CHECK(len > 1);  // reports full length even when truncated

  double s = 0;
  CHECK(nd_topology_ideal_fct(t, 0, 1, 0, 1250, 1000, &s) == ND_OK);
  CHECK(s > 2e-6);
  CHECK(nd_topology_ideal_fct(t, 0, 1, 0, 0, 1000, &s) != ND_OK);

  char* js = nullptr;
  REQUIRE(nd_topology_to_json(t, &js) == ND_OK);
  CHECK(std::string(js).find("\"links\"") != std::string::npos);
  nd_string_free(js);

  nd_topology* cut = nullptr;
  CHECK(nd_topology_fail_link(t, 0, 1, &cut) == ND_ERR_LINK_NOT_FOUND);
  const uint32_t tor = 256;  // first ToR follows the hosts
  REQUIRE(nd_topology_fail_link(t, 0, tor, &cut) == ND_OK);
  CHECK(nd_topology_num_links(cut) + 1 == nd_topology_num_links(t));
  CHECK(nd_topology_route(cut, 0, 1, 0, hops, 8, &len) == ND_ERR_NO_ROUTE);
  nd_topology_free(cut);
  nd_topology_free(t);
  nd_topology_free(nullptr);

  CHECK(nd_topology_build_clos(nullptr, &t) == ND_ERR_INVALID_ARGUMENT);
  CHECK(nd_topology_load("/nonexistent/topo.json", &t) != ND_OK);
}

TEST_CASE("estimate, oracle, query and compare through the C API") {
  Scratch tmp;
  {
    std::ofstream(tmp.path("cfg.json")) << kConfig;
  }
  nd_estimate_options o;
  nd_estimate_defaults(&o);
  o.dump_clusters = 1;
  REQUIRE(nd_run_estimate(tmp.path("cfg.json").c_str(), tmp.path("est").c_str(), &o) == ND_OK);
  CHECK(fs::exists(tmp.dir / "est" / "all.csv"));
  CHECK(fs::exists(tmp.dir / "est" / "debug" / "clusters.csv"));
  REQUIRE(nd_run_oracle(tmp.path("cfg.json").c_str(), tmp.path("ora").c_str()) == ND_OK);
  REQUIRE(nd_run_query(tmp.path("est/profile.json").c_str(), tmp.path("cfg.json").c_str(), tmp.path("qry").c_str()) ==
          ND_OK);

  char* js = nullptr;
  REQUIRE(nd_compare(tmp.path("est").c_str(), tmp.path("ora").c_str(), "1000,10000", &js) == ND_OK);
  CHECK(std::string(js).find("\"error\"") != std::string::npos);
  nd_string_free(js);
  CHECK(nd_compare(tmp.path("est").c_str(), tmp.path("ora").c_str(), "10,5", &js) != ND_OK);

  nd_profile* prof = nullptr;
  REQUIRE(nd_profile_load(tmp.path("est/profile.json").c_str(), &prof) == ND_OK);
  CHECK(nd_profile_num_links(prof) > 0);
  CHECK(nd_profile_num_simulated(prof) <= nd_profile_num_links(prof));
  double est = 0, ideal = 0;
  CHECK(nd_profile_estimate(prof, 0, 3, 1, 5000, 9, &est, &ideal) == ND_OK);
  CHECK(est >= ideal);
  double est2 = 0;
  CHECK(nd_profile_estimate(prof, 0, 3, 1, 5000, 9, &est2, &ideal) == ND_OK);
  CHECK(est == est2);
  CHECK(nd_profile_estimate(prof, 0, 0, 1, 5000, 9, &est, &ideal) == ND_ERR_SAME_ENDPOINT);
  nd_profile_free(prof);

  CHECK(nd_run_estimate(tmp.path("missing.json").c_str(), tmp.path("x").c_str(), nullptr) != ND_OK);
  CHECK(nd_run_estimate(nullptr, tmp.path("x").c_str(), nullptr) == ND_ERR_INVALID_ARGUMENT);
}
