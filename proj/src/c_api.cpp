#include "netdecomp/netdecomp.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "netdecomp/aggregate.hpp"
#include "netdecomp/error.hpp"
#include "netdecomp/pipeline.hpp"
#include "netdecomp/rng.hpp"
#include "netdecomp/topology.hpp"

struct nd_topology {
  netdecomp::Topology topo;
};

struct nd_profile {
  netdecomp::NetworkProfile profile;
};

namespace {

thread_local std::string g_last_error;

nd_status to_status(netdecomp::ErrorCode c) {
  using netdecomp::ErrorCode;
  switch (c) {
    case ErrorCode::kInvalidArgument: return ND_ERR_INVALID_ARGUMENT;
    case ErrorCode::kNoRoute: return ND_ERR_NO_ROUTE;
    case ErrorCode::kSameEndpoint: return ND_ERR_SAME_ENDPOINT;
    case ErrorCode::kLinkNotFound: return ND_ERR_LINK_NOT_FOUND;
    case ErrorCode::kZeroDemand: return ND_ERR_ZERO_DEMAND;
    case ErrorCode::kSimDiverged: return ND_ERR_SIM_DIVERGED;
    case ErrorCode::kMissingRepresentative: return ND_ERR_MISSING_REPRESENTATIVE;
    case ErrorCode::kEmptyFilter: return ND_ERR_EMPTY_FILTER;
    case ErrorCode::kSchemaMismatch: return ND_ERR_SCHEMA_MISMATCH;
    case ErrorCode::kIo: return ND_ERR_IO;
    case ErrorCode::kParse: return ND_ERR_PARSE;
  }
  return ND_ERR_INTERNAL;
}

template <typename F>
nd_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ND_OK;
  } catch (const netdecomp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return ND_ERR_INTERNAL;
}

void check_ptr(const void* p, const char* what) {
  if (!p) netdecomp::fail(netdecomp::ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* nd_last_error(void) { return g_last_error.c_str(); }

const char* nd_status_name(nd_status status) {
  switch (status) {
    case ND_OK: return "OK";
    case ND_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case ND_ERR_NO_ROUTE: return "NoRoute";
    case ND_ERR_SAME_ENDPOINT: return "SameEndpoint";
    case ND_ERR_LINK_NOT_FOUND: return "LinkNotFound";
    case ND_ERR_ZERO_DEMAND: return "ZeroDemand";
    case ND_ERR_SIM_DIVERGED: return "SimDiverged";
    case ND_ERR_MISSING_REPRESENTATIVE: return "MissingRepresentative";
    case ND_ERR_EMPTY_FILTER: return "EmptyFilter";
    case ND_ERR_SCHEMA_MISMATCH: return "SchemaMismatch";
    case ND_ERR_IO: return "Io";
    case ND_ERR_PARSE: return "Parse";
    case ND_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* nd_version(void) { return "0.1.0"; }

void nd_string_free(char* s) { std::free(s); }

void nd_clos_defaults(nd_clos_params* p) {
  if (!p) return;
  netdecomp::ClosParams d;
  *p = {d.pods,         d.racks_per_pod,  d.hosts_per_rack,  d.fabric_per_pod,   d.spines_per_plane,
        d.host_link_bw, d.fabric_link_bw, d.host_link_delay, d.fabric_link_delay};
}

nd_status nd_topology_build_clos(const nd_clos_params* p, nd_topology** out) {
  return guarded([&] {
    check_ptr(p, "params");
    check_ptr(out, "out");
    netdecomp::ClosParams c{p->pods,         p->racks_per_pod,  p->hosts_per_rack,  p->fabric_per_pod,
                            p->spines_per_plane, p->host_link_bw, p->fabric_link_bw, p->host_link_delay,
                            p->fabric_link_delay};
    *out = new nd_topology{netdecomp::Topology::build_clos(c)};
  });
}

nd_status nd_topology_load(const char* path, nd_topology** out) {
  return guarded([&] {
    check_ptr(path, "path");
    check_ptr(out, "out");
    *out = new nd_topology{netdecomp::Topology::load(path)};
  });
}

nd_status nd_topology_fail_link(const nd_topology* topo, uint32_t a, uint32_t b, nd_topology** out) {
  return guarded([&] {
    check_ptr(topo, "topology");
    check_ptr(out, "out");
    *out = new nd_topology{topo->topo.fail_link(a, b)};
  });
}

void nd_topology_free(nd_topology* topo) { delete topo; }

size_t nd_topology_num_nodes(const nd_topology* topo) { return topo ? topo->topo.num_nodes() : 0; }
size_t nd_topology_num_links(const nd_topology* topo) { return topo ? topo->topo.links().size() : 0; }
size_t nd_topology_num_hosts(const nd_topology* topo) { return topo ? topo->topo.hosts().size() : 0; }

nd_status nd_topology_route(const nd_topology* topo, uint32_t src, uint32_t dst, uint64_t flow_id, uint32_t* hops,
                            size_t cap, size_t* len) {
  return guarded([&] {
    check_ptr(topo, "topology");
    check_ptr(len, "len");
    auto path = topo->topo.ecmp_route(src, dst, flow_id);
    *len = path.size();
    if (cap > 0) check_ptr(hops, "hops");
    for (size_t i = 0; i < path.size() && i < cap; ++i) hops[i] = path.hops[i];
  });
}

nd_status nd_topology_ideal_fct(const nd_topology* topo, uint32_t src, uint32_t dst, uint64_t flow_id, uint64_t size,
                                uint64_t mtu, double* seconds) {
  return guarded([&] {
    check_ptr(topo, "topology");
    check_ptr(seconds, "seconds");
    netdecomp::require(mtu >= 1, "mtu must be >= 1");
    *seconds = topo->topo.ideal_fct(topo->topo.ecmp_route(src, dst, flow_id), size, mtu);
  });
}

nd_status nd_topology_to_json(const nd_topology* topo, char** json_out) {
  return guarded([&] {
    check_ptr(topo, "topology");
    check_ptr(json_out, "json_out");
    *json_out = dup_string(topo->topo.to_json());
  });
}

void nd_estimate_defaults(nd_estimate_options* o) {
  if (o) *o = {0, 0, 0, 0, 0, 0, 0};
}

nd_status nd_run_estimate(const char* config_path, const char* out_dir, const nd_estimate_options* opts) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(out_dir, "out_dir");
    auto cfg = netdecomp::RunConfig::load(config_path);
    netdecomp::RunOutputOptions out;
    if (opts) {
      if (opts->workers > 0) cfg.workers = opts->workers;
      if (opts->no_cluster) cfg.clustering = false;
      if (opts->override_seed) cfg.seed = opts->seed;
      out = {opts->dump_specs != 0, opts->dump_fcts != 0, opts->dump_clusters != 0};
    }
    netdecomp::run_estimate(cfg, out_dir, out);
  });
}

nd_status nd_run_oracle(const char* config_path, const char* out_dir) {
  return guarded([&] {
    check_ptr(config_path, "config_path");
    check_ptr(out_dir, "out_dir");
    netdecomp::run_oracle(netdecomp::RunConfig::load(config_path), out_dir);
  });
}

nd_status nd_run_query(const char* profile_path, const char* config_path, const char* out_dir) {
  return guarded([&] {
    check_ptr(profile_path, "profile_path");
    check_ptr(config_path, "config_path");
    check_ptr(out_dir, "out_dir");
    netdecomp::run_query(profile_path, netdecomp::RunConfig::load(config_path), out_dir);
  });
}

nd_status nd_compare(const char* estimate_dir, const char* oracle_dir, const char* bins, char** json_out) {
  return guarded([&] {
    check_ptr(estimate_dir, "estimate_dir");
    check_ptr(oracle_dir, "oracle_dir");
    check_ptr(json_out, "json_out");
    auto edges = bins ? netdecomp::parse_bins(bins) : std::vector<std::uint64_t>{1000, 10000, 100000};
    *json_out = dup_string(netdecomp::compare_reports(estimate_dir, oracle_dir, edges));
  });
}

nd_status nd_profile_load(const char* path, nd_profile** out) {
  return guarded([&] {
    check_ptr(path, "path");
    check_ptr(out, "out");
    *out = new nd_profile{netdecomp::NetworkProfile::load(path)};
  });
}

void nd_profile_free(nd_profile* profile) { delete profile; }

size_t nd_profile_num_links(const nd_profile* p) { return p ? p->profile.size() : 0; }
size_t nd_profile_num_simulated(const nd_profile* p) { return p ? p->profile.simulated_count() : 0; }

nd_status nd_profile_estimate(const nd_profile* p, uint32_t src, uint32_t dst, uint64_t flow_id, uint64_t size,
                              uint64_t seed, double* est_fct, double* ideal_fct) {
  return guarded([&] {
    check_ptr(p, "profile");
    check_ptr(est_fct, "est_fct");
    check_ptr(ideal_fct, "ideal_fct");
    netdecomp::Flow flow{flow_id, src, dst, size, 0, 0};
    auto path = p->profile.topology().ecmp_route(src, dst, flow_id);
    netdecomp::Rng rng(netdecomp::mix_seed(seed, flow_id));
    std::vector<double> u(path.size());
    for (auto& x : u) x = netdecomp::uniform01(rng);
    auto pe = netdecomp::estimate_flow(p->profile, flow, path, u);
    *est_fct = pe.estimated_fct;
    *ideal_fct = pe.ideal_fct;
  });
}

}  // extern "C"
