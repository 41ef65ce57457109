/* C interface to the netdecomp estimator. All functions returning nd_status
 * leave a message for nd_last_error() on failure (thread local). */
#ifndef NETDECOMP_H
#define NETDECOMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ND_API __declspec(dllexport)
#else
#define ND_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nd_status {
  ND_OK = 0,
  ND_ERR_INVALID_ARGUMENT = 1,
  ND_ERR_NO_ROUTE = 2,
  ND_ERR_SAME_ENDPOINT = 3,
  ND_ERR_LINK_NOT_FOUND = 4,
  ND_ERR_ZERO_DEMAND = 5,
  ND_ERR_SIM_DIVERGED = 6,
  ND_ERR_MISSING_REPRESENTATIVE = 7,
  ND_ERR_EMPTY_FILTER = 8,
  ND_ERR_SCHEMA_MISMATCH = 9,
  ND_ERR_IO = 10,
  ND_ERR_PARSE = 11,
  ND_ERR_INTERNAL = 99
} nd_status;

typedef struct nd_topology nd_topology;
typedef struct nd_profile nd_profile;

typedef struct nd_clos_params {
  uint32_t pods;
  uint32_t racks_per_pod;
  uint32_t hosts_per_rack;
  uint32_t fabric_per_pod;
  uint32_t spines_per_plane;
  double host_link_bw;
  double fabric_link_bw;
  double host_link_delay;
  double fabric_link_delay;
} nd_clos_params;

typedef struct nd_estimate_options {
  uint32_t workers;       /* 0 keeps the config value */
  int no_cluster;
  int override_seed;
  uint64_t seed;
  int dump_specs;
  int dump_fcts;
  int dump_clusters;
} nd_estimate_options;

ND_API const char* nd_last_error(void);
ND_API const char* nd_status_name(nd_status status);
ND_API const char* nd_version(void);
ND_API void nd_string_free(char* s);

ND_API void nd_clos_defaults(nd_clos_params* params);
ND_API nd_status nd_topology_build_clos(const nd_clos_params* params, nd_topology** out);
ND_API nd_status nd_topology_load(const char* path, nd_topology** out);
ND_API nd_status nd_topology_fail_link(const nd_topology* topo, uint32_t a, uint32_t b, nd_topology** out);
ND_API void nd_topology_free(nd_topology* topo);
ND_API size_t nd_topology_num_nodes(const nd_topology* topo);
ND_API size_t nd_topology_num_links(const nd_topology* topo);
ND_API size_t nd_topology_num_hosts(const nd_topology* topo);
/* Writes up to `cap` directed-link ids of the flow's route; *len gets the
 * full path length. */
ND_API nd_status nd_topology_route(const nd_topology* topo, uint32_t src, uint32_t dst, uint64_t flow_id,
                                   uint32_t* hops, size_t cap, size_t* len);
ND_API nd_status nd_topology_ideal_fct(const nd_topology* topo, uint32_t src, uint32_t dst, uint64_t flow_id,
                                       uint64_t size, uint64_t mtu, double* seconds);
ND_API nd_status nd_topology_to_json(const nd_topology* topo, char** json_out);

ND_API void nd_estimate_defaults(nd_estimate_options* opts);
ND_API nd_status nd_run_estimate(const char* config_path, const char* out_dir, const nd_estimate_options* opts);
ND_API nd_status nd_run_oracle(const char* config_path, const char* out_dir);
ND_API nd_status nd_run_query(const char* profile_path, const char* config_path, const char* out_dir);
/* `bins` is a comma-separated list of ascending size edges in bytes. */
ND_API nd_status nd_compare(const char* estimate_dir, const char* oracle_dir, const char* bins, char** json_out);

ND_API nd_status nd_profile_load(const char* path, nd_profile** out);
ND_API void nd_profile_free(nd_profile* profile);
ND_API size_t nd_profile_num_links(const nd_profile* profile);
ND_API size_t nd_profile_num_simulated(const nd_profile* profile);
/* One uniform per hop is drawn from `seed`. */
ND_API nd_status nd_profile_estimate(const nd_profile* profile, uint32_t src, uint32_t dst, uint64_t flow_id,
                                     uint64_t size, uint64_t seed, double* est_fct, double* ideal_fct);

#ifdef __cplusplus
}
#endif

#endif
