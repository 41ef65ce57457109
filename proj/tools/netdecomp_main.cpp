#include <cstdio>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "netdecomp/netdecomp.h"

namespace {

int report(nd_status st) {
  if (st == ND_OK) return 0;
  std::fprintf(stderr, "error [%s]: %s\n", nd_status_name(st), nd_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-link decomposition estimator for data-center FCT slowdown"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nd_version());

  std::string config, out, estimate_dir, oracle_dir, bins = "1000,10000,100000", profile;
  nd_estimate_options opts;
  nd_estimate_defaults(&opts);
  unsigned workers = 0;
  bool no_cluster = false, dump_specs = false, dump_fcts = false, dump_clusters = false;
  long long seed = -1;

  auto* est = app.add_subcommand("estimate", "decompose, simulate links, and write slowdown estimates");
  est->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  est->add_option("--out", out, "output directory")->required();
  est->add_option("--workers", workers, "link simulation workers")->check(CLI::PositiveNumber);
  est->add_flag("--no-cluster", no_cluster, "simulate every loaded link");
  est->add_option("--seed", seed, "master seed")->check(CLI::NonNegativeNumber);
  est->add_flag("--dump-specs", dump_specs, "write per-link simulation specs to <out>/debug");
  est->add_flag("--dump-fcts", dump_fcts, "write per-link FCT records to <out>/debug");
  est->add_flag("--dump-clusters", dump_clusters, "write link,representative pairs to <out>/debug");

  auto* ora = app.add_subcommand("oracle", "full-network reference simulation");
  ora->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  ora->add_option("--out", out, "output directory")->required();

  std::string cmp_out;
  auto* cmp = app.add_subcommand("compare", "percentile error of an estimate against an oracle run");
  cmp->add_option("--estimate", estimate_dir, "estimate output directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--oracle", oracle_dir, "oracle output directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--bins", bins, "comma-separated size bin edges in bytes");
  cmp->add_option("--out", cmp_out, "write the error table here instead of stdout");

  auto* qry = app.add_subcommand("query", "answer the config's queries from a saved profile");
  qry->add_option("--profile", profile, "profile.json from an estimate run")->required()->check(CLI::ExistingFile);
  qry->add_option("--config", config, "run config (JSON) supplying workload and queries")
      ->required()
      ->check(CLI::ExistingFile);
  qry->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (*est) {
    opts.workers = workers;
    opts.no_cluster = no_cluster;
    if (seed >= 0) {
      opts.override_seed = 1;
      opts.seed = static_cast<uint64_t>(seed);
    }
    opts.dump_specs = dump_specs;
    opts.dump_fcts = dump_fcts;
    opts.dump_clusters = dump_clusters;
    return report(nd_run_estimate(config.c_str(), out.c_str(), &opts));
  }
  if (*ora) return report(nd_run_oracle(config.c_str(), out.c_str()));
  if (*qry) return report(nd_run_query(profile.c_str(), config.c_str(), out.c_str()));
  if (*cmp) {
    char* json = nullptr;
    if (int rc = report(nd_compare(estimate_dir.c_str(), oracle_dir.c_str(), bins.c_str(), &json))) return rc;
    if (cmp_out.empty()) {
      std::fputs(json, stdout);
    } else {
      std::ofstream f(cmp_out);
      f << json;
    }
    nd_string_free(json);
  }
  return 0;
}
