#include "netdecomp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <set>
#include <thread>

#include "json.hpp"
#include "netdecomp/error.hpp"
#include "netdecomp/rng.hpp"
#include "text_io.hpp"

namespace netdecomp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class PhaseClock {
 public:
  explicit PhaseClock(RunReport& report) : report_(report), start_(Clock::now()), mark_(start_) {}
  void lap(const std::string& name) {
    auto now = Clock::now();
    report_.phases.push_back({name, std::chrono::duration<double>(now - mark_).count()});
    mark_ = now;
  }
  void finish() { report_.total_s = std::chrono::duration<double>(mark_ - start_).count(); }
  // Folds phases reported by a nested run into this clock's timeline.
  void absorb(const std::vector<PhaseTime>& phases) {
    double covered = 0;
    for (const auto& p : phases) {
      report_.phases.push_back(p);
      covered += p.seconds;
    }
    auto now = Clock::now();
    double gap = std::chrono::duration<double>(now - mark_).count() - covered;
    if (!report_.phases.empty() && gap > 0) report_.phases.back().seconds += gap;
    mark_ = now;
  }

 private:
  RunReport& report_;
  Clock::time_point start_;
  Clock::time_point mark_;
};

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(base) / path).lexically_normal().string();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

ClosParams parse_clos(const json& j) {
  ClosParams c;
  c.pods = get_or(j, "pods", c.pods);
  c.racks_per_pod = get_or(j, "racks_per_pod", c.racks_per_pod);
  c.hosts_per_rack = get_or(j, "hosts_per_rack", c.hosts_per_rack);
  c.fabric_per_pod = get_or(j, "fabric_per_pod", c.fabric_per_pod);
  c.spines_per_plane = get_or(j, "spines_per_plane", c.spines_per_plane);
  c.host_link_bw = get_or(j, "host_link_bw", c.host_link_bw);
  c.fabric_link_bw = get_or(j, "fabric_link_bw", c.fabric_link_bw);
  c.host_link_delay = get_or(j, "host_link_delay", c.host_link_delay);
  c.fabric_link_delay = get_or(j, "fabric_link_delay", c.fabric_link_delay);
  return c;
}

DctcpParams parse_dctcp(const json& j, std::uint64_t mtu) {
  DctcpParams d;
  d.mtu = mtu;
  d.ecn_threshold_k = get_or(j, "ecn_threshold_k", d.ecn_threshold_k);
  d.gain_g = get_or(j, "gain_g", d.gain_g);
  d.init_window = get_or(j, "init_window", d.init_window);
  d.min_window = get_or(j, "min_window", d.min_window);
  d.additive_increase = get_or(j, "additive_increase", d.additive_increase);
  d.init_alpha = get_or(j, "init_alpha", d.init_alpha);
  d.max_pending = get_or(j, "max_pending", d.max_pending);
  d.host_round_robin = get_or(j, "host_round_robin", d.host_round_robin);
  return d;
}

ArrivalKind parse_arrival(const std::string& s) {
  if (s == "lognormal" || s == "log_normal") return ArrivalKind::kLogNormal;
  if (s == "poisson") return ArrivalKind::kPoisson;
  fail(ErrorCode::kInvalidArgument, "unknown arrival process '" + s + "'");
}

GenerateSpec parse_generate(const json& j, const std::string& base) {
  GenerateSpec g;
  auto& w = g.spec;
  const json& m = j.at("matrix");
  if (m.is_string() && m.get<std::string>() == "uniform") {
    g.uniform_matrix = true;
  } else if (m.is_string()) {
    w.matrix = TrafficMatrix::load_csv(resolve(base, m.get<std::string>()));
  } else {
    auto rows = m.get<std::vector<std::vector<double>>>();
    w.matrix.racks = rows.size();
    for (const auto& r : rows) {
      require(r.size() == rows.size(), "matrix must be square");
      w.matrix.weights.insert(w.matrix.weights.end(), r.begin(), r.end());
    }
  }
  const json& s = j.at("sizes");
  if (s.is_string()) {
    w.sizes = SizeDistribution::load_csv(resolve(base, s.get<std::string>()));
  } else if (s.is_object()) {
    w.sizes = SizeDistribution::constant(s.at("constant").get<std::uint64_t>());
  } else {
    for (const auto& pt : s) w.sizes.points.emplace_back(pt.at(0).get<std::uint64_t>(), pt.at(1).get<double>());
  }
  w.arrival = parse_arrival(get_or<std::string>(j, "arrival", "lognormal"));
  w.sigma = get_or(j, "sigma", w.sigma);
  w.max_load = get_or(j, "max_load", w.max_load);
  w.tag = get_or(j, "tag", w.tag);
  if (j.contains("seed")) {
    w.seed = j.at("seed").get<std::uint64_t>();
    g.seed_given = true;
  }
  return g;
}

QuerySpec parse_query(const json& j) {
  QuerySpec q;
  auto& f = q.filter;
  f.name = get_or<std::string>(j, "name", "all");
  if (j.contains("flow_ids")) f.flow_ids = j.at("flow_ids").get<std::set<std::uint64_t>>();
  if (j.contains("srcs")) f.srcs = j.at("srcs").get<std::set<NodeId>>();
  if (j.contains("dsts")) f.dsts = j.at("dsts").get<std::set<NodeId>>();
  if (j.contains("tags")) f.tags = j.at("tags").get<std::set<std::uint32_t>>();
  f.min_size = get_or(j, "min_size", f.min_size);
  f.max_size = get_or(j, "max_size", f.max_size);
  auto mode = get_or<std::string>(j, "mode", "per_flow");
  if (mode == "per_flow")
    q.mode = QueryMode::kPerFlow;
  else if (mode == "distribution")
    q.mode = QueryMode::kDistribution;
  else
    fail(ErrorCode::kInvalidArgument, "unknown query mode '" + mode + "'");
  q.n_samples = get_or(j, "n_samples", q.n_samples);
  return q;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string percentile_key(double q) { return "p" + fmt("%g", q); }

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "query" : out;
}

constexpr const char* kFlowCsvHeader = "flow_id,size,src,dst,ideal_ns,est_fct_ns,slowdown";

struct Row {
  const Flow* flow;
  double ideal_s;
  double fct_s;
  double slowdown;
};

std::string rows_to_csv(const std::vector<Row>& rows) {
  std::string out = std::string(kFlowCsvHeader) + "\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%llu,%u,%u,%.3f,%.3f,%.12g\n",
                  static_cast<unsigned long long>(r.flow->id), static_cast<unsigned long long>(r.flow->size),
                  r.flow->src, r.flow->dst, r.ideal_s * 1e9, r.fct_s * 1e9, r.slowdown);
    out += buf;
  }
  return out;
}

json bins_json(const std::vector<BinSummary>& bins) {
  json j = json::object();
  for (const auto& b : bins) {
    json jb{{"count", b.count}};
    for (const auto& [q, v] : b.percentiles) jb[percentile_key(q)] = v;
    j[b.label] = std::move(jb);
  }
  return j;
}

// Writes one CSV per query plus summary.json; returns the CSV paths.
std::vector<std::string> write_query_outputs(const std::string& out_dir, const RunConfig& config,
                                             const std::vector<QuerySpec>& queries,
                                             const std::vector<std::vector<Row>>& per_query,
                                             const std::vector<std::string>& descriptions) {
  json summary{{"percentiles", config.percentiles}, {"size_bins", config.size_bins}, {"queries", json::object()}};
  std::vector<std::string> paths;
  std::set<std::string> used;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& name = queries[qi].filter.name;
    require(used.insert(name).second, "duplicate query name '" + name + "'");
    auto path = (fs::path(out_dir) / (safe_name(name) + ".csv")).string();
    detail::write_file(path, rows_to_csv(per_query[qi]));
    paths.push_back(path);
    std::vector<std::pair<std::uint64_t, double>> pts;
    for (const auto& r : per_query[qi]) pts.emplace_back(r.flow->size, r.slowdown);
    summary["queries"][name] = {{"filter", descriptions[qi]},
                                {"file", safe_name(name) + ".csv"},
                                {"count", pts.size()},
                                {"bins", bins_json(summarize(pts, config.size_bins, config.percentiles))}};
  }
  detail::write_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n");
  return paths;
}

std::vector<QuerySpec> effective_queries(const RunConfig& config) {
  auto qs = config.queries;
  if (qs.empty()) qs.emplace_back();
  for (auto& q : qs) q.percentiles = config.percentiles;
  return qs;
}

std::uint64_t query_seed(std::uint64_t master, std::size_t qi) { return mix_seed(mix_seed(master, 0x71756572ULL), qi); }

// Estimate rows for every query against a profile.
void answer_queries(const NetworkProfile& profile, const std::vector<Flow>& flows, const RunConfig& config,
                    const std::vector<QuerySpec>& queries, std::vector<std::vector<Row>>& rows,
                    std::vector<std::string>& descriptions, std::vector<QueryResult>& results) {
  results.reserve(queries.size());
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    descriptions.push_back(queries[qi].filter.describe());
    if (flows.empty()) {
      results.emplace_back();
      rows.emplace_back();
      continue;
    }
    results.push_back(query(profile, flows, queries[qi], query_seed(config.seed, qi)));
  }
  for (std::size_t qi = 0; qi < results.size(); ++qi) {
    if (flows.empty()) continue;
    std::vector<Row> r;
    for (const auto& e : results[qi].estimates)
      r.push_back({&e.flow, e.estimate.ideal_fct, e.estimate.estimated_fct, e.estimate.slowdown});
    rows.push_back(std::move(r));
  }
}

}  // namespace

void RunConfig::validate() const {
  require(clos.has_value() != topology.has_value(), "config: exactly one topology source required");
  if (clos) clos->validate();
  require(flows_csv.empty() != generate.empty(), "config: exactly one workload source required");
  if (!generate.empty()) require(duration_s > 0, "config: duration_s must be positive for generated workloads");
  require(duration_s >= 0, "config: duration_s must be >= 0");
  require(mtu >= 1, "config: mtu must be >= 1");
  dctcp.validate();
  thresholds.validate();
  require(bucket_min_count >= 1 && bucket_size_ratio >= 1, "config: bucketing needs B >= 1 and x >= 1");
  require(workers >= 1, "config: workers must be >= 1");
  require(!percentiles.empty(), "config: at least one percentile required");
  for (double q : percentiles) require(q > 0 && q <= 100, "config: percentiles must be in (0,100]");
  require(std::is_sorted(size_bins.begin(), size_bins.end()) &&
              std::adjacent_find(size_bins.begin(), size_bins.end()) == size_bins.end(),
          "config: size bins must be strictly ascending");
}

RunConfig RunConfig::from_json(const std::string& text, const std::string& base_dir) {
  RunConfig c;
  try {
    json j = json::parse(text);
    const json& t = j.at("topology");
    if (t.contains("clos"))
      c.clos = parse_clos(t.at("clos"));
    else if (t.contains("file"))
      c.topology = Topology::load(resolve(base_dir, t.at("file").get<std::string>()));
    else
      c.topology = Topology::from_json(t.dump());
    if (j.contains("failed_links"))
      for (const auto& fl : j.at("failed_links")) c.failed_links.emplace_back(fl.at(0).get<NodeId>(), fl.at(1).get<NodeId>());

    const json& w = j.at("workload");
    if (w.contains("flows_csv")) c.flows_csv = resolve(base_dir, w.at("flows_csv").get<std::string>());
    if (w.contains("generate"))
      for (const auto& g : w.at("generate")) c.generate.push_back(parse_generate(g, base_dir));

    c.duration_s = get_or(j, "duration_s", c.duration_s);
    c.mtu = get_or(j, "mtu", c.mtu);
    c.ack_size = get_or(j, "ack_size", c.ack_size);
    c.dctcp = parse_dctcp(j.value("dctcp", json::object()), c.mtu);
    if (j.contains("clustering")) {
      const json& cl = j.at("clustering");
      c.clustering = get_or(cl, "enabled", c.clustering);
      c.thresholds.eps_load = get_or(cl, "eps_load", c.thresholds.eps_load);
      c.thresholds.wmape_size_max = get_or(cl, "wmape_size_max", c.thresholds.wmape_size_max);
      c.thresholds.wmape_ia_max = get_or(cl, "wmape_ia_max", c.thresholds.wmape_ia_max);
    }
    if (j.contains("bucketing")) {
      c.bucket_min_count = get_or(j.at("bucketing"), "min_count", c.bucket_min_count);
      c.bucket_size_ratio = get_or(j.at("bucketing"), "size_ratio", c.bucket_size_ratio);
    }
    c.workers = get_or(j, "workers", c.workers);
    c.seed = get_or(j, "seed", c.seed);
    if (j.contains("queries"))
      for (const auto& q : j.at("queries")) c.queries.push_back(parse_query(q));
    c.percentiles = get_or(j, "percentiles", c.percentiles);
    c.size_bins = get_or(j, "size_bins", c.size_bins);
    auto mode = get_or<std::string>(j, "mode", "estimate");
    if (mode == "estimate")
      c.mode = RunMode::kEstimate;
    else if (mode == "oracle")
      c.mode = RunMode::kOracle;
    else if (mode == "both")
      c.mode = RunMode::kBoth;
    else
      fail(ErrorCode::kInvalidArgument, "config: unknown mode '" + mode + "'");
    c.oracle_max_nodes = get_or(j, "oracle_max_nodes", c.oracle_max_nodes);
    c.oracle_ack_load = get_or(j, "oracle_ack_load", c.oracle_ack_load);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("config json: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  auto base = fs::path(path).parent_path().string();
  return from_json(detail::read_file(path), base.empty() ? "." : base);
}

Scenario materialize(const RunConfig& config) {
  config.validate();
  Topology topo = config.clos ? Topology::build_clos(*config.clos) : *config.topology;
  for (auto [a, b] : config.failed_links) topo = topo.fail_link(a, b);

  Scenario sc{topo, {}, config.duration_s};
  if (!config.flows_csv.empty()) {
    sc.flows = load_flows_csv(config.flows_csv);
    for (const auto& f : sc.flows) {
      require(f.src < topo.num_nodes() && f.dst < topo.num_nodes() && topo.kind(f.src) == NodeKind::kHost &&
                  topo.kind(f.dst) == NodeKind::kHost,
              "flow " + std::to_string(f.id) + ": endpoints must be hosts");
    }
    if (sc.duration_s <= 0) {
      Time last = 0;
      for (const auto& f : sc.flows) last = std::max(last, f.start);
      sc.duration_s = std::max(time_to_seconds(last), 1e-9);
    }
    return sc;
  }
  std::vector<std::vector<Flow>> parts;
  for (std::size_t i = 0; i < config.generate.size(); ++i) {
    WorkloadSpec w = config.generate[i].spec;
    if (config.generate[i].uniform_matrix) w.matrix = TrafficMatrix::uniform(topo.racks().size());
    if (!config.generate[i].seed_given) w.seed = mix_seed(config.seed, i + 1);
    w.duration_s = config.duration_s;
    parts.push_back(generate_flows(w, topo));
  }
  sc.flows = parts.size() == 1 ? std::move(parts[0]) : merge_workloads(parts);
  return sc;
}

EstimateOptions EstimateOptions::from_config(const RunConfig& c) {
  EstimateOptions o;
  o.mtu = c.mtu;
  o.ack_size = c.ack_size;
  o.dctcp = c.dctcp;
  o.clustering = c.clustering;
  o.thresholds = c.thresholds;
  o.bucket_min_count = c.bucket_min_count;
  o.bucket_size_ratio = c.bucket_size_ratio;
  o.workers = c.workers;
  o.seed = c.seed;
  return o;
}

std::string RunReport::to_json() const {
  json j;
  auto& ph = j["phases"] = json::array();
  for (const auto& p : phases) ph.push_back({{"name", p.name}, {"seconds", p.seconds}});
  j["total_s"] = total_s;
  j["num_flows"] = num_flows;
  j["links_total"] = links_total;
  j["links_simulated"] = links_simulated;
  j["pruning_ratio"] = pruning_ratio;
  j["longest_sim_s"] = longest_sim_s;
  j["longest_sim_link"] = longest_sim_link;
  j["query_outputs"] = query_outputs;
  return j.dump(2) + "\n";
}

EstimateResult build_estimate(const Scenario& sc, const EstimateOptions& opt) {
  require(opt.workers >= 1, "estimate: workers must be >= 1");
  require(opt.dctcp.mtu == opt.mtu, "estimate: dctcp mtu must match");
  const Topology& topo = sc.topology;
  RunReport report;
  PhaseClock clock(report);

  RoutedWorkload routed = route_flows(topo, sc.flows);
  std::vector<LinkWorkload> per_link = assign_flows(topo, routed);
  std::vector<DirLinkId> active;
  for (DirLinkId id = 0; id < per_link.size(); ++id)
    if (!per_link[id].flows.empty()) active.push_back(id);
  clock.lap("decompose");

  std::vector<Cluster> clusters;
  if (opt.clustering) {
    std::vector<LinkFeature> features;
    features.reserve(active.size());
    for (DirLinkId id : active) features.push_back(extract_feature(routed, per_link[id], topo.bandwidth(id), sc.duration_s));
    clusters = greedy_cluster(features, opt.thresholds);
    for (auto& c : clusters) {
      c.representative = active[c.representative];
      for (auto& m : c.members) m = active[m];
    }
  } else {
    for (DirLinkId id : active) clusters.push_back({id, {id}});
  }
  clock.lap("cluster");

  // Largest jobs first keeps the pool busy toward the end.
  std::vector<DirLinkId> reps;
  for (const auto& c : clusters) reps.push_back(c.representative);
  std::stable_sort(reps.begin(), reps.end(),
                   [&](DirLinkId a, DirLinkId b) { return per_link[a].flows.size() > per_link[b].flows.size(); });

  DecomposeOptions dopt;
  dopt.mtu = opt.mtu;
  dopt.ack_size = opt.ack_size;
  std::vector<BucketedDist> dists(reps.size());
  std::vector<double> secs(reps.size(), 0.0);
  std::vector<std::exception_ptr> errors(reps.size());
  std::vector<LinkSimSpec> kept_specs(opt.keep_debug ? reps.size() : 0);
  std::vector<std::vector<FctRecord>> kept_records(opt.keep_debug ? reps.size() : 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < reps.size();) {
      auto t0 = Clock::now();
      DirLinkId id = reps[i];
      try {
        LinkSimSpec spec =
            build_link_sim(topo, id, routed, per_link[id], per_link[topo.reverse(id)], sc.duration_s, dopt);
        auto records = simulate_link(spec, opt.dctcp, mix_seed(opt.seed, id));
        dists[i] = bucket_samples(delay_samples(records, opt.mtu), opt.bucket_min_count, opt.bucket_size_ratio);
        if (opt.keep_debug) {
          kept_specs[i] = std::move(spec);
          kept_records[i] = std::move(records);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
      secs[i] = since(t0);
    }
  };
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(opt.workers, reps.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // Report the failing link with the smallest id so the error is schedule independent.
  std::optional<std::size_t> first_err;
  for (std::size_t i = 0; i < reps.size(); ++i)
    if (errors[i] && (!first_err || reps[i] < reps[*first_err])) first_err = i;
  if (first_err) {
    try {
      std::rethrow_exception(errors[*first_err]);
    } catch (const Error& e) {
      fail(e.code(), "link " + std::to_string(reps[*first_err]) + ": " + e.what());
    }
  }
  clock.lap("simulate");

  std::map<DirLinkId, BucketedDist> simulated;
  for (std::size_t i = 0; i < reps.size(); ++i) simulated.emplace(reps[i], std::move(dists[i]));
  NetworkProfile profile = build_profile(topo, clusters, simulated, opt.mtu);
  clock.lap("profile");
  clock.finish();

  report.num_flows = sc.flows.size();
  report.links_total = active.size();
  report.links_simulated = reps.size();
  report.pruning_ratio = active.empty() ? 0.0 : 1.0 - static_cast<double>(reps.size()) / active.size();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (secs[i] > report.longest_sim_s || (secs[i] == report.longest_sim_s && reps[i] < report.longest_sim_link)) {
      report.longest_sim_s = secs[i];
      report.longest_sim_link = reps[i];
    }
  }
  EstimateResult result{std::move(profile), std::move(clusters), std::move(report), {}, {}};
  if (opt.keep_debug) {
    for (std::size_t i = 0; i < reps.size(); ++i) {
      result.specs.emplace(reps[i], std::move(kept_specs[i]));
      result.records.emplace(reps[i], std::move(kept_records[i]));
    }
  }
  return result;
}

std::size_t bin_index(const std::vector<std::uint64_t>& edges, std::uint64_t size) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), size) - edges.begin());
}

std::string bin_label(const std::vector<std::uint64_t>& edges, std::size_t bin) {
  std::string lo = bin == 0 ? "0" : std::to_string(edges[bin - 1]);
  std::string hi = bin < edges.size() ? std::to_string(edges[bin]) : "inf";
  return lo + "-" + hi;
}

std::vector<std::uint64_t> parse_bins(const std::string& spec) {
  std::vector<std::uint64_t> edges;
  for (auto part : detail::split(spec, ',')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    edges.push_back(detail::field_u64(part, "size bin edge"));
  }
  require(std::is_sorted(edges.begin(), edges.end()) &&
              std::adjacent_find(edges.begin(), edges.end()) == edges.end(),
          "size bins must be strictly ascending");
  return edges;
}

std::vector<BinSummary> summarize(const std::vector<std::pair<std::uint64_t, double>>& size_slowdown,
                                  const std::vector<std::uint64_t>& edges, const std::vector<double>& percentiles) {
  std::vector<std::vector<double>> per_bin(edges.size() + 1);
  std::vector<double> all;
  for (auto [size, sd] : size_slowdown) {
    per_bin[bin_index(edges, size)].push_back(sd);
    all.push_back(sd);
  }
  std::vector<BinSummary> out;
  auto add = [&](std::string label, std::vector<double>& v) {
    BinSummary b{std::move(label), v.size(), {}};
    if (!v.empty()) b.percentiles = percentiles_of(std::move(v), percentiles);
    out.push_back(std::move(b));
  };
  add("all", all);
  for (std::size_t i = 0; i < per_bin.size(); ++i) add(bin_label(edges, i), per_bin[i]);
  return out;
}

RunReport run_estimate(const RunConfig& config, const std::string& out_dir, const RunOutputOptions& out) {
  RunReport report;
  PhaseClock clock(report);
  fs::create_directories(out_dir);
  Scenario sc = materialize(config);
  clock.lap("setup");

  EstimateOptions opt = EstimateOptions::from_config(config);
  opt.keep_debug = out.dump_specs || out.dump_fcts;
  EstimateResult est = build_estimate(sc, opt);
  clock.absorb(est.report.phases);

  auto queries = effective_queries(config);
  std::vector<std::vector<Row>> rows;
  std::vector<std::string> descriptions;
  std::vector<QueryResult> results;
  answer_queries(est.profile, sc.flows, config, queries, rows, descriptions, results);
  clock.lap("query");

  report.query_outputs = write_query_outputs(out_dir, config, queries, rows, descriptions);
  est.profile.save((fs::path(out_dir) / "profile.json").string());
  if (out.dump_specs || out.dump_fcts || out.dump_clusters) {
    auto dbg = fs::path(out_dir) / "debug";
    fs::create_directories(dbg);
    if (out.dump_specs)
      for (const auto& [id, spec] : est.specs)
        detail::write_file((dbg / ("spec_" + std::to_string(id) + ".json")).string(), spec.to_json());
    if (out.dump_fcts) {
      for (const auto& [id, recs] : est.records) {
        std::string csv = "flow_id,size,fct_ns,ideal_ns\n";
        char buf[160];
        for (const auto& r : recs) {
          std::snprintf(buf, sizeof buf, "%llu,%llu,%.3f,%.3f\n", static_cast<unsigned long long>(r.flow_id),
                        static_cast<unsigned long long>(r.size), time_to_nanos(r.fct), time_to_nanos(r.ideal));
          csv += buf;
        }
        detail::write_file((dbg / ("fct_" + std::to_string(id) + ".csv")).string(), csv);
      }
    }
    if (out.dump_clusters) {
      std::vector<std::pair<DirLinkId, DirLinkId>> pairs;
      for (const auto& c : est.clusters)
        for (DirLinkId m : c.members) pairs.emplace_back(m, c.representative);
      std::sort(pairs.begin(), pairs.end());
      std::string csv = "link_id,representative_id\n";
      for (auto [m, r] : pairs) csv += std::to_string(m) + "," + std::to_string(r) + "\n";
      detail::write_file((dbg / "clusters.csv").string(), csv);
    }
  }
  clock.lap("output");
  clock.finish();

  report.num_flows = est.report.num_flows;
  report.links_total = est.report.links_total;
  report.links_simulated = est.report.links_simulated;
  report.pruning_ratio = est.report.pruning_ratio;
  report.longest_sim_s = est.report.longest_sim_s;
  report.longest_sim_link = est.report.longest_sim_link;
  detail::write_file((fs::path(out_dir) / "report.json").string(), report.to_json());
  return report;
}

std::vector<FctRecord> oracle_records(const Scenario& sc, const DctcpParams& params, std::uint64_t ack_size,
                                      std::uint64_t seed) {
  if (sc.flows.empty()) return {};
  const Topology& topo = sc.topology;
  RoutedWorkload routed = route_flows(topo, sc.flows);
  SimNetwork net = to_sim_network(topo, routed);
  if (ack_size > 0) {
    auto per_link = assign_flows(topo, routed);
    for (DirLinkId id = 0; id < net.link_bandwidth.size(); ++id) {
      const auto& rev = per_link[topo.reverse(id)].flows;
      if (rev.empty()) continue;
      std::vector<std::uint64_t> sizes;
      for (auto fi : rev) sizes.push_back(routed.flows[fi].size);
      net.link_bandwidth[id] =
          ack_corrected_bandwidth(net.link_bandwidth[id], sizes, sc.duration_s, params.mtu, ack_size).bandwidth_bps;
    }
  }
  auto records = run_dctcp(net, params, seed);
  for (std::size_t i = 0; i < records.size(); ++i)
    records[i].ideal = topo.ideal_fct_time(routed.paths[i], routed.flows[i].size, params.mtu);
  return records;
}

RunReport run_oracle(const RunConfig& config, const std::string& out_dir) {
  RunReport report;
  PhaseClock clock(report);
  fs::create_directories(out_dir);
  Scenario sc = materialize(config);
  if (sc.topology.num_nodes() > config.oracle_max_nodes)
    fail(ErrorCode::kInvalidArgument, "oracle: topology has " + std::to_string(sc.topology.num_nodes()) +
                                          " nodes, above oracle_max_nodes=" + std::to_string(config.oracle_max_nodes));
  clock.lap("setup");

  auto records = oracle_records(sc, config.dctcp, config.oracle_ack_load ? config.ack_size : 0, config.seed);
  clock.lap("simulate");

  auto queries = effective_queries(config);
  std::vector<std::vector<Row>> rows(queries.size());
  std::vector<std::string> descriptions;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    descriptions.push_back(queries[qi].filter.describe());
    for (std::size_t i = 0; i < sc.flows.size(); ++i) {
      if (!queries[qi].filter.matches(sc.flows[i])) continue;
      const auto& r = records[i];
      rows[qi].push_back({&sc.flows[i], time_to_seconds(r.ideal), time_to_seconds(r.fct),
                          static_cast<double>(r.fct) / static_cast<double>(r.ideal)});
    }
    if (rows[qi].empty() && !sc.flows.empty())
      fail(ErrorCode::kEmptyFilter, "query '" + queries[qi].filter.name + "' selects no flows");
  }
  clock.lap("query");
  report.query_outputs = write_query_outputs(out_dir, config, queries, rows, descriptions);
  clock.lap("output");
  clock.finish();
  report.num_flows = sc.flows.size();
  detail::write_file((fs::path(out_dir) / "report.json").string(), report.to_json());
  return report;
}

RunReport run_query(const std::string& profile_path, const RunConfig& config, const std::string& out_dir) {
  RunReport report;
  PhaseClock clock(report);
  fs::create_directories(out_dir);
  NetworkProfile profile = NetworkProfile::load(profile_path);
  RunConfig cfg = config;
  cfg.clos.reset();
  cfg.topology = profile.topology();
  cfg.failed_links.clear();  // already applied to the saved topology
  Scenario sc = materialize(cfg);
  clock.lap("setup");

  auto queries = effective_queries(cfg);
  std::vector<std::vector<Row>> rows;
  std::vector<std::string> descriptions;
  std::vector<QueryResult> results;
  answer_queries(profile, sc.flows, cfg, queries, rows, descriptions, results);
  clock.lap("query");
  report.query_outputs = write_query_outputs(out_dir, cfg, queries, rows, descriptions);
  clock.lap("output");
  clock.finish();
  report.num_flows = sc.flows.size();
  report.links_total = profile.size();
  report.links_simulated = profile.simulated_count();
  detail::write_file((fs::path(out_dir) / "report.json").string(), report.to_json());
  return report;
}

double relative_error(double estimate, double oracle) {
  require(oracle != 0, "relative error against a zero reference");
  return (estimate - oracle) / oracle;
}

namespace {

json load_summary(const std::string& dir) {
  auto path = (fs::path(dir) / "summary.json").string();
  try {
    return json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaMismatch, path + ": " + e.what());
  }
}

std::vector<std::pair<std::uint64_t, double>> load_rows(const std::string& path) {
  std::string text = detail::read_file(path);
  auto nl = text.find('\n');
  if (std::string_view(text).substr(0, nl) != kFlowCsvHeader)
    fail(ErrorCode::kSchemaMismatch, path + ": unexpected per-flow CSV header");
  std::vector<std::pair<std::uint64_t, double>> out;
  for (const auto& row : detail::csv_rows(text)) {
    if (row.size() != 7) fail(ErrorCode::kSchemaMismatch, path + ": expected 7 columns");
    out.emplace_back(detail::field_u64(row[1], "size"), detail::field_double(row[6], "slowdown"));
  }
  return out;
}

}  // namespace

std::string compare_reports(const std::string& estimate_dir, const std::string& oracle_dir,
                            const std::vector<std::uint64_t>& edges, const std::vector<double>& percentiles) {
  json est = load_summary(estimate_dir);
  json ora = load_summary(oracle_dir);
  std::vector<double> qs = percentiles;
  try {
    if (qs.empty()) {
      qs = est.at("percentiles").get<std::vector<double>>();
      if (qs != ora.at("percentiles").get<std::vector<double>>())
        fail(ErrorCode::kSchemaMismatch, "estimate and oracle report different percentiles");
    }
    std::set<std::string> en, on;
    for (const auto& [k, v] : est.at("queries").items()) en.insert(k);
    for (const auto& [k, v] : ora.at("queries").items()) on.insert(k);
    if (en != on) fail(ErrorCode::kSchemaMismatch, "estimate and oracle answer different queries");

    json out{{"percentiles", qs}, {"size_bins", edges}, {"queries", json::object()}};
    for (const auto& name : en) {
      auto e_rows = load_rows((fs::path(estimate_dir) / est["queries"][name].at("file").get<std::string>()).string());
      auto o_rows = load_rows((fs::path(oracle_dir) / ora["queries"][name].at("file").get<std::string>()).string());
      auto eb = summarize(e_rows, edges, qs);
      auto ob = summarize(o_rows, edges, qs);
      json jq = json::object();
      for (std::size_t b = 0; b < eb.size(); ++b) {
        json jb{{"estimate_count", eb[b].count}, {"oracle_count", ob[b].count}};
        for (std::size_t k = 0; k < qs.size(); ++k) {
          if (eb[b].count == 0 || ob[b].count == 0) {
            jb[percentile_key(qs[k])] = nullptr;
            continue;
          }
          double p = eb[b].percentiles[k].second, n = ob[b].percentiles[k].second;
          jb[percentile_key(qs[k])] = {{"estimate", p}, {"oracle", n}, {"error", relative_error(p, n)}};
        }
        jq[eb[b].label] = std::move(jb);
      }
      out["queries"][name] = std::move(jq);
    }
    return out.dump(2) + "\n";
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaMismatch, std::string("summary: ") + e.what());
  }
}

}  // namespace netdecomp
