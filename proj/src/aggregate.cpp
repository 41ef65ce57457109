#include "netdecomp/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "netdecomp/error.hpp"
#include "netdecomp/rng.hpp"
#include "text_io.hpp"

namespace netdecomp {

namespace {

const std::shared_ptr<const BucketedDist>& zero_dist() {
  static const std::shared_ptr<const BucketedDist> zero = std::make_shared<BucketedDist>();
  return zero;
}

}  // namespace

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kSimulated: return "simulated";
    case Provenance::kInherited: return "inherited";
    case Provenance::kNoFlows: return "no_flows";
  }
  return "?";
}

namespace {

Provenance parse_provenance(const std::string& s) {
  for (auto p : {Provenance::kSimulated, Provenance::kInherited, Provenance::kNoFlows})
    if (s == provenance_name(p)) return p;
  fail(ErrorCode::kParse, "unknown provenance '" + s + "'");
}

}  // namespace

NetworkProfile::NetworkProfile(Topology topo, std::uint64_t mtu, std::vector<ProfileEntry> entries)
    : topo_(std::move(topo)), mtu_(mtu), entries_(std::move(entries)) {
  require(entries_.size() == topo_.num_directed_links(), "profile: one entry per directed link required");
  for (auto& e : entries_)
    if (!e.dist) e.dist = zero_dist();
}

std::size_t NetworkProfile::simulated_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const ProfileEntry& e) { return e.provenance == Provenance::kSimulated; }));
}

std::string NetworkProfile::to_json() const {
  nlohmann::json j;
  j["mtu"] = mtu_;
  j["topology"] = nlohmann::json::parse(topo_.to_json());
  auto& links = j["links"] = nlohmann::json::array();
  for (DirLinkId id = 0; id < entries_.size(); ++id) {
    const auto& e = entries_[id];
    nlohmann::json jl{{"id", id}, {"provenance", provenance_name(e.provenance)}, {"representative", e.representative}};
    if (e.provenance == Provenance::kSimulated) {
      auto& jb = jl["buckets"] = nlohmann::json::array();
      for (const auto& b : e.dist->buckets) jb.push_back({{"minf", b.minf}, {"maxf", b.maxf}, {"samples", b.samples}});
    }
    links.push_back(std::move(jl));
  }
  return j.dump();
}

NetworkProfile NetworkProfile::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    Topology topo = Topology::from_json(j.at("topology").dump());
    const auto& links = j.at("links");
    std::vector<ProfileEntry> entries(links.size());
    for (const auto& jl : links) {
      auto id = jl.at("id").get<DirLinkId>();
      require(id < entries.size(), "profile: link id out of range");
      auto& e = entries[id];
      e.provenance = parse_provenance(jl.at("provenance").get<std::string>());
      e.representative = jl.at("representative").get<DirLinkId>();
      if (e.provenance == Provenance::kSimulated) {
        auto d = std::make_shared<BucketedDist>();
        for (const auto& jb : jl.at("buckets")) {
          Bucket b{jb.at("minf").get<std::uint64_t>(), jb.at("maxf").get<std::uint64_t>(),
                   jb.at("samples").get<std::vector<double>>()};
          d->total_samples += b.samples.size();
          d->buckets.push_back(std::move(b));
        }
        e.dist = std::move(d);
      }
    }
    for (auto& e : entries) {
      if (e.provenance != Provenance::kInherited) continue;
      require(e.representative < entries.size() && entries[e.representative].provenance == Provenance::kSimulated,
              "profile: inherited entry points at a non-simulated link");
      e.dist = entries[e.representative].dist;
    }
    return NetworkProfile(std::move(topo), j.at("mtu").get<std::uint64_t>(), std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("profile json: ") + e.what());
  }
}

void NetworkProfile::save(const std::string& path) const { detail::write_file(path, to_json()); }

NetworkProfile NetworkProfile::load(const std::string& path) { return from_json(detail::read_file(path)); }

NetworkProfile build_profile(const Topology& topo, const std::vector<Cluster>& clusters,
                             const std::map<DirLinkId, BucketedDist>& simulated, std::uint64_t mtu) {
  std::vector<ProfileEntry> entries(topo.num_directed_links());
  std::vector<bool> covered(entries.size(), false);
  for (const auto& c : clusters) {
    auto it = simulated.find(c.representative);
    if (it == simulated.end())
      fail(ErrorCode::kMissingRepresentative,
           "no simulated distribution for representative " + std::to_string(c.representative));
    auto dist = std::make_shared<const BucketedDist>(it->second);
    for (DirLinkId m : c.members) {
      require(m < entries.size() && !covered[m], "clusters must partition the directed links");
      covered[m] = true;
      entries[m] = {dist, m == c.representative ? Provenance::kSimulated : Provenance::kInherited, c.representative};
    }
  }
  for (DirLinkId id = 0; id < entries.size(); ++id)
    if (!covered[id]) entries[id] = {nullptr, Provenance::kNoFlows, id};
  return NetworkProfile(topo, mtu, std::move(entries));
}

PointEstimate estimate_flow(const NetworkProfile& profile, const Flow& flow, const Path& path,
                            std::span<const double> uniforms) {
  require(uniforms.size() >= path.size(), "estimate_flow: need one uniform per hop");
  const auto packets = static_cast<double>(packets_for(flow.size, profile.mtu()));
  double per_packet = 0;
  for (std::size_t i = 0; i < path.size(); ++i)
    per_packet += lookup_and_sample(profile.dist(path.hops[i]), flow.size, uniforms[i]);
  PointEstimate pe;
  pe.flow_id = flow.id;
  pe.ideal_fct = profile.topology().ideal_fct(path, flow.size, profile.mtu());
  pe.estimated_fct = pe.ideal_fct + packets * per_packet;
  pe.slowdown = pe.estimated_fct / pe.ideal_fct;
  return pe;
}

PointEstimate estimate_flow(const NetworkProfile& profile, const Flow& flow, std::span<const double> uniforms) {
  return estimate_flow(profile, flow, profile.topology().ecmp_route(flow.src, flow.dst, flow.id), uniforms);
}

bool FlowFilter::matches(const Flow& f) const {
  if (flow_ids && !flow_ids->count(f.id)) return false;
  if (srcs && !srcs->count(f.src)) return false;
  if (dsts && !dsts->count(f.dst)) return false;
  if (f.size < min_size || f.size > max_size) return false;
  if (tags && !tags->count(f.tag)) return false;
  return true;
}

std::string FlowFilter::describe() const {
  std::ostringstream os;
  os << name << ":";
  if (flow_ids) os << " ids=" << flow_ids->size();
  if (srcs) os << " srcs=" << srcs->size();
  if (dsts) os << " dsts=" << dsts->size();
  if (min_size > 0 || max_size < UINT64_MAX) os << " size=[" << min_size << "," << max_size << "]";
  if (tags) {
    os << " tags=";
    for (auto t : *tags) os << t << ";";
  }
  return os.str();
}

double percentile(const std::vector<double>& sorted, double q) {
  require(!sorted.empty(), "percentile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<std::pair<double, double>> percentiles_of(std::vector<double> values, const std::vector<double>& qs) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  for (double q : qs) out.emplace_back(q, percentile(values, q));
  return out;
}

QueryResult query(const NetworkProfile& profile, const std::vector<Flow>& population, const QuerySpec& spec,
                  std::uint64_t seed) {
  std::vector<const Flow*> matched;
  for (const auto& f : population)
    if (spec.filter.matches(f)) matched.push_back(&f);
  if (matched.empty()) fail(ErrorCode::kEmptyFilter, "query '" + spec.filter.name + "' selects no flows");

  QueryResult out;
  out.name = spec.filter.name;
  out.filter_description = spec.filter.describe();
  std::vector<double> u;
  auto estimate_one = [&](const Flow& f, Rng& rng) {
    Path path = profile.topology().ecmp_route(f.src, f.dst, f.id);
    u.resize(path.size());
    for (auto& x : u) x = uniform01(rng);
    out.estimates.push_back({f, estimate_flow(profile, f, path, u)});
  };

  if (spec.mode == QueryMode::kPerFlow) {
    out.estimates.reserve(matched.size());
    for (const Flow* f : matched) {
      Rng rng(mix_seed(seed, f->id));
      estimate_one(*f, rng);
    }
  } else {
    require(spec.n_samples >= 1, "distribution query needs n_samples >= 1");
    Rng rng(mix_seed(seed, 0x5a4d9e1bULL));
    out.estimates.reserve(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) estimate_one(*matched[rng() % matched.size()], rng);
  }
  std::vector<double> slowdowns;
  slowdowns.reserve(out.estimates.size());
  for (const auto& e : out.estimates) slowdowns.push_back(e.estimate.slowdown);
  out.sample_count = slowdowns.size();
  out.percentiles = percentiles_of(std::move(slowdowns), spec.percentiles);
  return out;
}

}  // namespace netdecomp
