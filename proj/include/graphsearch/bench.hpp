#pragma once

// Query latency benchmark: random-walk-with-restarts query sampling and a
// synthetic network generator for scaled runs.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/common.hpp"
#include "graphsearch/index.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/query.hpp"

namespace graphsearch::bench {

struct SamplerOptions {
  double restart_probability = 0.15;
  double keep_probability = 0.5;        // chance a walk step becomes a query node
  std::size_t max_steps_factor = 1000;  // steps allowed per requested node
};

/// Random walk with restarts from a uniformly drawn start node. Some visited
/// nodes become query nodes; each is related to the last query node of the
/// current walk segment, so relationships span one or more hops and the
/// query is a tree.
inline GraphQuery sample_query(const CoocGraph& g, std::size_t size, std::mt19937_64& rng,
                               const SamplerOptions& opt = {}) {
  if (size < 2) throw Error("bench: query size must be at least 2");
  if (size > g.size()) throw Error("bench: query size " + std::to_string(size) + " exceeds network size " + std::to_string(g.size()));
  const auto& net = g.network();
  std::uniform_int_distribution<std::size_t> pick_node(0, g.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::size_t start = pick_node(rng);
    if (g.neighbors(start).empty()) continue;
    std::set<std::size_t> chosen{start};
    std::vector<std::pair<std::size_t, std::size_t>> links;
    std::size_t cur = start, anchor = start;
    for (std::size_t step = 0; chosen.size() < size && step < size * opt.max_steps_factor; ++step) {
      if (coin(rng) < opt.restart_probability) {
        cur = anchor = start;
        continue;
      }
      const auto& nb = g.neighbors(cur);
      std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
      cur = nb[pick(rng)].to;
      if (chosen.contains(cur)) {
        anchor = cur;
      } else if (coin(rng) < opt.keep_probability) {
        chosen.insert(cur);
        links.emplace_back(anchor, cur);
        anchor = cur;
      }
    }
    if (chosen.size() < size) continue;

    GraphQuery q;
    for (auto v : chosen) q.nodes.push_back(net.entities[v].concept_id);
    for (auto [u, v] : links) q.rels.push_back({net.entities[u].concept_id, net.entities[v].concept_id});
    return q.normalized();
  }
  throw Error("bench: could not sample a connected query of size " + std::to_string(size));
}

struct SyntheticSpec {
  std::size_t entities = 10000;
  std::size_t edges = 100000;
  std::size_t publications = 50000;
  std::size_t max_postings = 40;
  std::uint64_t seed = 42;
};

struct SyntheticData {
  CoocNetwork network;
  InvertedIndex index;
  PublicationTable pubs;
};

inline std::string synthetic_id(char prefix, std::size_t i, std::size_t width) {
  auto s = std::to_string(i);
  return std::string(1, prefix) + std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

/// Connected random network: a random spanning tree plus uniformly drawn
/// extra edges. Postings are random publication sets whose sizes are the
/// edge frequencies.
inline SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.entities < 2) throw Error("bench: synthetic network needs at least 2 entities");
  if (spec.edges < spec.entities - 1) throw Error("bench: too few edges for a connected network");
  if (spec.edges > spec.entities * (spec.entities - 1) / 2) throw Error("bench: too many edges for a simple graph");
  if (spec.publications == 0 || spec.max_postings == 0) throw Error("bench: need publications and postings");

  std::mt19937_64 rng(spec.seed);
  SyntheticData d;
  auto w = std::to_string(spec.entities).size();
  auto pw = std::to_string(spec.publications).size();
  for (std::size_t i = 0; i < spec.entities; ++i) {
    ConceptEntity e;
    e.concept_id = synthetic_id('C', i, w);
    e.name = "concept " + std::to_string(i);
    e.macrocategory = "DISO";
    d.network.entities.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < spec.publications; ++i) {
    PublicationRecord p;
    p.pub_id = synthetic_id('P', i, pw);
    p.title = "publication " + std::to_string(i);
    p.publish_date = Date{2020, 1 + static_cast<int>(i % 12), 1 + static_cast<int>(i % 28), Date::Precision::day};
    d.pubs.push_back(std::move(p));
  }

  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i < spec.entities; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    pairs.emplace(parent(rng), i);
  }
  std::uniform_int_distribution<std::size_t> node(0, spec.entities - 1);
  while (pairs.size() < spec.edges) {
    auto a = node(rng), b = node(rng);
    if (a == b) continue;
    pairs.emplace(std::min(a, b), std::max(a, b));
  }

  std::uniform_real_distribution<double> npmi(1e-6, 1.0);
  std::uniform_int_distribution<std::size_t> freq(1, spec.max_postings);
  std::uniform_int_distribution<std::size_t> pub(0, spec.publications - 1);
  for (const auto& [a, b] : pairs) {
    CoocEdge e;
    e.a = d.network.entities[a].concept_id;
    e.b = d.network.entities[b].concept_id;
    e.name = edge_name(d.network.entities[a].name, d.network.entities[b].name);
    e.npmi = npmi(rng);
    e.pmi = e.npmi;
    std::set<std::string> postings;
    auto f = std::min(freq(rng), spec.publications);
    while (postings.size() < f) postings.insert(d.pubs[pub(rng)].pub_id);
    e.frequency = postings.size();
    d.index.postings.emplace(e.name, std::vector<std::string>(postings.begin(), postings.end()));
    d.network.edges.push_back(std::move(e));
  }
  std::sort(d.network.edges.begin(), d.network.edges.end(),
            [](const CoocEdge& x, const CoocEdge& y) { return x.name < y.name; });
  d.network.n_docs = spec.publications;
  d.index.doc_count = spec.publications;
  return d;
}

struct BenchOptions {
  std::vector<std::size_t> sizes{2, 4, 6, 8, 10};
  std::size_t repetitions = 10;
  std::uint64_t seed = 7;
  SamplerOptions sampler;
};

struct Sample {
  std::size_t size = 0;
  std::size_t rep = 0;
  GraphQuery query;
  double match_seconds = 0.0;
  double retrieve_seconds = 0.0;
  std::size_t results = 0;
  std::size_t expanded_rels = 0;  // relationships without a direct edge
};

struct Summary {
  double min = 0, median = 0, max = 0;
};

inline Summary summarize(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  auto n = v.size();
  double med = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  return {v.front(), med, v.back()};
}

struct BenchReport {
  BenchOptions options;
  std::vector<Sample> samples;

  nlohmann::json to_json() const {
    nlohmann::json sizes = nlohmann::json::array();
    for (auto s : options.sizes) {
      std::vector<double> m, r;
      for (const auto& x : samples)
        if (x.size == s) {
          m.push_back(x.match_seconds);
          r.push_back(x.retrieve_seconds);
        }
      auto ms = summarize(m), rs = summarize(r);
      sizes.push_back({{"nodes", s},
                       {"match_seconds", {{"min", ms.min}, {"median", ms.median}, {"max", ms.max}}},
                       {"retrieve_seconds", {{"min", rs.min}, {"median", rs.median}, {"max", rs.max}}}});
    }
    return {{"sampler", {{"method", "random walk with restarts"},
                         {"restart_probability", options.sampler.restart_probability},
                         {"keep_probability", options.sampler.keep_probability},
                         {"seed", options.seed}}},
            {"repetitions", options.repetitions},
            {"sizes", sizes}};
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "nodes,rep,rels,match_seconds,retrieve_seconds,results,expanded_rels\n";
    for (const auto& s : samples)
      os << s.size << ',' << s.rep << ',' << s.query.rels.size() << ',' << s.match_seconds << ','
         << s.retrieve_seconds << ',' << s.results << ',' << s.expanded_rels << '\n';
    return os.str();
  }

  double max_match() const {
    double m = 0;
    for (const auto& s : samples) m = std::max(m, s.match_seconds);
    return m;
  }
  std::size_t expanded_rels() const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.expanded_rels;
    return n;
  }
  double max_retrieve() const {
    double m = 0;
    for (const auto& s : samples) m = std::max(m, s.retrieve_seconds);
    return m;
  }
};

/// Samples every query up front, then times matching and retrieval.
inline BenchReport run_bench(const QueryEngine& engine, const BenchOptions& opt) {
  using clock = std::chrono::steady_clock;
  std::mt19937_64 rng(opt.seed);
  BenchReport report{opt, {}};
  for (auto size : opt.sizes)
    for (std::size_t rep = 0; rep < opt.repetitions; ++rep)
      report.samples.push_back({size, rep, sample_query(engine.graph(), size, rng, opt.sampler)});

  for (auto& s : report.samples) {
    auto t0 = clock::now();
    auto expansions = engine.expand(s.query);
    apply_default_selections(expansions);
    auto t1 = clock::now();
    auto results = engine.retrieve(expansions);
    auto t2 = clock::now();
    s.match_seconds = std::chrono::duration<double>(t1 - t0).count();
    s.retrieve_seconds = std::chrono::duration<double>(t2 - t1).count();
    s.results = results.size();
    s.expanded_rels = static_cast<std::size_t>(
        std::count_if(expansions.begin(), expansions.end(), [](const Expansion& e) { return !e.direct; }));
  }
  return report;
}

}  // namespace graphsearch::bench
