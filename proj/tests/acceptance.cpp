// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "fixtures.hpp"
#include "graphsearch/bench.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/pipeline.hpp"
#include "graphsearch/query.hpp"
#include "graphsearch/stats.hpp"

namespace gs = graphsearch;
namespace pl = graphsearch::pipeline;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      note = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.note = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.ok) ++failures;
  std::printf("%s  %-34s %7.2fs  %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), secs, o.note.c_str());
  std::fflush(stdout);
}

Outcome golden_scores() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto w = fixture::running_example();
  gs::QueryEngine engine(w.network, w.index, w.pubs);
  auto run = engine.run(fixture::running_query());
  o.require(run.results.size() >= 2, "fewer than 2 results");
  if (!o.ok) return o;
  o.require(run.results[0].pub_id == "pub1", "pub1 not first");
  o.require(run.results[0].score == gs::Score(9, 2), "pub1 scored " + gs::score_string(run.results[0].score));
  o.require(run.results[1].pub_id == "pub2", "pub2 not second");
  o.require(run.results[1].score == gs::Score(11, 3), "pub2 scored " + gs::score_string(run.results[1].score));
  o.require(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1), "slower than 1s");
  o.note = o.ok ? "pub1 = 9/2, pub2 = 11/3" : o.note;
  return o;
}

Outcome npmi_properties() {
  Outcome o;
  fixture::Generator g(20240601);
  std::size_t independent = 0, degenerate = 0;
  const int n_tuples = 20000;
  for (int i = 0; i < n_tuples && o.ok; ++i) {
    std::uint64_t n = g.uniform(1, g.coin(0.2) ? 1000000 : 40);
    std::uint64_t fx = g.uniform(1, n), fy = g.uniform(1, n);
    std::uint64_t lo = std::max<std::uint64_t>(fx + fy > n ? fx + fy - n : 1, 1), hi = std::min(fx, fy);
    std::uint64_t fxy = g.uniform(lo, hi);
    double v = gs::stats::npmi(fx, fy, fxy, n);
    o.require(v >= -1.0 && v <= 1.0, "out of range");
    o.require(v == gs::stats::npmi(fy, fx, fxy, n), "asymmetric");
    if (fxy == n || (fx == fxy && fy == fxy)) {
      ++degenerate;
      o.require(v == 1.0, "not 1 at full co-occurrence");
    } else {
      if (fxy * n == fx * fy) {
        ++independent;
        o.require(v == 0.0, "non-zero at independence");
      }
      o.require(std::abs(v - oracle::npmi(double(fx), double(fy), double(fxy), double(n))) < 1e-9, "differs from definition");
    }
  }
  if (o.ok)
    o.note = std::to_string(n_tuples) + " tuples, " + std::to_string(independent) + " independent, " +
             std::to_string(degenerate) + " degenerate";
  return o;
}

Outcome pruning() {
  Outcome o;
  auto ent = [](std::string id, std::uint64_t f) {
    gs::ConceptEntity e;
    e.concept_id = id;
    e.name = "n" + id;
    e.frequency = f;
    return e;
  };
  gs::BigramTable bigrams;
  bigrams[{"A", "B"}] = {1, {"p1"}};  // npmi exactly 0
  bigrams[{"A", "C"}] = {2, {"p1", "p2"}};
  bigrams[{"B", "D"}] = {1, {"p3"}};
  auto res = gs::consolidate(bigrams, {ent("A", 2), ent("B", 2), ent("C", 2), ent("D", 3)}, 4);
  o.require(gs::stats::npmi(2, 2, 1, 4) == 0.0, "fixture edge not exactly 0");
  for (const auto& e : res.network.edges) {
    o.require(e.npmi > 0, "stored edge with npmi <= 0");
    o.require(!(e.a == "A" && e.b == "B"), "zero-npmi edge kept");
  }
  fixture::Generator g(77);
  std::size_t checked = 0;
  for (int round = 0; round < 30; ++round) {
    std::vector<gs::RawEntityMention> ms;
    auto n = g.uniform(2, 40);
    for (std::size_t p = 0; p < n; ++p)
      for (auto k = g.uniform(0, 5); k > 0; --k)
        ms.push_back({"P" + std::to_string(p), "", "E" + std::to_string(g.uniform(0, 9)), 1, 0, 1});
    auto t = gs::build_lookup_tables(ms);
    std::vector<gs::ConceptEntity> ents;
    for (const auto& [id, pubs] : t.entity_publications) ents.push_back(ent(id, pubs.size()));
    auto r = gs::consolidate(gs::mine_links(t.publication_entities), ents, n);
    for (const auto& e : r.network.edges) o.require(e.npmi > 0, "random network edge with npmi <= 0");
    checked += r.network.edges.size();
  }
  if (o.ok) o.note = std::to_string(checked) + " random edges checked";
  return o;
}

Outcome shortest_paths() {
  Outcome o;
  {
    auto w = fixture::shortest_path_example();
    gs::GraphQuery q;
    q.nodes = {"A", "B"};
    q.rels = {{"A", "B"}};
    auto ex = gs::find_paths(q, gs::CoocGraph(w.network));
    o.require(ex.size() == 1 && ex[0].candidates.size() == 1 &&
                  ex[0].candidates[0].nodes == std::vector<std::string>{"A", "X", "B"},
              "two-route topology did not return A-X-B");
  }
  fixture::Generator g(1234);
  std::size_t compared = 0;
  for (int round = 0; round < 100 && o.ok; ++round) {
    auto w = g.random_world(12, 5, round % 2 == 0, g.real(0.15, 0.5));
    auto q = g.random_query(w, 6);
    for (const auto& ex : gs::find_paths(q, gs::CoocGraph(w.network))) {
      if (w.graph.edge_between(ex.rel.first, ex.rel.second)) {
        o.require(ex.direct && ex.candidates.size() == 1, "direct edge not a single candidate");
        continue;
      }
      auto want = oracle::shortest_paths(w.graph, ex.rel.first, ex.rel.second, 10);
      o.require(ex.candidates.size() == want.size(), "candidate count differs in round " + std::to_string(round));
      for (std::size_t i = 0; o.ok && i < want.size(); ++i)
        o.require(ex.candidates[i].edge_names == want[i].names, "order differs in round " + std::to_string(round));
      ++compared;
    }
  }
  if (o.ok) o.note = "100 networks, " + std::to_string(compared) + " expansions; A-X-B";
  return o;
}

Outcome link_mining() {
  Outcome o;
  fixture::Generator g(303);
  for (int round = 0; round < 50 && o.ok; ++round) {
    std::map<std::string, std::set<std::string>> docs;
    std::vector<gs::RawEntityMention> ms;
    auto n_pubs = g.uniform(1, 50), n_ent = g.uniform(2, 30);
    for (std::size_t p = 0; p < n_pubs; ++p)
      for (auto k = g.uniform(0, 6); k > 0; --k) {
        auto pid = "P" + std::to_string(1000 + p), eid = "E" + std::to_string(100 + g.uniform(0, n_ent - 1));
        docs[pid].insert(eid);
        ms.push_back({pid, "", eid, 1, 0, 1});
      }
    auto t = gs::build_lookup_tables(ms);
    auto bigrams = gs::mine_links(t.publication_entities, 2);
    auto want = oracle::pair_scan(docs);
    o.require(bigrams.size() == want.size(), "pair count differs");
    for (const auto& [pair, b] : bigrams) {
      auto it = want.find({pair.first, pair.second});
      o.require(it != want.end() && it->second == b.postings && b.frequency == b.postings.size(), "bigram differs");
    }
    std::vector<gs::ConceptEntity> ents;
    for (const auto& [id, pubs] : t.entity_publications) {
      gs::ConceptEntity e;
      e.concept_id = id;
      e.name = "n" + id;
      e.frequency = pubs.size();
      ents.push_back(e);
    }
    auto net = gs::consolidate(bigrams, ents, n_pubs).network;
    auto idx = gs::build_inverted_index(bigrams, net);
    for (const auto& e : net.edges) o.require(gs::lookup(idx, e.name).size() == e.frequency, "lookup size != frequency");
  }
  if (o.ok) o.note = "50 corpora";
  return o;
}

Outcome retrieval() {
  Outcome o;
  fixture::Generator g(4321);
  std::size_t ranked = 0;
  for (int round = 0; round < 150 && o.ok; ++round) {
    auto w = g.random_world(12, 20, round % 3 == 0, g.real(0.2, 0.5));
    auto q = g.random_query(w, 6);
    gs::QueryEngine engine(w.network, w.index, w.pubs);
    auto ex = engine.expand(q);
    gs::Selections sel;
    std::map<std::pair<std::string, std::string>, std::size_t> choice;
    for (const auto& e : ex)
      if (e.candidates.size() > 1 && g.coin()) {
        auto i = g.uniform(0, e.candidates.size() - 1);
        sel[e.rel] = i;
        choice[{e.rel.first, e.rel.second}] = i;
      }
    gs::apply_selections(ex, sel);
    auto got = engine.retrieve(ex);
    auto want = oracle::retrieve(w.graph, fixture::rel_pairs(q), w.postings, w.docs, choice);
    o.require(got.size() == want.size(), "result count differs in round " + std::to_string(round));
    for (std::size_t i = 0; o.ok && i < got.size(); ++i)
      o.require(got[i].pub_id == want[i].id && got[i].score.numerator() == want[i].score.num &&
                    got[i].score.denominator() == want[i].score.den && got[i].npmi_sum == want[i].npmi_sum,
                "ranking differs in round " + std::to_string(round));
    ranked += got.size();
  }
  if (o.ok) o.note = "150 fixtures, " + std::to_string(ranked) + " ranked publications";
  return o;
}

Outcome determinism() {
  Outcome o;
  auto root = fixture::temp_dir("acceptance");
  auto files = fixture::write_corpus(root);
  pl::run_all(files.config);
  auto again = files.config;
  again.data_dir = root / "second";
  fs::create_directories(again.data_dir);
  pl::run_all(again);
  std::size_t bytes = 0;
  for (const char* f : {pl::kPublicationsFile, pl::kMentionsFile, pl::kConceptsFile, gs::storage::kNetworkHeader,
                        gs::storage::kEntitiesFile, gs::storage::kEdgesFile, pl::kIndexFile}) {
    auto a = gs::io::read_file(files.config.data_dir / f), b = gs::io::read_file(again.data_dir / f);
    o.require(a == b, std::string(f) + " differs");
    bytes += a.size();
  }
  auto pubs = gs::storage::load_publications(files.config.data_dir / pl::kPublicationsFile);
  o.require(pubs.size() == 20, "expected 20 documents, got " + std::to_string(pubs.size()));
  fs::remove_all(root);
  if (o.ok) o.note = "20 documents, " + std::to_string(bytes) + " bytes identical";
  return o;
}

Outcome connectivity() {
  Outcome o;
  auto ent = [](std::string id) {
    gs::ConceptEntity e;
    e.concept_id = id;
    e.name = "n" + id;
    e.frequency = 1;
    return e;
  };
  gs::BigramTable one, two;
  for (auto [a, b] : {std::pair{"A", "B"}, {"B", "C"}, {"A", "C"}}) one[{a, b}] = {1, {"p1"}};
  two = one;
  for (auto [a, b] : {std::pair{"D", "E"}, {"E", "F"}, {"D", "F"}}) two[{a, b}] = {1, {"p2"}};
  auto r1 = gs::consolidate(one, {ent("A"), ent("B"), ent("C")}, 6);
  auto r2 = gs::consolidate(two, {ent("A"), ent("B"), ent("C"), ent("D"), ent("E"), ent("F")}, 6);
  o.require(r1.report.components == 1 && r1.report.warnings.empty(), "single cluster not 1 component");
  o.require(r2.report.components == 2 && r2.report.warnings.size() == 1, "two clusters not reported with a warning");
  if (o.ok) o.note = "1 component; 2 components + warning";
  return o;
}

Outcome latency() {
  Outcome o;
  gs::bench::SyntheticSpec spec;
  spec.entities = 10000;
  spec.edges = 100000;
  auto data = gs::bench::make_synthetic(spec);
  gs::CoocGraph graph(data.network);
  o.require(gs::component_labels(graph.size(), [&] {
              std::vector<std::pair<std::size_t, std::size_t>> links;
              for (const auto& e : data.network.edges) links.emplace_back(*graph.node(e.a), *graph.node(e.b));
              return links;
            }()) == std::vector<std::size_t>(graph.size(), 0),
            "synthetic network not connected");
  gs::QueryEngine engine(data.network, data.index, data.pubs);
  gs::bench::BenchOptions opt;
  opt.sizes = {2, 4, 6, 8, 10};
  opt.repetitions = 10;
  auto report = gs::bench::run_bench(engine, opt);
  double m = report.max_match(), r = report.max_retrieve();
  o.require(m < 2.2, "match took " + std::to_string(m) + "s");
  o.require(r < 3.0, "retrieval took " + std::to_string(r) + "s");
  o.require(report.expanded_rels() > 0, "no sampled relationship needed a path expansion");
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu queries, %zu expanded rels; max match %.4fs (< 2.2s), max retrieve %.4fs (< 3s)",
                report.samples.size(), report.expanded_rels(), m, r);
  if (o.ok) o.note = buf;
  return o;
}

Outcome keyword() {
  Outcome o;
  fixture::Generator g(78);
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "kappa", "sigma", "theta"};
  std::size_t frequent_cases = 0;
  for (int round = 0; round < 200 && o.ok; ++round) {
    gs::PublicationTable pubs;
    std::map<std::string, std::set<std::string>> toks;
    auto n = g.uniform(2, 30);
    for (std::size_t i = 0; i < n; ++i) {
      gs::PublicationRecord p;
      p.pub_id = "D" + std::to_string(100 + i);
      if (g.coin(0.8)) {
        p.title = "alpha";
        toks[p.pub_id].insert("alpha");
      } else {
        toks[p.pub_id];
      }
      for (auto k = g.uniform(0, 4); k > 0; --k) {
        auto& t = vocab[g.uniform(1, vocab.size() - 1)];
        p.abstract += t + " ";
        toks[p.pub_id].insert(t);
      }
      pubs.push_back(p);
    }
    auto idx = gs::build_keyword_index(pubs);
    std::set<std::string> terms;
    for (auto k = g.uniform(1, 3); k > 0; --k) terms.insert(vocab[g.uniform(0, vocab.size() - 1)]);
    std::vector<std::string> got;
    for (const auto& h : gs::keyword_search(idx, {terms.begin(), terms.end()}, gs::KeywordMode::conjunctive).hits)
      got.push_back(h.pub_id);
    o.require(got == oracle::conjunctive_scan(toks, terms), "conjunctive result differs from scan");
    std::size_t df = 0;
    for (const auto& [_, t] : toks) df += t.count("alpha");
    if (2 * df >= n) {
      ++frequent_cases;
      for (auto mode : {gs::KeywordMode::conjunctive, gs::KeywordMode::disjunctive}) {
        o.require(gs::keyword_search(idx, {"alpha"}, mode).hits.empty(), "frequent token matched");
        o.require(gs::keyword_search(idx, {"alpha", "beta"}, mode).hits == gs::keyword_search(idx, {"beta"}, mode).hits,
                  "frequent token changed results");
      }
    }
  }
  if (o.ok) o.note = "200 corpora, " + std::to_string(frequent_cases) + " with a >=50% token";
  return o;
}

Outcome no_secondary() {
  Outcome o;
  fs::path build = GRAPHSEARCH_BINARY_DIR;
  for (const auto& entry : fs::recursive_directory_iterator(build)) {
    auto name = entry.path().filename().string();
    o.require(name.find("webui") == std::string::npos, "found " + entry.path().string());
  }
  if (o.ok) o.note = "no web UI target in " + build.filename().string() + "; all checks above ran without it";
  return o;
}

}  // namespace

int main() {
  criterion("golden score (exact rational)", golden_scores);
  criterion("npmi properties", npmi_properties);
  criterion("pruning invariant", pruning);
  criterion("shortest-path oracle", shortest_paths);
  criterion("link-mining oracle", link_mining);
  criterion("end-to-end retrieval oracle", retrieval);
  criterion("pipeline determinism", determinism);
  criterion("connectivity report", connectivity);
  criterion("latency envelope", latency);
  criterion("keyword baseline", keyword);
  criterion("core suite without web UI", no_secondary);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
