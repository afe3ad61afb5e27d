#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/stats.hpp"

namespace gs = graphsearch;

namespace {

struct Counts {
  std::uint64_t fx, fy, fxy, n;
};

Counts random_counts(fixture::Generator& g) {
  std::uint64_t n = g.uniform(1, g.coin(0.2) ? 1000000 : 60);
  std::uint64_t fx = g.uniform(1, n);
  std::uint64_t fy = g.uniform(1, n);
  std::uint64_t lo = fx + fy > n ? fx + fy - n : 1;
  std::uint64_t hi = std::min(fx, fy);
  return {fx, fy, g.uniform(std::max<std::uint64_t>(lo, 1), hi), n};
}

gs::ConceptEntity entity(std::string id, std::uint64_t freq) {
  gs::ConceptEntity e;
  e.concept_id = id;
  e.name = "name " + id;
  e.frequency = freq;
  return e;
}

}  // namespace

TEST(Stats, KnownValues) {
  // f_x = f_y = 2, f_xy = 1, n = 4: p(xy) = p(x)p(y)
  EXPECT_EQ(gs::stats::pmi(2, 2, 1, 4), 0.0);
  EXPECT_EQ(gs::stats::npmi(2, 2, 1, 4), 0.0);
  EXPECT_DOUBLE_EQ(gs::stats::pmi(1, 1, 1, 4), std::log(4.0));
  EXPECT_EQ(gs::stats::npmi(1, 1, 1, 4), 1.0);
  EXPECT_EQ(gs::stats::npmi(5, 5, 5, 5), 1.0);
  EXPECT_NEAR(gs::stats::npmi(3, 2, 1, 4), std::log(4.0 / 6.0) / -std::log(0.25), 1e-12);
  EXPECT_NEAR(gs::stats::cramers_v(1, 1, 1, 4).value, 1.0, 1e-12);
  EXPECT_TRUE(gs::stats::cramers_v(4, 2, 2, 4).degenerate);
}

TEST(Stats, PreconditionsEnforced) {
  EXPECT_THROW(gs::stats::npmi(1, 1, 0, 4), std::invalid_argument);
  EXPECT_THROW(gs::stats::npmi(1, 2, 2, 4), std::invalid_argument);
  EXPECT_THROW(gs::stats::npmi(5, 1, 1, 4), std::invalid_argument);
  EXPECT_THROW(gs::stats::npmi(3, 3, 1, 4), std::invalid_argument);
}

TEST(Stats, NpmiPropertiesAgainstDefinition) {
  fixture::Generator g(101);
  for (int i = 0; i < 20000; ++i) {
    auto c = random_counts(g);
    double v = gs::stats::npmi(c.fx, c.fy, c.fxy, c.n);
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 1.0);
    EXPECT_EQ(v, gs::stats::npmi(c.fy, c.fx, c.fxy, c.n));
    bool full = c.fxy == c.n || (c.fx == c.fxy && c.fy == c.fxy);
    // f_x = f_y = f_xy = n is both independent and full co-occurrence; it counts as full
    if (full) {
      EXPECT_EQ(v, 1.0);
    } else {
      if (c.fxy * c.n == c.fx * c.fy) {
        EXPECT_EQ(v, 0.0);
      }
      EXPECT_NEAR(v, oracle::npmi(double(c.fx), double(c.fy), double(c.fxy), double(c.n)), 1e-9);
    }
  }
}

TEST(Stats, CramersVMatchesChiSquare) {
  fixture::Generator g(202);
  for (int i = 0; i < 5000; ++i) {
    auto c = random_counts(g);
    auto v = gs::stats::cramers_v(c.fx, c.fy, c.fxy, c.n);
    ASSERT_GE(v.value, 0.0);
    ASSERT_LE(v.value, 1.0);
    if (v.degenerate) continue;
    EXPECT_NEAR(v.value, oracle::cramers_v(double(c.fx), double(c.fy), double(c.fxy), double(c.n)), 1e-9);
  }
}

TEST(EdgeName, SeparatorEscapingRoundTrips) {
  EXPECT_EQ(gs::edge_name("b", "a"), "a—b");
  auto tricky = gs::edge_name("x—y", "z");
  auto parts = gs::parse_edge_name(tricky);
  ASSERT_TRUE(parts);
  EXPECT_EQ(parts->first, "x—y");
  EXPECT_EQ(parts->second, "z");
}

TEST(Consolidate, AmbiguousEdgeNamesRejected) {
  // doubling cannot tell "a—"+"b" from "a"+"—b"
  EXPECT_EQ(gs::edge_name("a—", "b"), gs::edge_name("a", "—b"));
  auto x = entity("A", 1), y = entity("B", 1), z = entity("C", 1), w = entity("D", 1);
  x.name = "a—";
  y.name = "b";
  z.name = "a";
  w.name = "—b";
  gs::BigramTable bigrams;
  bigrams[{"A", "B"}] = {1, {"p1"}};
  bigrams[{"C", "D"}] = {1, {"p2"}};
  EXPECT_THROW(gs::consolidate(bigrams, {x, y, z, w}, 4), gs::Error);
}

TEST(LinkMining, MatchesPairScanOnRandomCorpora) {
  fixture::Generator g(303);
  for (int round = 0; round < 50; ++round) {
    std::map<std::string, std::set<std::string>> docs;
    std::vector<gs::RawEntityMention> mentions;
    auto n_pubs = g.uniform(1, 50), n_ent = g.uniform(2, 30);
    for (std::size_t p = 0; p < n_pubs; ++p) {
      auto pid = "P" + std::to_string(1000 + p);
      for (auto k = g.uniform(0, 6); k > 0; --k) {
        auto eid = "E" + std::to_string(100 + g.uniform(0, n_ent - 1));
        docs[pid].insert(eid);
        mentions.push_back({pid, "s", eid, 1.0, 0, 1});
      }
    }
    auto tables = gs::build_lookup_tables(mentions);
    auto expected = oracle::pair_scan(docs);
    for (unsigned workers : {1u, 3u}) {
      auto bigrams = gs::mine_links(tables.publication_entities, workers);
      ASSERT_EQ(bigrams.size(), expected.size());
      for (const auto& [pair, b] : bigrams) {
        auto it = expected.find({pair.first, pair.second});
        ASSERT_NE(it, expected.end());
        EXPECT_EQ(b.postings, it->second);
        EXPECT_EQ(b.frequency, it->second.size());
      }
    }
  }
}

TEST(LookupTables, BothDirectionsConsistent) {
  std::vector<gs::RawEntityMention> ms = {{"p2", "", "B", 1, 0, 1}, {"p1", "", "A", 1, 0, 1},
                                          {"p1", "", "B", 1, 0, 1}, {"p1", "", "A", 1, 3, 4}};
  auto t = gs::build_lookup_tables(ms);
  EXPECT_EQ(t.publication_entities.at("p1"), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(t.entity_publications.at("B"), (std::vector<std::string>{"p1", "p2"}));
}

TEST(Consolidate, PrunesNonPositiveNpmi) {
  // n = 4: A,B independent (npmi exactly 0), A,C strongly associated
  gs::BigramTable bigrams;
  bigrams[{"A", "B"}] = {1, {"p1"}};
  bigrams[{"A", "C"}] = {2, {"p1", "p2"}};
  bigrams[{"B", "D"}] = {1, {"p3"}};
  auto res = gs::consolidate(bigrams, {entity("A", 2), entity("B", 2), entity("C", 2), entity("D", 3)}, 4);
  EXPECT_EQ(gs::stats::npmi(2, 2, 1, 4), 0.0);
  ASSERT_EQ(res.network.edges.size(), 1u);
  EXPECT_EQ(res.network.edges[0].a, "A");
  EXPECT_EQ(res.network.edges[0].b, "C");
  EXPECT_EQ(res.report.pruned_edges, 2u);
  EXPECT_TRUE(res.network.find_entity("B")->isolated);
  EXPECT_FALSE(res.network.find_entity("A")->isolated);
}

TEST(Consolidate, RandomNetworksKeepOnlyPositiveEdges) {
  fixture::Generator g(404);
  for (int round = 0; round < 30; ++round) {
    std::map<std::string, std::set<std::string>> docs;
    std::vector<gs::RawEntityMention> mentions;
    auto n = g.uniform(2, 40);
    for (std::size_t p = 0; p < n; ++p)
      for (auto k = g.uniform(0, 5); k > 0; --k) {
        auto eid = "E" + std::to_string(g.uniform(0, 9));
        mentions.push_back({"P" + std::to_string(p), "", eid, 1, 0, 1});
      }
    auto tables = gs::build_lookup_tables(mentions);
    std::vector<gs::ConceptEntity> ents;
    for (const auto& [id, pubs] : tables.entity_publications) ents.push_back(entity(id, pubs.size()));
    auto bigrams = gs::mine_links(tables.publication_entities);
    auto res = gs::consolidate(bigrams, ents, n);
    std::size_t positive = 0;
    for (const auto& [pair, b] : bigrams)
      positive += gs::stats::npmi(tables.entity_publications.at(pair.first).size(),
                                  tables.entity_publications.at(pair.second).size(), b.frequency, n) > 0;
    EXPECT_EQ(res.network.edges.size(), positive);
    EXPECT_EQ(res.report.pruned_edges, bigrams.size() - positive);
    for (const auto& e : res.network.edges) {
      EXPECT_GT(e.npmi, 0.0);
      EXPECT_LT(e.a, e.b);
    }
    EXPECT_TRUE(std::is_sorted(res.network.edges.begin(), res.network.edges.end(),
                               [](auto& x, auto& y) { return x.name < y.name; }));
    std::vector<oracle::Edge> oedges;
    std::vector<std::string> live;
    for (const auto& e : res.network.edges) oedges.push_back({e.a, e.b, e.name, e.npmi});
    for (const auto& e : res.network.entities)
      if (!e.isolated) live.push_back(e.concept_id);
    EXPECT_EQ(res.report.components, oracle::components(live, oedges));
  }
}

TEST(Consolidate, ConnectivityReport) {
  // two triangles over disjoint documents; n = 6
  gs::BigramTable one, two;
  for (auto [a, b] : {std::pair{"A", "B"}, {"B", "C"}, {"A", "C"}}) one[{a, b}] = {1, {"p1"}};
  two = one;
  for (auto [a, b] : {std::pair{"D", "E"}, {"E", "F"}, {"D", "F"}}) two[{a, b}] = {1, {"p2"}};
  std::vector<gs::ConceptEntity> abc = {entity("A", 1), entity("B", 1), entity("C", 1)};
  auto r1 = gs::consolidate(one, abc, 6);
  EXPECT_EQ(r1.report.components, 1u);
  EXPECT_TRUE(r1.report.warnings.empty());
  auto all = abc;
  for (auto id : {"D", "E", "F"}) all.push_back(entity(id, 1));
  auto r2 = gs::consolidate(two, all, 6);
  EXPECT_EQ(r2.report.components, 2u);
  EXPECT_EQ(r2.report.component_sizes, (std::vector<std::size_t>{3, 3}));
  ASSERT_EQ(r2.report.warnings.size(), 1u);
  EXPECT_FALSE(r2.report.connected());
}

TEST(Graph, AdjacencyMirrorsEdges) {
  auto w = fixture::running_example();
  gs::CoocGraph g(w.network);
  auto a = g.node("C02"), b = g.node("C03");
  ASSERT_TRUE(a && b);
  ASSERT_TRUE(g.edge_between(*a, *b));
  EXPECT_EQ(w.network.edges[*g.edge_between(*a, *b)].name, gs::edge_name("ACE2", "Angiotensin II"));
  std::size_t arcs = 0;
  for (std::size_t i = 0; i < g.size(); ++i) arcs += g.neighbors(i).size();
  EXPECT_EQ(arcs, 2 * w.network.edges.size());
}
