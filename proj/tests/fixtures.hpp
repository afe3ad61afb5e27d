#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "graphsearch/bench.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/pipeline.hpp"
#include "graphsearch/query.hpp"
#include "oracles.hpp"

namespace fixture {

namespace gs = graphsearch;
namespace fs = std::filesystem;

/// Network, index and publications built by hand; `graph` mirrors them in
/// oracle form.
struct World {
  gs::CoocNetwork network;
  gs::InvertedIndex index;
  gs::PublicationTable pubs;
  oracle::Graph graph;
  std::map<std::string, std::set<std::string>> postings;
  std::vector<oracle::Doc> docs;
};

struct EdgeSpec {
  std::string a, b;
  double npmi;
  std::vector<std::string> pubs;
};

/// `names` maps concept_id to display name; edges carry their postings.
inline World make_world(const std::map<std::string, std::string>& names, const std::vector<EdgeSpec>& edges,
                        const std::vector<std::pair<std::string, std::string>>& pubs_with_dates) {
  World w;
  for (const auto& [id, name] : names) {
    gs::ConceptEntity e;
    e.concept_id = id;
    e.name = name;
    e.macrocategory = "DISORDERS";
    e.semantic_type = "Disease or Syndrome";
    w.network.entities.push_back(e);
    w.graph.nodes.push_back(id);
  }
  for (const auto& [id, date] : pubs_with_dates) {
    gs::PublicationRecord p;
    p.pub_id = id;
    p.title = "Title of " + id;
    p.abstract = "Abstract of " + id;
    p.publish_date = *gs::Date::parse(date);
    w.pubs.push_back(p);
    w.docs.push_back({id, date});
  }
  std::sort(w.pubs.begin(), w.pubs.end(), [](auto& x, auto& y) { return x.pub_id < y.pub_id; });
  for (const auto& s : edges) {
    gs::CoocEdge e;
    e.a = std::min(s.a, s.b);
    e.b = std::max(s.a, s.b);
    e.name = gs::edge_name(names.at(e.a), names.at(e.b));
    e.npmi = s.npmi;
    e.pmi = s.npmi;
    std::set<std::string> ps(s.pubs.begin(), s.pubs.end());
    e.frequency = ps.size();
    w.index.postings[e.name] = std::vector<std::string>(ps.begin(), ps.end());
    w.postings[e.name] = ps;
    w.graph.edges.push_back({e.a, e.b, e.name, e.npmi});
    w.network.edges.push_back(e);
  }
  std::sort(w.network.edges.begin(), w.network.edges.end(), [](auto& x, auto& y) { return x.name < y.name; });
  w.network.n_docs = w.pubs.size();
  w.index.doc_count = w.pubs.size();
  return w;
}

// Worked-example query: SARS-CoV-2 - ACE2 - Angiotensin II - {vascular
// permeability, inflammation - cytokine storm}. ACE2/SARS-CoV-2 needs a
// 3-edge path, Angiotensin II/vascular permeability a 2-edge path.
inline const std::map<std::string, std::string>& running_names() {
  static const std::map<std::string, std::string> names = {
      {"C01", "SARS-CoV-2"},   {"C02", "ACE2"},          {"C03", "Angiotensin II"},
      {"C04", "Vascular permeability"}, {"C05", "Inflammation"}, {"C06", "Cytokine storm"},
      {"C07", "Spike protein"}, {"C08", "Receptor binding"}, {"C09", "TMPRSS2"},
      {"C10", "Furin"},        {"C11", "Bradykinin"}};
  return names;
}

inline World running_example() {
  std::vector<EdgeSpec> edges = {
      {"C02", "C03", 0.60, {"pub1", "pub2"}},
      {"C03", "C05", 0.50, {"pub1", "pub2"}},
      {"C05", "C06", 0.70, {"pub1", "pub2", "pub4"}},
      {"C01", "C07", 0.80, {"pub1", "pub2"}},
      {"C07", "C08", 0.70, {"pub1", "pub2"}},
      {"C08", "C02", 0.90, {"pub1"}},
      {"C01", "C09", 0.30, {"pub3"}},
      {"C09", "C10", 0.20, {"pub3"}},
      {"C10", "C02", 0.40, {"pub3"}},
      {"C03", "C11", 0.50, {"pub1"}},
      {"C11", "C04", 0.40, {"pub4"}},
  };
  return make_world(running_names(), edges,
                    {{"pub1", "2021-03-01"}, {"pub2", "2021-06-15"}, {"pub3", "2020-11-02"}, {"pub4", "2020-05-20"}});
}

inline gs::GraphQuery running_query() {
  gs::GraphQuery q;
  q.nodes = {"C01", "C02", "C03", "C04", "C05", "C06"};
  q.rels = {{"C01", "C02"}, {"C02", "C03"}, {"C03", "C04"}, {"C03", "C05"}, {"C05", "C06"}};
  return q;
}

inline std::string running_query_json() {
  return R"({"nodes": ["C01", "C02", "C03", "C04", "C05", "C06"],
             "rels": [["C01", "C02"], ["C02", "C03"], ["C03", "C04"], ["C03", "C05"], ["C05", "C06"]]})";
}

// A and B are linked by A-X-B and by the longer A-Y-Z-B.
inline World shortest_path_example() {
  std::map<std::string, std::string> names = {{"A", "A"}, {"B", "B"}, {"X", "X"}, {"Y", "Y"}, {"Z", "Z"}};
  std::vector<EdgeSpec> edges = {{"A", "X", 0.3, {"p1"}}, {"X", "B", 0.3, {"p1"}}, {"A", "Y", 0.9, {"p2"}},
                                 {"Y", "Z", 0.9, {"p2"}}, {"Z", "B", 0.9, {"p2"}}};
  return make_world(names, edges, {{"p1", "2020-02-02"}, {"p2", "2020-03-03"}});
}

// ---- random generators ----

struct Generator {
  std::mt19937_64 rng;
  explicit Generator(std::uint64_t seed) : rng(seed) {}

  std::size_t uniform(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  bool coin(double p = 0.5) { return real(0, 1) < p; }

  std::string node_id(std::size_t i) { return "N" + std::string(i < 10 ? "0" : "") + std::to_string(i); }

  /// Random network of <= max_nodes nodes. With `coarse` the weights come
  /// from a small set so that ties appear.
  World random_world(std::size_t max_nodes, std::size_t max_docs, bool coarse, double density) {
    std::size_t n = uniform(3, max_nodes);
    std::map<std::string, std::string> names;
    for (std::size_t i = 0; i < n; ++i) names[node_id(i)] = "concept " + std::string(1, static_cast<char>('a' + i));
    std::size_t docs = uniform(1, max_docs);
    std::vector<std::pair<std::string, std::string>> pubs;
    for (std::size_t d = 0; d < docs; ++d) {
      char date[16];
      std::snprintf(date, sizeof date, "2020-%02zu-%02zu", uniform(1, 3), uniform(1, 3));
      pubs.push_back({"P" + std::to_string(100 + d), date});
    }
    std::vector<EdgeSpec> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!coin(density)) continue;
        double w = coarse ? 0.25 * static_cast<double>(uniform(1, 4)) : real(0.01, 1.0);
        EdgeSpec e{node_id(i), node_id(j), w, {}};
        for (const auto& p : pubs)
          if (coin(0.3)) e.pubs.push_back(p.first);
        if (e.pubs.empty()) e.pubs.push_back(pubs[uniform(0, pubs.size() - 1)].first);
        edges.push_back(e);
      }
    return make_world(names, edges, pubs);
  }

  /// Connected query over distinct network nodes: a random tree plus extras.
  gs::GraphQuery random_query(const World& w, std::size_t max_nodes) {
    auto nodes = w.graph.nodes;
    std::shuffle(nodes.begin(), nodes.end(), rng);
    std::size_t k = uniform(2, std::min(max_nodes, nodes.size()));
    nodes.resize(k);
    gs::GraphQuery q;
    q.nodes = nodes;
    for (std::size_t i = 1; i < k; ++i) q.rels.push_back({nodes[uniform(0, i - 1)], nodes[i]});
    for (std::size_t extra = uniform(0, 2); extra > 0; --extra) {
      auto a = uniform(0, k - 1), b = uniform(0, k - 1);
      if (a != b) q.rels.push_back({nodes[a], nodes[b]});
    }
    return q.normalized();
  }
};

inline std::vector<std::pair<std::string, std::string>> rel_pairs(const gs::GraphQuery& q) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& r : q.rels) out.push_back({r.first, r.second});
  return out;
}

// ---- on-disk corpus for the pipeline ----

struct CorpusFiles {
  fs::path root;
  gs::pipeline::PipelineConfig config;
};

inline fs::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = fs::temp_directory_path() / ("graphsearch_" + tag + "_" + std::to_string(rng()));
  fs::create_directories(p);
  return p;
}

inline void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// 20 well-formed documents plus rows the cleaner must drop or merge.
inline CorpusFiles write_corpus(const fs::path& root) {
  const std::vector<std::string> phrases = {
      "SARS-CoV-2 infection", "ACE2 receptor",   "angiotensin II",   "vascular permeability",
      "inflammation",         "cytokine storm",  "myocarditis",      "high fever",
      "increased mortality",  "spike protein",   "bradykinin"};
  std::mt19937_64 rng(2024);
  std::string csv = "cord_uid,source_x,title,doi,abstract,publish_time,authors,journal\n";
  for (int i = 0; i < 20; ++i) {
    std::set<std::size_t> pick;
    pick.insert(static_cast<std::size_t>(i) % phrases.size());
    pick.insert(static_cast<std::size_t>(i + 1) % phrases.size());
    while (pick.size() < 4) pick.insert(rng() % phrases.size());
    std::string abstract = "We report";
    for (auto p : pick) abstract += " " + phrases[p] + " and";
    abstract += " related findings in hospitalised patients.";
    char id[16], date[16];
    std::snprintf(id, sizeof id, "doc%02d", i);
    std::snprintf(date, sizeof date, "2020-%02d-%02d", 1 + i % 12, 1 + i % 27);
    std::string journal = i % 3 == 0 ? "J Virol" : (i % 3 == 1 ? "Lancet" : "");
    csv += std::string(id) + ",PMC,\"Study " + std::to_string(i) + ": " + phrases[static_cast<std::size_t>(i) % phrases.size()] +
           " in COVID-19\",10.1000/" + id + ",\"" + abstract + "\"," + date + ",\"Doe, J.; Roe, R.\"," + journal + "\n";
  }
  csv += "doc05,WHO,Study 5 duplicate,,short,2020-06-06,,\n";
  csv += "old01,PMC,Old coronavirus study,,SARS coronavirus in bats,2019-05-01,,\n";
  csv += "noabs,PMC,No abstract here,,,2020-04-04,,\n";
  csv += "zh01,PMC,新型冠状病毒肺炎临床特征,,新型冠状病毒肺炎患者的临床特征与炎症反应研究,2020-07-07,,\n";
  write(root / "metadata.csv", csv);

  write(root / "dict.tsv",
        "concept_id\tname\tsynonyms\tsource\tsemantic_type\tmacrocategory\tdescription\n"
        "C0001\tSARS-CoV-2\tsevere acute respiratory syndrome coronavirus 2\tUMLS\tVirus\tLIVING_BEINGS\tThe virus causing COVID-19\n"
        "C0002\tACE2 receptor\tangiotensin converting enzyme 2\tUMLS\tGene or Genome\tGENES_AND_MOLECULAR_SEQUENCES\n"
        "C0003\tangiotensin II\t\tUMLS\tPharmacologic Substance\tCHEMICALS_AND_DRUGS\n"
        "C0004\tvascular permeability\t\tUMLS\tPhysiologic Function\tPHYSIOLOGY\n"
        "C0005\tinflammation\tinflammatory response\tUMLS\tPathologic Function\tDISORDERS\n"
        "C0006\tcytokine storm\tcytokine release syndrome\tCIDO\tDisease or Syndrome\tDISORDERS\n"
        "C0007\tmyocarditis\t\tUMLS\tDisease or Syndrome\tDISORDERS\n"
        "C0008\tfever\tpyrexia\tUMLS\tSign or Symptom\tDISORDERS\n"
        "C0009\tspike protein\t\tCIDO\tAmino Acid, Peptide, or Protein\tCHEMICALS_AND_DRUGS\n"
        "C0010\tbradykinin\t\tUMLS\tPharmacologic Substance\tCHEMICALS_AND_DRUGS\n"
        "C0011\tmortality\t\tUMLS\tQuantitative Concept\tCONCEPTS_AND_IDEAS\n"
        "U0001\thigh\t\tUTILITY\tQualifier\tUTILITY\n"
        "U0002\tincreased\t\tUTILITY\tQualifier\tUTILITY\n");
  write(root / "citations.csv", "doi,count\n10.1000/doc01,12\n10.1000/doc02,40\n10.1000/doc07,3\n");
  write(root / "journals.tsv", "J Virol\tJournal of Virology\nLancet\tThe Lancet\n");

  CorpusFiles f;
  f.root = root;
  f.config.corpus_csv = root / "metadata.csv";
  f.config.dictionaries = {root / "dict.tsv"};
  f.config.citations = root / "citations.csv";
  f.config.journals = root / "journals.tsv";
  f.config.data_dir = root / "data";
  fs::create_directories(f.config.data_dir);
  return f;
}

}  // namespace fixture
