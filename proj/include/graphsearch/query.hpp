#pragma once

// Graph query matching and publication ranking.
//
// Each query relationship (alpha, beta) is matched either by the network
// edge alpha—beta or, when that edge does not exist, by an expansion: the
// minimal-hop paths between alpha and beta ranked by mean NPMI. A publication
// scores, per relationship, the fraction of the selected path's edges it
// mentions; results rank by that score, the NPMI of the mentioned edges and
// recency.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include "graphsearch/common.hpp"
#include "graphsearch/corpus.hpp"
#include "graphsearch/index.hpp"
#include "graphsearch/network.hpp"

namespace graphsearch {

using Score = boost::rational<std::int64_t>;

/// Unordered pair of concept ids, canonical orientation first < second.
using RelKey = ConceptPair;

struct GraphQuery {
  std::vector<std::string> nodes;
  std::vector<RelKey> rels;

  /// Sorted distinct nodes and relationships.
  GraphQuery normalized() const {
    GraphQuery q;
    std::set<std::string> n(nodes.begin(), nodes.end());
    std::set<RelKey> r(rels.begin(), rels.end());
    q.nodes.assign(n.begin(), n.end());
    q.rels.assign(r.begin(), r.end());
    return q;
  }

  friend bool operator==(const GraphQuery&, const GraphQuery&) = default;
};

struct ValidationReport {
  std::vector<std::string> unknown_concepts;
  std::vector<std::vector<std::string>> components;  // filled when disconnected
  std::vector<std::string> problems;                 // other structural issues

  bool ok() const { return unknown_concepts.empty() && components.size() <= 1 && problems.empty(); }

  std::string message() const {
    std::string m;
    auto add = [&](const std::string& s) { m += (m.empty() ? "" : "; ") + s; };
    if (!unknown_concepts.empty()) {
      std::string ids;
      for (const auto& c : unknown_concepts) ids += (ids.empty() ? "" : ", ") + c;
      add("unknown concepts: " + ids);
    }
    if (components.size() > 1) add("query is disconnected (" + std::to_string(components.size()) + " components)");
    for (const auto& p : problems) add(p);
    return m.empty() ? "ok" : m;
  }

  nlohmann::json to_json() const {
    return {{"ok", ok()},
            {"unknown_concepts", unknown_concepts},
            {"components", components.size() > 1 ? nlohmann::json(components) : nlohmann::json::array()},
            {"problems", problems}};
  }
};

class QueryValidationError : public Error {
 public:
  explicit QueryValidationError(ValidationReport report) : Error(report.message()), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

/// Connected components of the query graph, each sorted, ordered by first member.
inline std::vector<std::vector<std::string>> query_components(const GraphQuery& q) {
  auto nq = q.normalized();
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < nq.nodes.size(); ++i) idx.emplace(nq.nodes[i], i);
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (const auto& r : nq.rels) {
    auto a = idx.find(r.first), b = idx.find(r.second);
    if (a != idx.end() && b != idx.end()) links.emplace_back(a->second, b->second);
  }
  auto labels = component_labels(nq.nodes.size(), links);
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < nq.nodes.size(); ++i) groups[labels[i]].push_back(nq.nodes[i]);
  std::vector<std::vector<std::string>> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

/// Every node must be a network concept, every relationship must join two
/// distinct query nodes, and the query must be connected with >= 2 nodes.
inline ValidationReport validate_query(const GraphQuery& q, const CoocNetwork& net) {
  ValidationReport rep;
  auto nq = q.normalized();
  for (const auto& n : nq.nodes)
    if (!net.find_entity(n)) rep.unknown_concepts.push_back(n);
  if (nq.nodes.size() < 2) rep.problems.push_back("a graph query needs at least 2 nodes");
  if (nq.rels.empty()) rep.problems.push_back("a graph query needs at least 1 relationship");
  std::set<std::string> nodes(nq.nodes.begin(), nq.nodes.end());
  for (const auto& r : nq.rels) {
    if (r.first == r.second) rep.problems.push_back("self-loop on " + r.first);
    for (const auto* end : {&r.first, &r.second})
      if (!nodes.contains(*end)) rep.problems.push_back("relationship endpoint " + *end + " is not a query node");
  }
  auto comps = query_components(nq);
  if (comps.size() > 1) rep.components = std::move(comps);
  return rep;
}

/// A chain of network edges from alpha to beta.
struct CandidatePath {
  std::vector<std::uint32_t> edges;  // indices into network.edges, alpha to beta
  std::vector<std::string> nodes;    // concept ids, alpha first
  std::vector<std::string> edge_names;
  double avg_npmi = 0.0;

  std::size_t length() const { return edges.size(); }
  friend bool operator==(const CandidatePath&, const CandidatePath&) = default;
};

struct Expansion {
  RelKey rel;  // alpha = rel.first, beta = rel.second
  bool direct = false;
  bool unreachable = false;
  std::vector<CandidatePath> candidates;
  std::optional<std::size_t> selected;
  std::size_t total_shortest_paths = 0;  // before truncation to k

  const CandidatePath* selected_path() const {
    return selected && *selected < candidates.size() ? &candidates[*selected] : nullptr;
  }
  friend bool operator==(const Expansion&, const Expansion&) = default;
};

namespace detail {

/// Candidate order: higher mean NPMI first, then lexicographic edge names.
inline bool path_before(const CandidatePath& a, const CandidatePath& b) {
  if (a.avg_npmi != b.avg_npmi) return a.avg_npmi > b.avg_npmi;
  return a.edge_names < b.edge_names;
}

inline constexpr std::uint32_t kUnseen = std::numeric_limits<std::uint32_t>::max();

inline std::vector<std::uint32_t> bfs(const CoocGraph& g, std::size_t source, std::uint32_t max_depth) {
  std::vector<std::uint32_t> dist(g.size(), kUnseen);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)}, next;
  dist[source] = 0;
  for (std::uint32_t depth = 0; !frontier.empty() && depth < max_depth; ++depth) {
    next.clear();
    for (auto u : frontier)
      for (const auto& arc : g.neighbors(u))
        if (dist[arc.to] == kUnseen) {
          dist[arc.to] = depth + 1;
          next.push_back(arc.to);
        }
    frontier.swap(next);
  }
  return dist;
}

/// Finishes a path: node ids, edge names and mean NPMI (summed alpha to beta).
inline CandidatePath make_path(const CoocGraph& g, std::size_t source, std::vector<std::uint32_t> edges) {
  const auto& net = g.network();
  CandidatePath p;
  p.nodes.push_back(net.entities[source].concept_id);
  double sum = 0.0;
  for (auto e : edges) {
    const auto& edge = net.edges[e];
    p.edge_names.push_back(edge.name);
    sum += edge.npmi;
    p.nodes.push_back(edge.a == p.nodes.back() ? edge.b : edge.a);
  }
  p.avg_npmi = sum / static_cast<double>(edges.size());
  p.edges = std::move(edges);
  return p;
}

}  // namespace detail

/// Tuning for path enumeration.
struct PathSearchOptions {
  std::size_t top_k = 10;
  /// Beyond this many minimal paths the ranking switches from full
  /// enumeration to a per-layer k-best merge over the shortest-path DAG.
  std::size_t enumeration_limit = 200000;
};

/// Expansion of a single relationship.
inline Expansion expand_relationship(const CoocGraph& g, const RelKey& rel, const PathSearchOptions& opt = {}) {
  Expansion ex;
  ex.rel = rel;
  auto s = g.node(rel.first), t = g.node(rel.second);
  if (!s || !t) throw Error("expand_relationship: concept not in network");
  if (auto e = g.edge_between(*s, *t)) {
    ex.direct = true;
    ex.total_shortest_paths = 1;
    ex.candidates.push_back(detail::make_path(g, *s, {*e}));
    return ex;
  }
  auto from_s = detail::bfs(g, *s, detail::kUnseen);
  if (from_s[*t] == detail::kUnseen) {
    ex.unreachable = true;
    return ex;
  }
  const std::uint32_t depth = from_s[*t];
  auto from_t = detail::bfs(g, *t, depth);
  auto on_path = [&](std::size_t v) {
    return from_s[v] != detail::kUnseen && from_t[v] != detail::kUnseen && from_s[v] + from_t[v] == depth;
  };
  // Shortest-path DAG successors of u: on-path neighbors one layer further.
  auto successors = [&](std::size_t u, auto&& fn) {
    for (const auto& arc : g.neighbors(u))
      if (from_s[arc.to] == from_s[u] + 1 && on_path(arc.to)) fn(arc);
  };

  // Count paths per node (from s) to pick a strategy.
  std::vector<std::vector<std::uint32_t>> layers(depth + 1);
  for (std::size_t v = 0; v < g.size(); ++v)
    if (on_path(v)) layers[from_s[v]].push_back(static_cast<std::uint32_t>(v));
  std::unordered_map<std::uint32_t, double> count;
  count[static_cast<std::uint32_t>(*s)] = 1.0;
  for (std::uint32_t l = 0; l < depth; ++l)
    for (auto u : layers[l]) successors(u, [&](const CoocGraph::Arc& arc) { count[arc.to] += count[u]; });
  const double total = count[static_cast<std::uint32_t>(*t)];
  ex.total_shortest_paths = total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);

  const auto& net = g.network();
  if (total <= static_cast<double>(opt.enumeration_limit)) {
    std::vector<std::uint32_t> stack;
    auto dfs = [&](auto&& self, std::size_t u) -> void {
      if (u == *t) {
        ex.candidates.push_back(detail::make_path(g, *s, stack));
        return;
      }
      successors(u, [&](const CoocGraph::Arc& arc) {
        stack.push_back(arc.edge);
        self(self, arc.to);
        stack.pop_back();
      });
    };
    dfs(dfs, *s);
    std::sort(ex.candidates.begin(), ex.candidates.end(), detail::path_before);
    if (ex.candidates.size() > opt.top_k) ex.candidates.resize(opt.top_k);
    return ex;
  }

  // k-best merge: partial paths into each node, ordered by partial NPMI sum
  // then edge names; layers share length so sums compare like means.
  struct Partial {
    double sum;
    std::vector<std::uint32_t> edges;
  };
  auto partial_before = [&](const Partial& a, const Partial& b) {
    if (a.sum != b.sum) return a.sum > b.sum;
    return std::lexicographical_compare(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(),
                                        [&](auto x, auto y) { return net.edges[x].name < net.edges[y].name; });
  };
  std::unordered_map<std::uint32_t, std::vector<Partial>> best;
  best[static_cast<std::uint32_t>(*s)] = {Partial{0.0, {}}};
  for (std::uint32_t l = 0; l < depth; ++l) {
    for (auto u : layers[l]) {
      auto& mine = best[u];
      successors(u, [&](const CoocGraph::Arc& arc) {
        auto& theirs = best[arc.to];
        for (const auto& p : mine) {
          Partial q{p.sum + net.edges[arc.edge].npmi, p.edges};
          q.edges.push_back(arc.edge);
          theirs.push_back(std::move(q));
        }
        std::sort(theirs.begin(), theirs.end(), partial_before);
        if (theirs.size() > opt.top_k) theirs.resize(opt.top_k);
      });
      if (u != *t) std::vector<Partial>().swap(mine);
    }
  }
  for (auto& p : best[static_cast<std::uint32_t>(*t)]) ex.candidates.push_back(detail::make_path(g, *s, p.edges));
  std::sort(ex.candidates.begin(), ex.candidates.end(), detail::path_before);
  return ex;
}

/// One expansion per relationship of the normalized query, in relationship order.
inline std::vector<Expansion> find_paths(const GraphQuery& q, const CoocGraph& g, const PathSearchOptions& opt = {}) {
  auto nq = q.normalized();
  std::vector<Expansion> out;
  out.reserve(nq.rels.size());
  for (const auto& r : nq.rels) out.push_back(expand_relationship(g, r, opt));
  return out;
}

inline Expansion& find_expansion(std::vector<Expansion>& expansions, const RelKey& rel) {
  auto it = std::find_if(expansions.begin(), expansions.end(), [&](const Expansion& e) { return e.rel == rel; });
  if (it == expansions.end()) throw SelectionError("no expansion for relationship " + rel.first + " - " + rel.second);
  return *it;
}

inline void select_path(std::vector<Expansion>& expansions, const RelKey& rel, std::size_t index) {
  auto& ex = find_expansion(expansions, rel);
  if (ex.candidates.empty())
    throw SelectionError("relationship " + rel.first + " - " + rel.second + " has no candidate path");
  if (index >= ex.candidates.size())
    throw SelectionError("path index " + std::to_string(index) + " out of range for " + rel.first + " - " +
                         rel.second + " (" + std::to_string(ex.candidates.size()) + " candidates)");
  ex.selected = index;
}

/// Top-ranked candidate for every non-empty expansion left unselected.
inline void apply_default_selections(std::vector<Expansion>& expansions) {
  for (auto& ex : expansions)
    if (!ex.candidates.empty() && !ex.selected) ex.selected = 0;
}

using Selections = std::map<RelKey, std::size_t>;

/// Applies explicit choices, then defaults. Throws SelectionError on bad input.
inline void apply_selections(std::vector<Expansion>& expansions, const Selections& selections) {
  for (const auto& [rel, idx] : selections) select_path(expansions, rel, idx);
  apply_default_selections(expansions);
}

struct RelExplanation {
  RelKey rel;
  bool direct = false;
  bool unreachable = false;
  std::size_t mentioned = 0;
  std::size_t path_length = 0;
  std::vector<std::string> mentioned_edges;

  Score fraction() const { return path_length == 0 ? Score(0) : Score(static_cast<std::int64_t>(mentioned), static_cast<std::int64_t>(path_length)); }
};

struct ScoreBreakdown {
  Score score;
  std::vector<RelExplanation> explained;
};

/// Sum over relationships of (selected path edges mentioned) / (path length).
/// Empty expansions contribute 0.
template <typename MentionSet>
ScoreBreakdown score_publication(const MentionSet& mentioned_edges, const std::vector<Expansion>& expansions) {
  ScoreBreakdown b;
  for (const auto& ex : expansions) {
    RelExplanation r;
    r.rel = ex.rel;
    r.direct = ex.direct;
    r.unreachable = ex.unreachable;
    if (const auto* path = ex.selected_path()) {
      r.path_length = path->length();
      for (const auto& name : path->edge_names)
        if (mentioned_edges.contains(name)) {
          ++r.mentioned;
          r.mentioned_edges.push_back(name);
        }
    }
    b.score += r.fraction();
    b.explained.push_back(std::move(r));
  }
  return b;
}

struct ScoredPublication {
  std::string pub_id;
  Score score;
  double npmi_sum = 0.0;
  std::optional<Date> publish_date;
  const PublicationRecord* record = nullptr;
  std::vector<RelExplanation> explained;
};

/// Default result order: score, NPMI sum, newest first, then pub_id.
inline bool ranked_before(const ScoredPublication& a, const ScoredPublication& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.npmi_sum != b.npmi_sum) return a.npmi_sum > b.npmi_sum;
  if (a.publish_date.has_value() != b.publish_date.has_value()) return a.publish_date.has_value();
  if (a.publish_date) {
    if (auto c = *a.publish_date <=> *b.publish_date; c != 0) return c > 0;
  }
  return a.pub_id < b.pub_id;
}

/// Candidates are the union of the postings of every selected-path edge.
/// npmi_sum adds each distinct mentioned edge once, in edge-name order.
inline std::vector<ScoredPublication> retrieve(const std::vector<Expansion>& expansions, const CoocNetwork& net,
                                               const InvertedIndex& index, const PublicationTable& pubs) {
  std::set<std::string> selected_edges;
  for (const auto& ex : expansions) {
    if (ex.candidates.empty()) continue;
    if (!ex.selected_path()) throw SelectionError("relationship " + ex.rel.first + " - " + ex.rel.second + " has no selected path");
    for (const auto& name : ex.selected_path()->edge_names) selected_edges.insert(name);
  }
  std::map<std::string, std::set<std::string>> mentions;  // pub_id -> edge names
  for (const auto& name : selected_edges)
    for (const auto& pub : lookup(index, name)) mentions[pub].insert(name);

  std::vector<ScoredPublication> out;
  out.reserve(mentions.size());
  for (const auto& [pub, edges] : mentions) {
    ScoredPublication sp;
    sp.pub_id = pub;
    auto b = score_publication(edges, expansions);
    sp.score = b.score;
    sp.explained = std::move(b.explained);
    for (const auto& name : edges) {
      const auto* e = net.find_edge(name);
      if (!e) throw Error("retrieve: indexed relationship " + name + " missing from network");
      sp.npmi_sum += e->npmi;
    }
    sp.record = find_publication(pubs, pub);
    if (sp.record) sp.publish_date = sp.record->publish_date;
    out.push_back(std::move(sp));
  }
  std::sort(out.begin(), out.end(), ranked_before);
  return out;
}

/// The induced sub-query on `subset`; throws QueryValidationError when it is
/// not a connected query of >= 2 nodes.
inline GraphQuery induced_subquery(const GraphQuery& q, const std::vector<std::string>& subset) {
  auto nq = q.normalized();
  std::set<std::string> keep(subset.begin(), subset.end());
  GraphQuery sub;
  ValidationReport rep;
  for (const auto& n : keep) {
    if (std::find(nq.nodes.begin(), nq.nodes.end(), n) == nq.nodes.end())
      rep.problems.push_back("subset node " + n + " is not part of the query");
    sub.nodes.push_back(n);
  }
  for (const auto& r : nq.rels)
    if (keep.contains(r.first) && keep.contains(r.second)) sub.rels.push_back(r);
  if (sub.nodes.size() < 2) rep.problems.push_back("a graph query needs at least 2 nodes");
  auto comps = query_components(sub);
  if (comps.size() > 1) rep.components = std::move(comps);
  if (!rep.ok()) throw QueryValidationError(std::move(rep));
  return sub;
}

/// Immutable bundle of the stores a query runs against; safe to share.
class QueryEngine {
 public:
  QueryEngine(const CoocNetwork& net, const InvertedIndex& index, const PublicationTable& pubs,
              PathSearchOptions options = {})
      : net_(&net), graph_(net), index_(&index), pubs_(&pubs), options_(options) {}

  const CoocNetwork& network() const { return *net_; }
  const CoocGraph& graph() const { return graph_; }
  const InvertedIndex& index() const { return *index_; }
  const PublicationTable& publications() const { return *pubs_; }
  const PathSearchOptions& options() const { return options_; }

  ValidationReport validate(const GraphQuery& q) const { return validate_query(q, *net_); }

  std::vector<Expansion> expand(const GraphQuery& q) const {
    auto rep = validate(q);
    if (!rep.ok()) throw QueryValidationError(std::move(rep));
    return find_paths(q, graph_, options_);
  }

  std::vector<ScoredPublication> retrieve(const std::vector<Expansion>& expansions) const {
    return graphsearch::retrieve(expansions, *net_, *index_, *pubs_);
  }

  struct Run {
    std::vector<Expansion> expansions;
    std::vector<ScoredPublication> results;
  };

  Run run(const GraphQuery& q, const Selections& selections = {}) const {
    Run r;
    r.expansions = expand(q);
    apply_selections(r.expansions, selections);
    r.results = retrieve(r.expansions);
    return r;
  }

  Run run_subgraph(const GraphQuery& q, const std::vector<std::string>& subset, const Selections& selections = {}) const {
    auto rep = validate(q);
    if (!rep.ok()) throw QueryValidationError(std::move(rep));
    auto sub = induced_subquery(q, subset);
    Selections kept;
    for (const auto& [rel, idx] : selections)
      if (std::find(sub.rels.begin(), sub.rels.end(), rel) != sub.rels.end()) kept.emplace(rel, idx);
    return run(sub, kept);
  }

 private:
  const CoocNetwork* net_;
  CoocGraph graph_;
  const InvertedIndex* index_;
  const PublicationTable* pubs_;
  PathSearchOptions options_;
};

// ---- JSON interface ----

/// {"nodes": [...], "rels": [[a, b], ...], "selections": [{"rel": [a, b], "index": i}]}
struct QueryFile {
  GraphQuery query;
  Selections selections;
  std::vector<std::string> subset;
};

inline RelKey rel_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    throw FormatError("relationship must be a pair of concept ids");
  return RelKey(j[0].get<std::string>(), j[1].get<std::string>());
}

inline Selections selections_from_json(const nlohmann::json& j) {
  Selections out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw FormatError("selections must be an array of {rel, index}");
  for (const auto& s : j) {
    if (!s.is_object() || !s.contains("rel") || !s.contains("index") || !s["index"].is_number_unsigned())
      throw FormatError("selection entries need 'rel' and a non-negative integer 'index'");
    out[rel_from_json(s["rel"])] = s["index"].get<std::size_t>();
  }
  return out;
}

inline QueryFile query_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("query must be a JSON object");
  if (!j.contains("nodes") || !j["nodes"].is_array()) throw FormatError("query needs a 'nodes' array");
  if (!j.contains("rels") || !j["rels"].is_array()) throw FormatError("query needs a 'rels' array");
  QueryFile f;
  for (const auto& n : j["nodes"]) {
    if (!n.is_string()) throw FormatError("query nodes must be concept id strings");
    f.query.nodes.push_back(n.get<std::string>());
  }
  for (const auto& r : j["rels"]) f.query.rels.push_back(rel_from_json(r));
  if (j.contains("selections")) f.selections = selections_from_json(j["selections"]);
  if (j.contains("subset")) {
    if (!j["subset"].is_array()) throw FormatError("'subset' must be an array of concept ids");
    for (const auto& n : j["subset"]) f.subset.push_back(n.get<std::string>());
  }
  return f;
}

inline nlohmann::json to_json(const GraphQuery& q) {
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& r : q.rels) rels.push_back({r.first, r.second});
  return {{"nodes", q.nodes}, {"rels", rels}};
}

inline nlohmann::json selections_to_json(const Selections& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [rel, idx] : s) out.push_back({{"rel", {rel.first, rel.second}}, {"index", idx}});
  return out;
}

inline nlohmann::json to_json(const CandidatePath& p) {
  return {{"length", p.length()}, {"avg_npmi", p.avg_npmi}, {"nodes", p.nodes}, {"edges", p.edge_names}};
}

inline nlohmann::json to_json(const Expansion& ex) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : ex.candidates) cands.push_back(to_json(c));
  return {{"rel", {ex.rel.first, ex.rel.second}},
          {"direct", ex.direct},
          {"unreachable", ex.unreachable},
          {"total_shortest_paths", ex.total_shortest_paths},
          {"candidates", cands},
          {"selected", ex.selected ? nlohmann::json(*ex.selected) : nlohmann::json(nullptr)}};
}

inline nlohmann::json expansions_to_json(const std::vector<Expansion>& expansions) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& ex : expansions) out.push_back(to_json(ex));
  return out;
}

inline std::string score_string(const Score& s) {
  return std::to_string(s.numerator()) + (s.denominator() == 1 ? "" : "/" + std::to_string(s.denominator()));
}

inline double score_value(const Score& s) {
  return static_cast<double>(s.numerator()) / static_cast<double>(s.denominator());
}

inline nlohmann::json to_json(const ScoredPublication& p) {
  nlohmann::json explained = nlohmann::json::array();
  for (const auto& r : p.explained)
    explained.push_back({{"rel", {r.rel.first, r.rel.second}},
                         {"direct", r.direct},
                         {"unreachable", r.unreachable},
                         {"mentioned", r.mentioned},
                         {"path_length", r.path_length},
                         {"fraction", score_string(r.fraction())},
                         {"mentioned_edges", r.mentioned_edges}});
  nlohmann::json j = {{"pub_id", p.pub_id},
                      {"score", score_value(p.score)},
                      {"score_exact", score_string(p.score)},
                      {"npmi_sum", p.npmi_sum},
                      {"publish_date", p.publish_date ? nlohmann::json(p.publish_date->iso()) : nlohmann::json(nullptr)},
                      {"explained", explained}};
  if (p.record) {
    j["title"] = p.record->title;
    j["journal"] = p.record->journal ? nlohmann::json(*p.record->journal) : nlohmann::json(nullptr);
    j["num_cited_by"] = p.record->num_cited_by ? nlohmann::json(*p.record->num_cited_by) : nlohmann::json(nullptr);
    j["doi"] = p.record->doi ? nlohmann::json(*p.record->doi) : nlohmann::json(nullptr);
  }
  return j;
}

inline nlohmann::json results_to_json(const std::vector<ScoredPublication>& results) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : results) out.push_back(to_json(r));
  return out;
}

}  // namespace graphsearch
