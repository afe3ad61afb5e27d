#pragma once

// Co-occurrence network construction: lookup tables, single-pass link
// mining, edge statistics, NPMI pruning and connectivity verification.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/annotator.hpp"
#include "graphsearch/common.hpp"
#include "graphsearch/stats.hpp"

namespace graphsearch {

/// U+2014 EM DASH.
inline constexpr std::string_view kEdgeSeparator = "\xE2\x80\x94";

namespace detail {

inline std::string escape_separator(std::string_view name) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto hit = name.find(kEdgeSeparator, pos);
    if (hit == std::string_view::npos) break;
    out.append(name.substr(pos, hit - pos));
    out.append(kEdgeSeparator);
    out.append(kEdgeSeparator);
    pos = hit + kEdgeSeparator.size();
  }
  out.append(name.substr(pos));
  return out;
}

}  // namespace detail

/// "X—Y" with X preceding Y in byte order. A separator inside a name is
/// written twice.
inline std::string edge_name(std::string_view x, std::string_view y) {
  if (y < x) std::swap(x, y);
  return detail::escape_separator(x) + std::string(kEdgeSeparator) + detail::escape_separator(y);
}

/// Inverse of edge_name: scans left to right, a doubled separator is a
/// literal and the first single one splits the name.
inline std::optional<std::pair<std::string, std::string>> parse_edge_name(std::string_view name) {
  std::string left;
  std::size_t pos = 0;
  const auto sep = kEdgeSeparator;
  while (pos < name.size()) {
    if (name.substr(pos).starts_with(sep)) {
      if (name.substr(pos + sep.size()).starts_with(sep)) {
        left.append(sep);
        pos += 2 * sep.size();
        continue;
      }
      std::string right;
      std::size_t p = pos + sep.size();
      while (p < name.size()) {
        if (name.substr(p).starts_with(sep)) {
          if (!name.substr(p + sep.size()).starts_with(sep)) return std::nullopt;
          right.append(sep);
          p += 2 * sep.size();
          continue;
        }
        right.push_back(name[p++]);
      }
      return std::make_pair(std::move(left), std::move(right));
    }
    left.push_back(name[pos++]);
  }
  return std::nullopt;
}

using PublicationEntities = std::map<std::string, std::vector<std::string>>;
using EntityPublications = std::map<std::string, std::vector<std::string>>;

struct LookupTables {
  PublicationEntities publication_entities;
  EntityPublications entity_publications;
};

/// Both directions of the mention relation, with sorted distinct lists.
/// When `entities` is given only curated concepts are kept.
inline LookupTables build_lookup_tables(const std::vector<RawEntityMention>& mentions,
                                        const std::vector<ConceptEntity>* entities = nullptr) {
  std::set<std::string> allowed;
  if (entities)
    for (const auto& e : *entities) allowed.insert(e.concept_id);
  std::map<std::string, std::set<std::string>> p2e, e2p;
  for (const auto& m : mentions) {
    if (entities && !allowed.contains(m.concept_id)) continue;
    p2e[m.pub_id].insert(m.concept_id);
    e2p[m.concept_id].insert(m.pub_id);
  }
  LookupTables t;
  for (auto& [k, v] : p2e) t.publication_entities.emplace(k, std::vector<std::string>(v.begin(), v.end()));
  for (auto& [k, v] : e2p) t.entity_publications.emplace(k, std::vector<std::string>(v.begin(), v.end()));
  return t;
}

/// Unordered concept pair, stored with first < second.
struct ConceptPair {
  std::string first;
  std::string second;

  ConceptPair() = default;
  ConceptPair(std::string a, std::string b) : first(std::move(a)), second(std::move(b)) {
    if (second < first) std::swap(first, second);
  }
  friend auto operator<=>(const ConceptPair&, const ConceptPair&) = default;
};

struct Bigram {
  std::uint64_t frequency = 0;
  std::vector<std::string> postings;  // sorted pub_ids

  friend bool operator==(const Bigram&, const Bigram&) = default;
};

using BigramTable = std::map<ConceptPair, Bigram>;

namespace detail {

inline void mine_range(PublicationEntities::const_iterator first, PublicationEntities::const_iterator last,
                       BigramTable& out) {
  for (auto it = first; it != last; ++it) {
    const auto& ents = it->second;
    for (std::size_t i = 0; i < ents.size(); ++i) {
      for (std::size_t j = i + 1; j < ents.size(); ++j) {
        auto& b = out[ConceptPair(ents[i], ents[j])];
        ++b.frequency;
        b.postings.push_back(it->first);
      }
    }
  }
}

}  // namespace detail

/// One pass over publications; every unordered pair of a publication's
/// distinct entities gains one count and one posting. With `workers` > 1
/// contiguous chunks are mined in parallel and merged in chunk order, which
/// keeps postings sorted.
inline BigramTable mine_links(const PublicationEntities& publication_entities, unsigned workers = 1) {
  workers = std::max(1u, workers);
  const std::size_t n = publication_entities.size();
  if (workers == 1 || n < 2 * workers) {
    BigramTable out;
    detail::mine_range(publication_entities.begin(), publication_entities.end(), out);
    return out;
  }
  std::vector<BigramTable> parts(workers);
  std::vector<std::thread> threads;
  auto it = publication_entities.begin();
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t take = n / workers + (w < n % workers ? 1 : 0);
    auto first = it;
    std::advance(it, static_cast<long>(take));
    threads.emplace_back(detail::mine_range, first, it, std::ref(parts[w]));
  }
  for (auto& t : threads) t.join();
  BigramTable out = std::move(parts[0]);
  for (unsigned w = 1; w < workers; ++w) {
    for (auto& [pair, b] : parts[w]) {
      auto& dst = out[pair];
      dst.frequency += b.frequency;
      dst.postings.insert(dst.postings.end(), std::make_move_iterator(b.postings.begin()),
                          std::make_move_iterator(b.postings.end()));
    }
  }
  return out;
}

struct CoocEdge {
  std::string name;
  std::string a;  // concept_id, a < b
  std::string b;
  std::uint64_t frequency = 0;
  double pmi = 0.0;
  double npmi = 0.0;
  double cramers_v = 0.0;
  bool cramers_degenerate = false;

  friend bool operator==(const CoocEdge&, const CoocEdge&) = default;
};

/// Network tables: entities sorted by concept_id, edges by name.
struct CoocNetwork {
  std::vector<ConceptEntity> entities;
  std::vector<CoocEdge> edges;
  std::uint64_t n_docs = 0;
  double npmi_threshold = 0.0;

  const ConceptEntity* find_entity(std::string_view id) const {
    auto it = std::lower_bound(entities.begin(), entities.end(), id,
                               [](const ConceptEntity& e, std::string_view key) { return e.concept_id < key; });
    return it != entities.end() && it->concept_id == id ? &*it : nullptr;
  }

  const CoocEdge* find_edge(std::string_view name) const {
    auto it = std::lower_bound(edges.begin(), edges.end(), name,
                               [](const CoocEdge& e, std::string_view key) { return e.name < key; });
    return it != edges.end() && it->name == name ? &*it : nullptr;
  }

  friend bool operator==(const CoocNetwork&, const CoocNetwork&) = default;
};

struct ConnectivityReport {
  std::size_t components = 0;               // among non-isolated entities
  std::vector<std::size_t> component_sizes;  // descending
  std::size_t isolated_entities = 0;
  std::size_t pruned_edges = 0;
  std::vector<std::string> warnings;

  bool connected() const { return components <= 1; }

  nlohmann::json to_json() const {
    return {{"components", components},
            {"component_sizes", component_sizes},
            {"isolated_entities", isolated_entities},
            {"pruned_edges", pruned_edges},
            {"connected", connected()},
            {"warnings", warnings}};
  }
};

/// Union-find labelling over node indices; returns the component id of each node.
inline std::vector<std::size_t> component_labels(std::size_t nodes,
                                                 const std::vector<std::pair<std::size_t, std::size_t>>& links) {
  std::vector<std::size_t> parent(nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [u, v] : links) {
    auto ru = find(u), rv = find(v);
    if (ru != rv) parent[std::max(ru, rv)] = std::min(ru, rv);
  }
  std::vector<std::size_t> label(nodes);
  for (std::size_t i = 0; i < nodes; ++i) label[i] = find(i);
  return label;
}

struct Consolidated {
  CoocNetwork network;
  ConnectivityReport report;
};

/// Computes statistics for every bigram, drops edges with npmi <= threshold,
/// flags entities left without edges and reports the component structure.
/// A disconnected result produces a warning rather than an error.
inline Consolidated consolidate(const BigramTable& bigrams, std::vector<ConceptEntity> entities, std::uint64_t n_docs,
                                double npmi_threshold = 0.0) {
  Consolidated out;
  auto& net = out.network;
  net.n_docs = n_docs;
  net.npmi_threshold = npmi_threshold;
  std::sort(entities.begin(), entities.end(),
            [](const ConceptEntity& x, const ConceptEntity& y) { return x.concept_id < y.concept_id; });
  net.entities = std::move(entities);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < net.entities.size(); ++i) index.emplace(net.entities[i].concept_id, i);

  std::vector<bool> has_edge(net.entities.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> links;
  for (const auto& [pair, bigram] : bigrams) {
    auto ia = index.find(pair.first), ib = index.find(pair.second);
    if (ia == index.end() || ib == index.end())
      throw Error("consolidate: bigram endpoint missing from entity table: " + pair.first + ", " + pair.second);
    const auto& ea = net.entities[ia->second];
    const auto& eb = net.entities[ib->second];
    CoocEdge e;
    e.a = pair.first;
    e.b = pair.second;
    e.frequency = bigram.frequency;
    e.npmi = stats::npmi(ea.frequency, eb.frequency, bigram.frequency, n_docs);
    if (e.npmi <= npmi_threshold) {
      ++out.report.pruned_edges;
      continue;
    }
    e.pmi = stats::pmi(ea.frequency, eb.frequency, bigram.frequency, n_docs);
    auto v = stats::cramers_v(ea.frequency, eb.frequency, bigram.frequency, n_docs);
    e.cramers_v = v.value;
    e.cramers_degenerate = v.degenerate;
    e.name = edge_name(ea.name, eb.name);
    has_edge[ia->second] = has_edge[ib->second] = true;
    links.emplace_back(ia->second, ib->second);
    net.edges.push_back(std::move(e));
  }
  std::sort(net.edges.begin(), net.edges.end(), [](const CoocEdge& x, const CoocEdge& y) { return x.name < y.name; });
  auto clash = std::adjacent_find(net.edges.begin(), net.edges.end(),
                                  [](const CoocEdge& x, const CoocEdge& y) { return x.name == y.name; });
  if (clash != net.edges.end())
    throw Error("consolidate: relationship name '" + clash->name + "' is ambiguous (" + clash->a + ", " + clash->b +
                " and " + std::next(clash)->a + ", " + std::next(clash)->b + ")");

  auto labels = component_labels(net.entities.size(), links);
  std::map<std::size_t, std::size_t> sizes;
  for (std::size_t i = 0; i < net.entities.size(); ++i) {
    net.entities[i].isolated = !has_edge[i];
    if (has_edge[i])
      ++sizes[labels[i]];
    else
      ++out.report.isolated_entities;
  }
  auto& rep = out.report;
  rep.components = sizes.size();
  for (auto& [_, s] : sizes) rep.component_sizes.push_back(s);
  std::sort(rep.component_sizes.rbegin(), rep.component_sizes.rend());
  if (rep.components > 1)
    rep.warnings.push_back("network has " + std::to_string(rep.components) +
                           " connected components; some query relationships may be unreachable");
  if (rep.isolated_entities > 0)
    rep.warnings.push_back(std::to_string(rep.isolated_entities) + " entities have no surviving relationship");
  return out;
}

/// Adjacency view over a CoocNetwork; node i is network.entities[i].
class CoocGraph {
 public:
  struct Arc {
    std::uint32_t to;
    std::uint32_t edge;  // index into network.edges
  };

  explicit CoocGraph(const CoocNetwork& net) : net_(&net), adj_(net.entities.size()) {
    for (std::size_t i = 0; i < net.entities.size(); ++i) index_.emplace(net.entities[i].concept_id, i);
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      auto u = index_.at(net.edges[e].a);
      auto v = index_.at(net.edges[e].b);
      adj_[u].push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(e)});
      adj_[v].push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(e)});
    }
    for (auto& list : adj_) std::sort(list.begin(), list.end(), [](const Arc& x, const Arc& y) { return x.to < y.to; });
  }

  const CoocNetwork& network() const { return *net_; }
  std::size_t size() const { return adj_.size(); }
  const std::vector<Arc>& neighbors(std::size_t node) const { return adj_[node]; }

  std::optional<std::size_t> node(std::string_view concept_id) const {
    auto it = index_.find(std::string(concept_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::uint32_t> edge_between(std::size_t u, std::size_t v) const {
    const auto& list = adj_[u];
    auto it = std::lower_bound(list.begin(), list.end(), v, [](const Arc& a, std::size_t key) { return a.to < key; });
    if (it != list.end() && it->to == v) return it->edge;
    return std::nullopt;
  }

 private:
  const CoocNetwork* net_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<Arc>> adj_;
};

inline nlohmann::json to_json(const CoocEdge& e) {
  return {{"name", e.name},           {"a", e.a},
          {"b", e.b},                 {"frequency", e.frequency},
          {"pmi", e.pmi},             {"npmi", e.npmi},
          {"cramers_v", e.cramers_v}, {"cramers_degenerate", e.cramers_degenerate}};
}

inline CoocEdge edge_from_json(const nlohmann::json& j) {
  CoocEdge e;
  e.name = j.at("name").get<std::string>();
  e.a = j.at("a").get<std::string>();
  e.b = j.at("b").get<std::string>();
  e.frequency = j.at("frequency").get<std::uint64_t>();
  e.pmi = j.at("pmi").get<double>();
  e.npmi = j.at("npmi").get<double>();
  e.cramers_v = j.at("cramers_v").get<double>();
  e.cramers_degenerate = j.at("cramers_degenerate").get<bool>();
  return e;
}

}  // namespace graphsearch
