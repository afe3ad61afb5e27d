#pragma once

// Relationship inverted index and the full-text keyword baseline.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "graphsearch/corpus.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/text.hpp"

namespace graphsearch {

/// Canonical relationship name -> sorted pub_ids.
struct InvertedIndex {
  std::map<std::string, std::vector<std::string>, std::less<>> postings;
  std::uint64_t doc_count = 0;

  friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;
};

/// Keys are exactly the network's edges; each posting list comes from the
/// bigram table, so its length equals the edge frequency.
inline InvertedIndex build_inverted_index(const BigramTable& bigrams, const CoocNetwork& network) {
  InvertedIndex idx;
  idx.doc_count = network.n_docs;
  for (const auto& e : network.edges) {
    auto it = bigrams.find(ConceptPair(e.a, e.b));
    if (it == bigrams.end()) throw Error("build_inverted_index: no postings for edge " + e.name);
    if (it->second.postings.size() != e.frequency)
      throw Error("build_inverted_index: postings of " + e.name + " disagree with its frequency");
    idx.postings.emplace(e.name, it->second.postings);
  }
  return idx;
}

/// Postings of a canonical relationship name; empty when absent. Names are
/// not canonicalized here.
inline const std::vector<std::string>& lookup(const InvertedIndex& index, std::string_view edge_name) {
  static const std::vector<std::string> empty;
  auto it = index.postings.find(edge_name);
  return it == index.postings.end() ? empty : it->second;
}

/// Token -> sorted pub_ids over normalized title + abstract tokens. Tokens in
/// at least `max_df_fraction` of the documents are left out of the index.
struct KeywordIndex {
  std::map<std::string, std::vector<std::string>, std::less<>> postings;
  std::map<std::string, std::uint64_t, std::less<>> excluded;  // token -> document frequency
  std::uint64_t doc_count = 0;
  double max_df_fraction = 0.5;

  std::uint64_t document_frequency(std::string_view token) const {
    if (auto it = postings.find(token); it != postings.end()) return it->second.size();
    if (auto it = excluded.find(token); it != excluded.end()) return it->second;
    return 0;
  }

  friend bool operator==(const KeywordIndex&, const KeywordIndex&) = default;
};

inline KeywordIndex build_keyword_index(const PublicationTable& pubs, const TokenizerConfig& tokenizer = {},
                                        double max_df_fraction = 0.5) {
  std::map<std::string, std::set<std::string>, std::less<>> df;
  for (const auto& p : pubs) {
    for (const auto& tok : tokenize_normalize(p.title, tokenizer)) df[tok.text].insert(p.pub_id);
    for (const auto& tok : tokenize_normalize(p.abstract, tokenizer)) df[tok.text].insert(p.pub_id);
  }
  KeywordIndex idx;
  idx.doc_count = pubs.size();
  idx.max_df_fraction = max_df_fraction;
  for (auto& [tok, ids] : df) {
    if (static_cast<double>(ids.size()) >= max_df_fraction * static_cast<double>(idx.doc_count))
      idx.excluded.emplace(tok, ids.size());
    else
      idx.postings.emplace(tok, std::vector<std::string>(ids.begin(), ids.end()));
  }
  return idx;
}

enum class KeywordMode { conjunctive, disjunctive };

struct KeywordHit {
  std::string pub_id;
  std::size_t matched_terms = 0;

  friend bool operator==(const KeywordHit&, const KeywordHit&) = default;
};

struct KeywordResult {
  std::vector<KeywordHit> hits;
  std::vector<std::string> ignored_terms;  // excluded by the document-frequency rule
  std::string ranking = "match-count";
};

/// `terms` must already be normalized with the index tokenizer. Excluded
/// tokens are ignored in both modes. Conjunctive results are ordered by
/// pub_id; disjunctive ones by matched-term count, then pub_id.
inline KeywordResult keyword_search(const KeywordIndex& index, std::vector<std::string> terms, KeywordMode mode) {
  KeywordResult result;
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  std::vector<const std::vector<std::string>*> lists;
  bool missing = false;
  for (const auto& t : terms) {
    if (index.excluded.contains(t)) {
      result.ignored_terms.push_back(t);
      continue;
    }
    auto it = index.postings.find(t);
    if (it == index.postings.end()) {
      missing = true;
      continue;
    }
    lists.push_back(&it->second);
  }
  if (lists.empty()) return result;

  if (mode == KeywordMode::conjunctive) {
    if (missing) return result;
    std::sort(lists.begin(), lists.end(), [](auto* a, auto* b) { return a->size() < b->size(); });
    std::vector<std::string> acc = *lists[0];
    for (std::size_t i = 1; i < lists.size() && !acc.empty(); ++i) {
      std::vector<std::string> next;
      std::set_intersection(acc.begin(), acc.end(), lists[i]->begin(), lists[i]->end(), std::back_inserter(next));
      acc = std::move(next);
    }
    for (auto& id : acc) result.hits.push_back({std::move(id), lists.size()});
    return result;
  }

  std::map<std::string, std::size_t> counts;
  for (const auto* list : lists)
    for (const auto& id : *list) ++counts[id];
  for (auto& [id, c] : counts) result.hits.push_back({id, c});
  std::stable_sort(result.hits.begin(), result.hits.end(),
                   [](const KeywordHit& a, const KeywordHit& b) { return a.matched_terms > b.matched_terms; });
  return result;
}

/// Tokenizes free text with the same rules as the index, then searches.
inline KeywordResult keyword_query(const KeywordIndex& index, std::string_view query, KeywordMode mode,
                                   const TokenizerConfig& tokenizer = {}) {
  std::vector<std::string> terms;
  for (auto& tok : tokenize_normalize(query, tokenizer)) terms.push_back(std::move(tok.text));
  return keyword_search(index, std::move(terms), mode);
}

}  // namespace graphsearch
