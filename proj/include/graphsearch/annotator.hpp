#pragma once

// Dictionary-driven concept recognition and linking over title + abstract.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/common.hpp"
#include "graphsearch/corpus.hpp"
#include "graphsearch/text.hpp"

namespace graphsearch {

enum class OntologySource { umls, cido, utility };

inline std::string_view to_string(OntologySource s) {
  switch (s) {
    case OntologySource::umls: return "UMLS";
    case OntologySource::cido: return "CIDO";
    case OntologySource::utility: return "UTILITY";
  }
  return "UMLS";
}

inline OntologySource source_from_string(std::string_view s) {
  auto lower = text::to_lower(s);
  if (lower == "umls") return OntologySource::umls;
  if (lower == "cido") return OntologySource::cido;
  if (lower == "utility") return OntologySource::utility;
  throw FormatError("unknown ontology source '" + std::string(s) + "'");
}

inline constexpr std::array<std::string_view, 17> kMacrocategories = {
    "ACTIVITIES_AND_BEHAVIORS", "ANATOMY",   "CHEMICALS_AND_DRUGS",
    "CONCEPTS_AND_IDEAS",       "DEVICES",   "DISORDERS",
    "ENTITY",                   "GENES_AND_MOLECULAR_SEQUENCES",
    "GEOGRAPHIC_AREAS",         "LIVING_BEINGS",
    "OBJECTS",                  "OCCUPATIONS",
    "ORGANIZATIONS",            "PHENOMENA", "PHYSIOLOGY",
    "PROCEDURES",               "UTILITY"};

inline bool is_macrocategory(std::string_view s) {
  return std::find(kMacrocategories.begin(), kMacrocategories.end(), s) != kMacrocategories.end();
}

struct OntologyEntry {
  std::string concept_id;
  std::string canonical_name;
  std::vector<std::string> synonyms;
  OntologySource source = OntologySource::umls;
  std::string semantic_type;
  std::string macrocategory;
  std::string description;

  friend bool operator==(const OntologyEntry&, const OntologyEntry&) = default;
};

/// Concept dictionary merged from one or more TSV files, sorted by concept_id.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::vector<OntologyEntry> entries) {
    for (auto& e : entries) add(std::move(e));
  }

  void add(OntologyEntry e) {
    if (e.concept_id.empty()) throw FormatError("dictionary: empty concept_id");
    if (text::trim(e.canonical_name).empty()) throw FormatError("dictionary: " + e.concept_id + " has no name");
    if (!is_macrocategory(e.macrocategory))
      throw FormatError("dictionary: " + e.concept_id + " has unknown macrocategory '" + e.macrocategory + "'");
    auto it = std::lower_bound(entries_.begin(), entries_.end(), e.concept_id,
                               [](const OntologyEntry& a, const std::string& id) { return a.concept_id < id; });
    if (it != entries_.end() && it->concept_id == e.concept_id)
      throw FormatError("dictionary: duplicate concept_id " + e.concept_id);
    entries_.insert(it, std::move(e));
  }

  /// Columns: concept_id, canonical_name, synonyms (pipe-separated), source,
  /// semantic_type, macrocategory, and an optional description. A header row
  /// whose first cell is "concept_id" is skipped.
  void load(const std::filesystem::path& path) {
    auto data = io::read_file(path);
    std::size_t lineno = 0;
    for (auto& line : text::split(data, '\n')) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty() || line.starts_with('#')) continue;
      auto cols = text::split(line, '\t');
      if (lineno == 1 && cols[0] == "concept_id") continue;
      if (cols.size() < 6 || cols.size() > 7)
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 6 or 7 tab-separated columns");
      OntologyEntry e;
      e.concept_id = std::string(text::trim(cols[0]));
      e.canonical_name = std::string(text::trim(cols[1]));
      for (auto& s : text::split(cols[2], '|')) {
        auto t = text::trim(s);
        if (!t.empty()) e.synonyms.emplace_back(t);
      }
      e.source = source_from_string(text::trim(cols[3]));
      e.semantic_type = std::string(text::trim(cols[4]));
      e.macrocategory = std::string(text::trim(cols[5]));
      if (cols.size() == 7) e.description = std::string(text::trim(cols[6]));
      try {
        add(std::move(e));
      } catch (const FormatError& err) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + err.what());
      }
    }
  }

  const std::vector<OntologyEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  const OntologyEntry* find(std::string_view id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const OntologyEntry& a, std::string_view key) { return a.concept_id < key; });
    return it != entries_.end() && it->concept_id == id ? &*it : nullptr;
  }

 private:
  std::vector<OntologyEntry> entries_;
};

/// One recognized concept occurrence. Offsets index into document_text().
struct RawEntityMention {
  std::string pub_id;
  std::string surface_text;
  std::string concept_id;
  double similarity = 0.0;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const RawEntityMention&, const RawEntityMention&) = default;
};

/// Title and abstract joined by a newline; mention spans refer to this text.
inline std::string document_text(const PublicationRecord& r) { return r.title + "\n" + r.abstract; }

/// Precomputed normalized names of a dictionary, for repeated matching.
class EntityMatcher {
 public:
  EntityMatcher(const Dictionary& dict, TokenizerConfig config = {}) : dict_(&dict), config_(std::move(config)) {
    const auto& entries = dict.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::vector<std::string> names{entries[i].canonical_name};
      names.insert(names.end(), entries[i].synonyms.begin(), entries[i].synonyms.end());
      for (const auto& name : names) {
        auto toks = tokenize_normalize(name, config_);
        if (toks.empty()) continue;
        std::string norm;
        for (const auto& t : toks) norm += (norm.empty() ? "" : " ") + t.text;
        max_tokens_ = std::max(max_tokens_, toks.size());
        auto& bucket = exact_[norm];
        if (std::find(bucket.begin(), bucket.end(), i) == bucket.end()) bucket.push_back(i);
        auto u = text::utf8_decode(norm);
        by_length_[u.size()].push_back({std::move(u), i});
      }
    }
  }

  const Dictionary& dictionary() const { return *dict_; }
  const TokenizerConfig& tokenizer() const { return config_; }
  std::size_t max_tokens() const { return max_tokens_; }

  struct Hit {
    std::size_t entry = 0;
    double similarity = 0.0;
  };

  /// Best dictionary entry for a normalized phrase: highest similarity, then
  /// lowest concept_id.
  std::optional<Hit> best(std::string_view normalized, double threshold) const {
    if (auto it = exact_.find(std::string(normalized)); it != exact_.end())
      return Hit{*std::min_element(it->second.begin(), it->second.end()), 1.0};
    if (threshold >= 1.0) return std::nullopt;
    auto key = text::utf8_decode(normalized);
    // sim >= t needs t*len <= other_len <= len/t
    auto lo = static_cast<std::size_t>(std::ceil(threshold * static_cast<double>(key.size()) - 1e-9));
    auto hi = static_cast<std::size_t>(std::floor(static_cast<double>(key.size()) / threshold + 1e-9));
    std::optional<Hit> best;
    for (auto it = by_length_.lower_bound(lo); it != by_length_.end() && it->first <= hi; ++it) {
      for (const auto& [name, idx] : it->second) {
        double s = similarity(key, name);
        if (s < threshold) continue;
        if (!best || s > best->similarity || (s == best->similarity && idx < best->entry)) best = Hit{idx, s};
      }
    }
    return best;
  }

 private:
  const Dictionary* dict_;
  TokenizerConfig config_;
  std::size_t max_tokens_ = 0;
  std::unordered_map<std::string, std::vector<std::size_t>> exact_;
  std::map<std::size_t, std::vector<std::pair<std::u32string, std::size_t>>> by_length_;
};

/// Scans token windows of 1..max_tokens over the title and the abstract
/// (windows never straddle the two) and links each to its best entry.
/// Overlaps resolve longest span first, then similarity, then concept_id.
inline std::vector<RawEntityMention> mine_entities(const PublicationRecord& record, const EntityMatcher& matcher,
                                                   double threshold = 0.7) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("mine_entities: threshold must be in (0,1]");
  std::vector<RawEntityMention> out;
  if (matcher.dictionary().empty()) return out;
  const std::string doc = document_text(record);

  struct Candidate {
    std::size_t start, end;
    double sim;
    std::size_t entry;
  };
  std::vector<Candidate> cands;
  auto scan = [&](std::size_t offset, std::string_view segment) {
    auto toks = tokenize_normalize(segment, matcher.tokenizer());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      std::string phrase;
      for (std::size_t len = 1; len <= matcher.max_tokens() && i + len <= toks.size(); ++len) {
        if (len > 1) phrase.push_back(' ');
        phrase += toks[i + len - 1].text;
        if (auto hit = matcher.best(phrase, threshold))
          cands.push_back({offset + toks[i].start, offset + toks[i + len - 1].end, hit->similarity, hit->entry});
      }
    }
  };
  scan(0, record.title);
  scan(record.title.size() + 1, record.abstract);

  const auto& entries = matcher.dictionary().entries();
  std::sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    auto la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.entry != b.entry) return entries[a.entry].concept_id < entries[b.entry].concept_id;
    return a.start < b.start;
  });
  std::vector<Candidate> accepted;
  for (const auto& c : cands) {
    bool overlaps = std::any_of(accepted.begin(), accepted.end(),
                                [&](const Candidate& a) { return c.start < a.end && a.start < c.end; });
    if (!overlaps) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end(), [](const Candidate& a, const Candidate& b) { return a.start < b.start; });
  out.reserve(accepted.size());
  for (const auto& c : accepted) {
    out.push_back(RawEntityMention{record.pub_id, doc.substr(c.start, c.end - c.start), entries[c.entry].concept_id,
                                   c.sim, c.start, c.end});
  }
  return out;
}

/// Mentions of every publication, sorted by (pub_id, start).
inline std::vector<RawEntityMention> mine_corpus(const PublicationTable& pubs, const EntityMatcher& matcher,
                                                 double threshold = 0.7) {
  std::vector<RawEntityMention> all;
  for (const auto& p : pubs) {
    auto m = mine_entities(p, matcher, threshold);
    all.insert(all.end(), std::make_move_iterator(m.begin()), std::make_move_iterator(m.end()));
  }
  std::stable_sort(all.begin(), all.end(), [](const RawEntityMention& a, const RawEntityMention& b) {
    return std::tie(a.pub_id, a.start) < std::tie(b.pub_id, b.start);
  });
  return all;
}

/// A network node: a linked concept with its document frequency.
struct ConceptEntity {
  std::string concept_id;
  std::string name;
  std::vector<std::string> synonyms;
  std::optional<std::string> umls_id;
  std::optional<std::string> cido_id;
  OntologySource source = OntologySource::umls;
  std::string semantic_type;
  std::string macrocategory;
  std::string description;
  std::uint64_t frequency = 0;  // distinct publications
  bool isolated = false;        // set by consolidation when no edge survives

  friend bool operator==(const ConceptEntity&, const ConceptEntity&) = default;
};

/// Aggregates mentions into one entity per concept, counting distinct
/// publications. Entities sharing a display name get " [concept_id]"
/// appended so relationship names stay unique.
inline std::vector<ConceptEntity> curate_entities(const std::vector<RawEntityMention>& mentions, const Dictionary& dict,
                                                  double threshold = 0.7) {
  std::map<std::string, std::set<std::string>> pubs_by_concept;
  for (const auto& m : mentions) {
    if (m.similarity < threshold) continue;
    pubs_by_concept[m.concept_id].insert(m.pub_id);
  }
  std::vector<ConceptEntity> out;
  std::map<std::string, std::size_t> name_count;
  for (const auto& [id, pubs] : pubs_by_concept) {
    const auto* entry = dict.find(id);
    if (!entry) throw Error("curate_entities: concept " + id + " not in dictionary");
    ConceptEntity e;
    e.concept_id = id;
    e.name = entry->canonical_name;
    e.synonyms = entry->synonyms;
    e.source = entry->source;
    if (entry->source == OntologySource::umls) e.umls_id = id;
    if (entry->source == OntologySource::cido) e.cido_id = id;
    e.semantic_type = entry->semantic_type;
    e.macrocategory = entry->macrocategory;
    e.description = entry->description;
    e.frequency = pubs.size();
    ++name_count[e.name];
    out.push_back(std::move(e));
  }
  for (auto& e : out) {
    if (name_count[e.name] > 1) e.name += " [" + e.concept_id + "]";
  }
  return out;
}

// ---- serialization ----

inline nlohmann::json to_json(const RawEntityMention& m) {
  return {{"pub_id", m.pub_id}, {"surface_text", m.surface_text}, {"concept_id", m.concept_id},
          {"similarity", m.similarity}, {"start", m.start}, {"end", m.end}};
}

inline RawEntityMention mention_from_json(const nlohmann::json& j) {
  return RawEntityMention{j.at("pub_id").get<std::string>(), j.at("surface_text").get<std::string>(),
                          j.at("concept_id").get<std::string>(), j.at("similarity").get<double>(),
                          j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
}

inline nlohmann::json to_json(const ConceptEntity& e) {
  auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); };
  return {{"concept_id", e.concept_id},
          {"name", e.name},
          {"synonyms", e.synonyms},
          {"umls_id", opt(e.umls_id)},
          {"cido_id", opt(e.cido_id)},
          {"source", to_string(e.source)},
          {"semantic_type", e.semantic_type},
          {"macrocategory", e.macrocategory},
          {"description", e.description},
          {"frequency", e.frequency},
          {"isolated", e.isolated}};
}

inline ConceptEntity entity_from_json(const nlohmann::json& j) {
  auto opt = [&](const char* key) -> std::optional<std::string> {
    return j.at(key).is_null() ? std::nullopt : std::optional<std::string>(j.at(key).get<std::string>());
  };
  ConceptEntity e;
  e.concept_id = j.at("concept_id").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.synonyms = j.at("synonyms").get<std::vector<std::string>>();
  e.umls_id = opt("umls_id");
  e.cido_id = opt("cido_id");
  e.source = source_from_string(j.at("source").get<std::string>());
  e.semantic_type = j.at("semantic_type").get<std::string>();
  e.macrocategory = j.at("macrocategory").get<std::string>();
  e.description = j.at("description").get<std::string>();
  e.frequency = j.at("frequency").get<std::uint64_t>();
  e.isolated = j.at("isolated").get<bool>();
  return e;
}

}  // namespace graphsearch
