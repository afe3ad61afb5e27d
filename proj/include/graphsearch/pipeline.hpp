#pragma once

// Staged data-provision pipeline: ingest -> annotate -> build-network -> index.
// Every artifact is stamped with the pipeline hash (configuration plus the
// content of every input file); a stage refuses upstream artifacts that carry
// a different hash.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/annotator.hpp"
#include "graphsearch/common.hpp"
#include "graphsearch/corpus.hpp"
#include "graphsearch/index.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/storage.hpp"

namespace graphsearch::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kPublicationsFile = "publications.ndjson";
inline constexpr const char* kCleaningReportFile = "cleaning_report.json";
inline constexpr const char* kMentionsFile = "mentions.ndjson";
inline constexpr const char* kConceptsFile = "concepts.ndjson";
inline constexpr const char* kIndexFile = "index.cgsidx";

struct PipelineConfig {
  fs::path corpus_csv;
  std::vector<fs::path> dictionaries;
  std::optional<fs::path> citations;
  std::optional<fs::path> journals;
  fs::path data_dir = "data";

  ColumnMap columns;
  double similarity_threshold = 0.7;
  double npmi_prune = 0.0;
  std::size_t top_k_paths = 10;
  TokenizerConfig tokenizer;
  Date date_cutoff{2020, 1, 1, Date::Precision::day};
  std::vector<std::string> title_blocklist;
  double latin_max_foreign = 0.1;
  double keyword_max_df = 0.5;
  unsigned workers = 1;

  void validate() const {
    if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0))
      throw Error("config: similarity threshold must be in (0, 1]");
    if (!(npmi_prune >= -1.0 && npmi_prune < 1.0)) throw Error("config: npmi_prune must be in [-1, 1)");
    if (top_k_paths == 0) throw Error("config: top_k_paths must be positive");
    if (!(keyword_max_df > 0.0 && keyword_max_df <= 1.0)) throw Error("config: keyword_max_df must be in (0, 1]");
    if (!(latin_max_foreign >= 0.0 && latin_max_foreign <= 1.0)) throw Error("config: latin_max_foreign must be in [0, 1]");
  }

  /// Settings that influence artifact contents (paths and workers excluded).
  nlohmann::json settings_json() const {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& step : tokenizer.suffix_rules) {
      nlohmann::json s = nlohmann::json::array();
      for (const auto& r : step) s.push_back({r.suffix, r.replacement, r.min_stem});
      rules.push_back(s);
    }
    return {{"columns",
             {{"cord_uid", columns.cord_uid},
              {"title", columns.title},
              {"abstract", columns.abstract},
              {"publish_time", columns.publish_time},
              {"journal", columns.journal},
              {"authors", columns.authors},
              {"doi", columns.doi},
              {"source", columns.source}}},
            {"similarity_threshold", similarity_threshold},
            {"npmi_prune", npmi_prune},
            {"top_k_paths", top_k_paths},
            {"stopwords", tokenizer.stopwords},
            {"stem", tokenizer.stem},
            {"suffix_rules", rules},
            {"date_cutoff", date_cutoff.iso()},
            {"title_blocklist", title_blocklist},
            {"latin_max_foreign", latin_max_foreign},
            {"keyword_max_df", keyword_max_df}};
  }

  /// SHA-256 over settings_json() and the bytes of every input file.
  std::string hash() const {
    nlohmann::json h = {{"settings", settings_json()}};
    auto digest = [](const fs::path& p) { return io::sha256_hex(io::read_file(p)); };
    h["corpus"] = corpus_csv.empty() ? "" : digest(corpus_csv);
    nlohmann::json dicts = nlohmann::json::array();
    for (const auto& d : dictionaries) dicts.push_back(digest(d));
    h["dictionaries"] = dicts;
    h["citations"] = citations ? digest(*citations) : "";
    h["journals"] = journals ? digest(*journals) : "";
    return io::sha256_hex(h.dump());
  }

  /// Reads a JSON config; unknown keys are rejected. Relative input paths
  /// resolve against `base`.
  static PipelineConfig from_json(const nlohmann::json& j, const fs::path& base = {}) {
    PipelineConfig c;
    auto path = [&](const nlohmann::json& v) {
      fs::path p = v.get<std::string>();
      return p.is_relative() && !base.empty() ? base / p : p;
    };
    for (const auto& [key, v] : j.items()) {
      if (key == "corpus") c.corpus_csv = path(v);
      else if (key == "dictionaries") for (const auto& d : v) c.dictionaries.push_back(path(d));
      else if (key == "citations") c.citations = path(v);
      else if (key == "journals") c.journals = path(v);
      else if (key == "data_dir") c.data_dir = path(v);
      else if (key == "similarity_threshold") c.similarity_threshold = v.get<double>();
      else if (key == "npmi_prune") c.npmi_prune = v.get<double>();
      else if (key == "top_k_paths") c.top_k_paths = v.get<std::size_t>();
      else if (key == "stopwords") c.tokenizer.stopwords = v.get<std::set<std::string>>();
      else if (key == "stem") c.tokenizer.stem = v.get<bool>();
      else if (key == "suffix_rules") {
        c.tokenizer.suffix_rules.clear();
        for (const auto& step : v) {
          std::vector<SuffixRule> rules;
          for (const auto& r : step) rules.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>(), r.at(2).get<std::size_t>()});
          c.tokenizer.suffix_rules.push_back(std::move(rules));
        }
      }
      else if (key == "date_cutoff") {
        auto d = Date::parse(v.get<std::string>());
        if (!d) throw Error("config: bad date_cutoff");
        c.date_cutoff = *d;
      }
      else if (key == "title_blocklist") c.title_blocklist = v.get<std::vector<std::string>>();
      else if (key == "latin_max_foreign") c.latin_max_foreign = v.get<double>();
      else if (key == "keyword_max_df") c.keyword_max_df = v.get<double>();
      else if (key == "workers") c.workers = v.get<unsigned>();
      else if (key == "columns") {
        auto& m = c.columns;
        for (const auto& [ck, cv] : v.items()) {
          auto s = cv.get<std::string>();
          if (ck == "cord_uid") m.cord_uid = s;
          else if (ck == "title") m.title = s;
          else if (ck == "abstract") m.abstract = s;
          else if (ck == "publish_time") m.publish_time = s;
          else if (ck == "journal") m.journal = s;
          else if (ck == "authors") m.authors = s;
          else if (ck == "doi") m.doi = s;
          else if (ck == "source") m.source = s;
          else throw Error("config: unknown column key '" + ck + "'");
        }
      }
      else throw Error("config: unknown key '" + key + "'");
    }
    return c;
  }

  static PipelineConfig load(const fs::path& file) {
    auto j = nlohmann::json::parse(io::read_file(file));
    return from_json(j, file.parent_path());
  }
};

struct StageReport {
  std::string stage;
  nlohmann::json details;
};

namespace detail {

inline void require(const fs::path& p, std::string_view stage) {
  if (!fs::exists(p)) throw Error(std::string(stage) + ": missing upstream artifact " + p.string());
}

inline void check_hash(std::string_view found, std::string_view expected, const fs::path& artifact) {
  if (found != expected)
    throw ConfigMismatchError(artifact.string() + " was produced by pipeline " + std::string(found) +
                              ", current configuration is " + std::string(expected) + "; rerun the upstream stages");
}

}  // namespace detail

inline StageReport run_ingest(const PipelineConfig& cfg, const std::string& hash) {
  auto parsed = parse_metadata(cfg.corpus_csv, cfg.columns);
  LatinScriptDetector detector(cfg.latin_max_foreign);
  JournalTable journals = cfg.journals ? JournalTable::load(*cfg.journals, cfg.similarity_threshold) : JournalTable();
  CleanConfig clean{cfg.date_cutoff, cfg.title_blocklist};
  auto cleaned = clean_and_dedupe(parsed.rows, detector, journals, clean);
  SnapshotCitationClient client = cfg.citations ? SnapshotCitationClient::load(*cfg.citations) : SnapshotCitationClient();
  AugmentReport aug;
  auto records = augment(std::move(cleaned.records), client, journals, &aug);

  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : parsed.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  nlohmann::json report = cleaned.report.to_json();
  report["parse_errors"] = errors;
  report["citations_resolved"] = aug.citations_resolved;
  report["citation_failures"] = aug.citation_failures;
  report["journals_resolved"] = aug.journals_resolved;
  report["config_hash"] = hash;

  storage::save_publications(cfg.data_dir / kPublicationsFile, records, hash);
  io::write_file_atomic(cfg.data_dir / kCleaningReportFile, report.dump(2) + "\n");
  return {"ingest", report};
}

inline StageReport run_annotate(const PipelineConfig& cfg, const std::string& hash) {
  auto pubs_path = cfg.data_dir / kPublicationsFile;
  detail::require(pubs_path, "annotate");
  std::string upstream;
  auto pubs = storage::load_publications(pubs_path, &upstream);
  detail::check_hash(upstream, hash, pubs_path);

  Dictionary dict;
  for (const auto& d : cfg.dictionaries) dict.load(d);
  EntityMatcher matcher(dict, cfg.tokenizer);
  auto mentions = mine_corpus(pubs, matcher, cfg.similarity_threshold);
  auto concepts = curate_entities(mentions, dict, cfg.similarity_threshold);

  nlohmann::json extra = {{"similarity", "normalized levenshtein on tokenized, stemmed forms"},
                          {"similarity_threshold", cfg.similarity_threshold}};
  storage::save_mentions(cfg.data_dir / kMentionsFile, mentions, hash, extra);
  storage::save_concepts(cfg.data_dir / kConceptsFile, concepts, hash);
  return {"annotate", {{"publications", pubs.size()},
                       {"dictionary_entries", dict.entries().size()},
                       {"mentions", mentions.size()},
                       {"concepts", concepts.size()}}};
}

struct AnnotatedInputs {
  PublicationTable pubs;
  std::vector<RawEntityMention> mentions;
  std::vector<ConceptEntity> concepts;
};

inline AnnotatedInputs load_annotated(const PipelineConfig& cfg, const std::string& hash, std::string_view stage) {
  AnnotatedInputs in;
  std::string h;
  for (const char* f : {kPublicationsFile, kMentionsFile, kConceptsFile}) detail::require(cfg.data_dir / f, stage);
  in.pubs = storage::load_publications(cfg.data_dir / kPublicationsFile, &h);
  detail::check_hash(h, hash, cfg.data_dir / kPublicationsFile);
  in.mentions = storage::load_mentions(cfg.data_dir / kMentionsFile, &h);
  detail::check_hash(h, hash, cfg.data_dir / kMentionsFile);
  in.concepts = storage::load_concepts(cfg.data_dir / kConceptsFile, &h);
  detail::check_hash(h, hash, cfg.data_dir / kConceptsFile);
  return in;
}

inline StageReport run_build_network(const PipelineConfig& cfg, const std::string& hash) {
  auto in = load_annotated(cfg, hash, "build-network");
  auto tables = build_lookup_tables(in.mentions, &in.concepts);
  auto bigrams = mine_links(tables.publication_entities, cfg.workers);
  auto result = consolidate(bigrams, in.concepts, in.pubs.size(), cfg.npmi_prune);
  auto report = result.report.to_json();
  storage::save_network(cfg.data_dir, result.network, hash, {{"connectivity", report}});
  return {"build-network", {{"entities", result.network.entities.size()},
                            {"edges", result.network.edges.size()},
                            {"bigrams", bigrams.size()},
                            {"connectivity", report}}};
}

inline StageReport run_index(const PipelineConfig& cfg, const std::string& hash) {
  auto in = load_annotated(cfg, hash, "index");
  detail::require(cfg.data_dir / storage::kNetworkHeader, "index");
  nlohmann::json header;
  auto net = storage::load_network(cfg.data_dir, &header);
  detail::check_hash(header.at("config_hash").get<std::string>(), hash, cfg.data_dir / storage::kNetworkHeader);

  auto tables = build_lookup_tables(in.mentions, &in.concepts);
  auto bigrams = mine_links(tables.publication_entities, cfg.workers);
  storage::IndexBundle bundle;
  bundle.inverted = build_inverted_index(bigrams, net);
  bundle.keyword = build_keyword_index(in.pubs, cfg.tokenizer, cfg.keyword_max_df);
  bundle.config_hash = hash;
  storage::save_index(cfg.data_dir / kIndexFile, bundle);
  return {"index", {{"relationship_keys", bundle.inverted.postings.size()},
                    {"keyword_tokens", bundle.keyword.postings.size()},
                    {"keyword_excluded", bundle.keyword.excluded.size()}}};
}

inline std::vector<StageReport> run_all(const PipelineConfig& cfg) {
  cfg.validate();
  auto hash = cfg.hash();
  return {run_ingest(cfg, hash), run_annotate(cfg, hash), run_build_network(cfg, hash), run_index(cfg, hash)};
}

/// Everything a query needs, loaded from a data directory and cross-checked.
struct Artifacts {
  PublicationTable pubs;
  CoocNetwork network;
  storage::IndexBundle index;
  std::string config_hash;
  nlohmann::json network_header;
};

inline Artifacts load_artifacts(const fs::path& dir) {
  Artifacts a;
  for (const char* f : {kPublicationsFile, storage::kNetworkHeader, kIndexFile}) detail::require(dir / f, "load");
  std::string pubs_hash;
  a.pubs = storage::load_publications(dir / kPublicationsFile, &pubs_hash);
  a.network = storage::load_network(dir, &a.network_header);
  a.index = storage::load_index(dir / kIndexFile);
  a.config_hash = pubs_hash;
  detail::check_hash(a.network_header.at("config_hash").get<std::string>(), pubs_hash, dir / storage::kNetworkHeader);
  detail::check_hash(a.index.config_hash, pubs_hash, dir / kIndexFile);
  return a;
}

}  // namespace graphsearch::pipeline
