#pragma once

// Corpus ingestion: metadata CSV parsing, cleaning, deduplication and
// augmentation into the canonical publication table.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/common.hpp"
#include "graphsearch/csv.hpp"
#include "graphsearch/text.hpp"

namespace graphsearch {

/// One metadata row exactly as read; nothing is interpreted yet.
struct RawMetadataRow {
  std::string cord_uid;
  std::string title;
  std::string abstract;
  std::string publish_time;
  std::string journal_abbrev;
  std::string authors;
  std::string doi;
  std::set<std::string> source_flags;
  std::size_t line = 0;

  friend bool operator==(const RawMetadataRow&, const RawMetadataRow&) = default;
};

struct PublicationRecord {
  std::string pub_id;
  std::string title;
  std::string abstract;
  Date publish_date;
  std::optional<std::string> journal;
  std::vector<std::string> authors;
  std::optional<std::string> doi;
  std::optional<std::uint64_t> num_cited_by;

  friend bool operator==(const PublicationRecord&, const PublicationRecord&) = default;
};

/// Publication table sorted by pub_id.
using PublicationTable = std::vector<PublicationRecord>;

/// Column names of the metadata CSV. Empty optional columns are skipped.
struct ColumnMap {
  std::string cord_uid = "cord_uid";
  std::string title = "title";
  std::string abstract = "abstract";
  std::string publish_time = "publish_time";
  std::string journal = "journal";
  std::string authors = "authors";
  std::string doi = "doi";
  std::string source = "source_x";
};

struct ParseError {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<RawMetadataRow> rows;
  std::vector<ParseError> errors;
};

/// Streams rows of a metadata CSV into `sink`; malformed rows go to `errors`.
/// Throws when the file is missing or a mandatory column is absent.
inline void parse_metadata(std::string_view data, const ColumnMap& columns,
                           const std::function<void(RawMetadataRow)>& sink,
                           const std::function<void(ParseError)>& errors) {
  csv::Reader reader(data);
  std::optional<csv::RecordError> err;
  auto header = reader.next(err);
  if (!header || err) throw FormatError("metadata: missing or unreadable header row");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header->fields.size(); ++i) index.emplace(std::string(text::trim(header->fields[i])), i);

  auto mandatory = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw FormatError("metadata: missing mandatory column '" + name + "'");
    return static_cast<long>(it->second);
  };
  auto optional = [&](const std::string& name) -> long {
    if (name.empty()) return -1;
    auto it = index.find(name);
    return it == index.end() ? -1 : static_cast<long>(it->second);
  };
  const long c_uid = mandatory(columns.cord_uid);
  const long c_title = mandatory(columns.title);
  const long c_abstract = mandatory(columns.abstract);
  const long c_time = mandatory(columns.publish_time);
  const long c_journal = optional(columns.journal);
  const long c_authors = optional(columns.authors);
  const long c_doi = optional(columns.doi);
  const long c_source = optional(columns.source);

  while (auto rec = reader.next(err)) {
    if (err) {
      errors(ParseError{err->line, err->message});
      continue;
    }
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;  // blank line
    if (rec->fields.size() != header->fields.size()) {
      errors(ParseError{rec->line, "expected " + std::to_string(header->fields.size()) + " fields, found " +
                                       std::to_string(rec->fields.size())});
      continue;
    }
    auto get = [&](long col) { return col < 0 ? std::string() : rec->fields[static_cast<std::size_t>(col)]; };
    RawMetadataRow row;
    row.cord_uid = std::string(text::trim(get(c_uid)));
    if (row.cord_uid.empty()) {
      errors(ParseError{rec->line, "empty cord_uid"});
      continue;
    }
    row.title = get(c_title);
    row.abstract = get(c_abstract);
    row.publish_time = get(c_time);
    row.journal_abbrev = get(c_journal);
    row.authors = get(c_authors);
    row.doi = get(c_doi);
    for (auto& flag : text::split(get(c_source), ';')) {
      auto f = text::trim(flag);
      if (!f.empty()) row.source_flags.emplace(f);
    }
    row.line = rec->line;
    sink(std::move(row));
  }
}

inline ParseResult parse_metadata(const std::filesystem::path& path, const ColumnMap& columns = {}) {
  if (!std::filesystem::exists(path)) throw Error("metadata file not found: " + path.string());
  auto data = io::read_file(path);
  ParseResult result;
  parse_metadata(
      data, columns, [&](RawMetadataRow row) { result.rows.push_back(std::move(row)); },
      [&](ParseError e) { result.errors.push_back(std::move(e)); });
  return result;
}

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual bool is_english(std::string_view text) const = 0;
};

/// Accepts text whose letters are predominantly Latin script (up to U+024F).
/// `max_foreign_fraction` bounds the share of letters outside that range.
class LatinScriptDetector final : public LanguageDetector {
 public:
  explicit LatinScriptDetector(double max_foreign_fraction = 0.1) : max_foreign_(max_foreign_fraction) {}

  bool is_english(std::string_view text) const override {
    std::size_t letters = 0, foreign = 0;
    for (char32_t cp : text::utf8_decode(text)) {
      bool ascii_letter = cp < 0x80 && std::isalpha(static_cast<int>(cp));
      if (ascii_letter || (cp >= 0xC0 && cp <= 0x24F)) {
        ++letters;
      } else if (cp >= 0x370) {
        ++letters;
        ++foreign;
      }
    }
    if (letters == 0) return true;
    return static_cast<double>(foreign) / static_cast<double>(letters) <= max_foreign_;
  }

 private:
  double max_foreign_;
};

/// Accepts everything except the listed titles; for tests and overrides.
class DenylistDetector final : public LanguageDetector {
 public:
  explicit DenylistDetector(std::set<std::string> non_english) : deny_(std::move(non_english)) {}
  bool is_english(std::string_view text) const override { return !deny_.contains(std::string(text)); }

 private:
  std::set<std::string> deny_;
};

/// Resolves journal abbreviations to full names by fuzzy matching.
class JournalTable {
 public:
  struct Entry {
    std::string abbreviation;
    std::string full_name;
  };

  JournalTable() = default;
  explicit JournalTable(std::vector<Entry> entries, double threshold = 0.7) : threshold_(threshold) {
    for (auto& e : entries) add(std::move(e));
  }

  /// Two-column TSV: abbreviation, full name.
  static JournalTable load(const std::filesystem::path& path, double threshold = 0.7) {
    std::vector<Entry> entries;
    for (auto& line : text::split(io::read_file(path), '\n')) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty()) continue;
      auto cols = text::split(line, '\t');
      if (cols.size() != 2) throw FormatError("journal table: expected 2 tab-separated columns in '" + line + "'");
      entries.push_back({std::string(text::trim(cols[0])), std::string(text::trim(cols[1]))});
    }
    return JournalTable(std::move(entries), threshold);
  }

  void add(Entry e) {
    keys_.push_back({normalize(e.abbreviation), entries_.size()});
    keys_.push_back({normalize(e.full_name), entries_.size()});
    entries_.push_back(std::move(e));
  }

  bool empty() const { return entries_.empty(); }
  double threshold() const { return threshold_; }

  /// Lowercase, punctuation to spaces, whitespace collapsed.
  static std::u32string normalize(std::string_view name) {
    std::string out;
    for (char c : name) {
      auto u = static_cast<unsigned char>(c);
      char mapped = (std::isalnum(u) || u >= 0x80) ? static_cast<char>(std::tolower(u)) : ' ';
      if (mapped == ' ' && (out.empty() || out.back() == ' ')) continue;
      out.push_back(mapped);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return text::utf8_decode(out);
  }

  struct Match {
    std::string full_name;
    double similarity = 0.0;
  };

  /// Best entry with similarity >= threshold; ties keep the earliest entry.
  std::optional<Match> resolve(std::string_view name) const {
    auto key = normalize(name);
    if (key.empty()) return std::nullopt;
    std::optional<Match> best;
    for (const auto& [norm, idx] : keys_) {
      double s = similarity(key, norm);
      if (s >= threshold_ && (!best || s > best->similarity)) best = Match{entries_[idx].full_name, s};
    }
    return best;
  }

 private:
  std::vector<Entry> entries_;
  std::vector<std::pair<std::u32string, std::size_t>> keys_;
  double threshold_ = 0.7;
};

struct CleanConfig {
  Date cutoff{2020, 1, 1, Date::Precision::day};
  std::vector<std::string> title_blocklist;  // case-insensitive substrings
};

/// Per-reason drop counts. Conservation holds:
/// input_rows == output_records + sum(drops) + duplicates_collapsed.
struct CleaningReport {
  std::size_t input_rows = 0;
  std::size_t output_records = 0;
  std::size_t duplicates_collapsed = 0;
  std::map<std::string, std::size_t> drops;

  std::size_t total_dropped() const {
    std::size_t n = 0;
    for (const auto& [_, c] : drops) n += c;
    return n;
  }

  nlohmann::json to_json() const {
    return {{"input_rows", input_rows},
            {"output_records", output_records},
            {"duplicates_collapsed", duplicates_collapsed},
            {"drops", drops}};
  }
};

namespace drop_reason {
inline constexpr const char* no_abstract = "no_abstract";
inline constexpr const char* no_title = "no_title";
inline constexpr const char* non_english = "non_english";
inline constexpr const char* bad_date = "bad_date";
inline constexpr const char* pre_cutoff = "pre_cutoff";
inline constexpr const char* blocklisted = "blocklisted";
}  // namespace drop_reason

struct CleanResult {
  PublicationTable records;
  CleaningReport report;
};

namespace detail {

inline std::size_t non_empty_fields(const RawMetadataRow& r) {
  auto f = [](const std::string& s) { return text::trim(s).empty() ? 0u : 1u; };
  return f(r.title) + f(r.abstract) + f(r.publish_time) + f(r.journal_abbrev) + f(r.authors) + f(r.doi) +
         (r.source_flags.empty() ? 0u : 1u);
}

inline std::vector<std::string> split_authors(std::string_view s) {
  std::vector<std::string> out;
  for (auto& a : text::split(s, ';')) {
    auto t = text::trim(a);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace detail

/// Filters invalid rows (each drop counted by reason), then collapses rows
/// sharing a cord_uid: a row whose journal resolves wins, then the row with
/// the most non-empty fields, then the earliest row.
inline CleanResult clean_and_dedupe(const std::vector<RawMetadataRow>& rows, const LanguageDetector& detector,
                                    const JournalTable& journals, const CleanConfig& config = {}) {
  CleanResult result;
  auto& report = result.report;
  report.input_rows = rows.size();
  for (const char* reason : {drop_reason::no_abstract, drop_reason::no_title, drop_reason::non_english,
                             drop_reason::bad_date, drop_reason::pre_cutoff, drop_reason::blocklisted})
    report.drops[reason] = 0;

  struct Candidate {
    const RawMetadataRow* row;
    Date date;
    bool journal_resolved;
    std::size_t richness;
    std::size_t order;
  };
  std::map<std::string, Candidate> best;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    auto title = text::trim(row.title);
    if (text::trim(row.abstract).empty()) {
      ++report.drops[drop_reason::no_abstract];
      continue;
    }
    if (title.empty()) {
      ++report.drops[drop_reason::no_title];
      continue;
    }
    if (!detector.is_english(title)) {
      ++report.drops[drop_reason::non_english];
      continue;
    }
    auto date = Date::parse(row.publish_time);
    if (!date) {
      ++report.drops[drop_reason::bad_date];
      continue;
    }
    if (*date < config.cutoff) {
      ++report.drops[drop_reason::pre_cutoff];
      continue;
    }
    if (std::any_of(config.title_blocklist.begin(), config.title_blocklist.end(),
                    [&](const std::string& term) { return text::contains_icase(title, term); })) {
      ++report.drops[drop_reason::blocklisted];
      continue;
    }
    bool resolved = !text::trim(row.journal_abbrev).empty() &&
                    (journals.empty() || journals.resolve(row.journal_abbrev).has_value());
    Candidate cand{&row, *date, resolved, detail::non_empty_fields(row), i};
    auto [it, inserted] = best.emplace(row.cord_uid, cand);
    if (inserted) continue;
    ++report.duplicates_collapsed;
    auto& cur = it->second;
    auto key = [](const Candidate& c) { return std::make_tuple(c.journal_resolved ? 1 : 0, c.richness); };
    if (key(cand) > key(cur)) cur = cand;  // strict: earlier row wins ties
  }

  result.records.reserve(best.size());
  for (const auto& [uid, cand] : best) {
    const auto& row = *cand.row;
    PublicationRecord rec;
    rec.pub_id = uid;
    rec.title = std::string(text::trim(row.title));
    rec.abstract = std::string(text::trim(row.abstract));
    rec.publish_date = cand.date;
    if (auto j = text::trim(row.journal_abbrev); !j.empty()) rec.journal = std::string(j);
    rec.authors = detail::split_authors(row.authors);
    if (auto d = text::trim(row.doi); !d.empty()) rec.doi = std::string(d);
    result.records.push_back(std::move(rec));
  }
  report.output_records = result.records.size();
  return result;
}

/// Source of citation counts. Implementations must answer consistently for
/// the lifetime of one run.
class CitationClient {
 public:
  virtual ~CitationClient() = default;
  virtual std::optional<std::uint64_t> lookup(const PublicationRecord& record) const = 0;
};

/// File-backed client over a `doi,count` CSV snapshot. DOIs compare
/// case-insensitively; pub_ids are accepted as keys too.
class SnapshotCitationClient final : public CitationClient {
 public:
  SnapshotCitationClient() = default;
  explicit SnapshotCitationClient(std::map<std::string, std::uint64_t> counts) {
    for (auto& [k, v] : counts) counts_.emplace(text::to_lower(k), v);
  }

  static SnapshotCitationClient load(const std::filesystem::path& path) {
    auto data = io::read_file(path);
    csv::Reader reader(data);
    std::optional<csv::RecordError> err;
    std::map<std::string, std::uint64_t> counts;
    bool first = true;
    while (auto rec = reader.next(err)) {
      if (err) throw FormatError("citation snapshot line " + std::to_string(err->line) + ": " + err->message);
      if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;
      if (rec->fields.size() != 2)
        throw FormatError("citation snapshot line " + std::to_string(rec->line) + ": expected doi,count");
      if (first) {
        first = false;
        if (text::to_lower(text::trim(rec->fields[0])) == "doi") continue;
      }
      auto value = std::string(text::trim(rec->fields[1]));
      if (value.empty() || !std::all_of(value.begin(), value.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw FormatError("citation snapshot line " + std::to_string(rec->line) + ": bad count '" + value + "'");
      counts[std::string(text::trim(rec->fields[0]))] = std::stoull(value);
    }
    return SnapshotCitationClient(std::move(counts));
  }

  std::optional<std::uint64_t> lookup(const PublicationRecord& record) const override {
    if (record.doi) {
      if (auto it = counts_.find(text::to_lower(*record.doi)); it != counts_.end()) return it->second;
    }
    if (auto it = counts_.find(text::to_lower(record.pub_id)); it != counts_.end()) return it->second;
    return std::nullopt;
  }

 private:
  std::map<std::string, std::uint64_t> counts_;
};

struct AugmentReport {
  std::size_t citations_resolved = 0;
  std::size_t citation_failures = 0;
  std::size_t journals_resolved = 0;
};

/// Fills citation counts from `client` and replaces journal abbreviations by
/// their resolved full names. Client exceptions leave the count unset.
inline PublicationTable augment(PublicationTable records, const CitationClient& client, const JournalTable& journals,
                                AugmentReport* report = nullptr) {
  AugmentReport local;
  for (auto& rec : records) {
    try {
      if (auto count = client.lookup(rec)) {
        rec.num_cited_by = *count;
        ++local.citations_resolved;
      }
    } catch (const std::exception&) {
      ++local.citation_failures;
    }
    if (rec.journal && !journals.empty()) {
      if (auto match = journals.resolve(*rec.journal)) {
        rec.journal = match->full_name;
        ++local.journals_resolved;
      }
    }
  }
  if (report) *report = local;
  return records;
}

// ---- serialization ----

inline nlohmann::json to_json(const PublicationRecord& r) {
  nlohmann::json j;
  j["pub_id"] = r.pub_id;
  j["title"] = r.title;
  j["abstract"] = r.abstract;
  j["publish_date"] = r.publish_date.iso();
  j["date_precision"] = to_string(r.publish_date.precision);
  j["journal"] = r.journal ? nlohmann::json(*r.journal) : nlohmann::json(nullptr);
  j["authors"] = r.authors;
  j["doi"] = r.doi ? nlohmann::json(*r.doi) : nlohmann::json(nullptr);
  j["num_cited_by"] = r.num_cited_by ? nlohmann::json(*r.num_cited_by) : nlohmann::json(nullptr);
  return j;
}

inline PublicationRecord publication_from_json(const nlohmann::json& j) {
  PublicationRecord r;
  r.pub_id = j.at("pub_id").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.abstract = j.at("abstract").get<std::string>();
  auto date = Date::parse(j.at("publish_date").get<std::string>());
  if (!date) throw FormatError("publication " + r.pub_id + ": bad publish_date");
  date->precision = precision_from_string(j.at("date_precision").get<std::string>());
  r.publish_date = *date;
  if (!j.at("journal").is_null()) r.journal = j.at("journal").get<std::string>();
  r.authors = j.at("authors").get<std::vector<std::string>>();
  if (!j.at("doi").is_null()) r.doi = j.at("doi").get<std::string>();
  if (!j.at("num_cited_by").is_null()) r.num_cited_by = j.at("num_cited_by").get<std::uint64_t>();
  return r;
}

/// Re-emits records as raw rows, so cleaned output can be fed back through
/// clean_and_dedupe.
inline RawMetadataRow to_raw_row(const PublicationRecord& r) {
  RawMetadataRow row;
  row.cord_uid = r.pub_id;
  row.title = r.title;
  row.abstract = r.abstract;
  switch (r.publish_date.precision) {
    case Date::Precision::year: row.publish_time = r.publish_date.iso().substr(0, 4); break;
    case Date::Precision::month: row.publish_time = r.publish_date.iso().substr(0, 7); break;
    case Date::Precision::day: row.publish_time = r.publish_date.iso(); break;
  }
  row.journal_abbrev = r.journal.value_or("");
  for (std::size_t i = 0; i < r.authors.size(); ++i) row.authors += (i ? "; " : "") + r.authors[i];
  row.doi = r.doi.value_or("");
  return row;
}

inline const PublicationRecord* find_publication(const PublicationTable& table, std::string_view pub_id) {
  auto it = std::lower_bound(table.begin(), table.end(), pub_id,
                             [](const PublicationRecord& r, std::string_view id) { return r.pub_id < id; });
  return it != table.end() && it->pub_id == pub_id ? &*it : nullptr;
}

}  // namespace graphsearch
