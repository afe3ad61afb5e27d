#pragma once

// On-disk artifacts.
//
// .cgsidx layout (all integers little-endian):
//   magic     8 bytes  "CGSIDX\n\0"
//   u32       header length H
//   H bytes   header JSON {format, version, endianness, config_hash, sections[{name, length, crc32}]}
//   u32       crc32 of the header bytes
//   per section, in header order:
//     u64 payload length, payload, u32 crc32 of payload
//
// NDJSON tables carry a first-line header {format, version, config_hash,
// count, crc32} where crc32 covers every byte after the header line. The
// network is a header JSON plus entities.ndjson / edges.ndjson.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphsearch/annotator.hpp"
#include "graphsearch/common.hpp"
#include "graphsearch/corpus.hpp"
#include "graphsearch/index.hpp"
#include "graphsearch/network.hpp"
#include "graphsearch/stats.hpp"

namespace graphsearch::storage {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kIndexMagic{"CGSIDX\n\0", 8};

namespace detail {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    u64(bits);
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  std::string take() { return std::move(buf_); }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() {
    auto bits = u64();
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string str() { return std::string(bytes(u32())); }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw TruncatedError(what_ + ": unexpected end of data");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

inline void check_version(const nlohmann::json& header, std::string_view artifact) {
  int found = header.value("version", -1);
  if (found != kFormatVersion) throw VersionError(std::string(artifact), found, kFormatVersion);
}

inline nlohmann::json parse_header(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": unreadable header: " + e.what());
  }
}

}  // namespace detail

// ---- NDJSON tables ----

struct NdjsonTable {
  nlohmann::json header;
  std::vector<nlohmann::json> records;
};

/// Header line first; `extra` fields are merged into the header.
inline std::string encode_ndjson(std::string_view format, std::string_view config_hash,
                                 const std::vector<nlohmann::json>& records, nlohmann::json extra = nlohmann::json::object(),
                                 int version = kFormatVersion) {
  std::string body;
  for (const auto& r : records) {
    body += r.dump();
    body.push_back('\n');
  }
  nlohmann::json header = std::move(extra);
  header["format"] = format;
  header["version"] = version;
  header["config_hash"] = config_hash;
  header["count"] = records.size();
  header["crc32"] = io::crc32(body);
  return header.dump() + "\n" + body;
}

inline NdjsonTable decode_ndjson(std::string_view data, std::string_view format) {
  auto nl = data.find('\n');
  if (nl == std::string_view::npos) throw TruncatedError(std::string(format) + ": missing header line");
  NdjsonTable t;
  t.header = detail::parse_header(data.substr(0, nl), format);
  if (t.header.value("format", "") != format)
    throw FormatError("expected " + std::string(format) + " table, found '" + t.header.value("format", "") + "'");
  detail::check_version(t.header, format);
  auto body = data.substr(nl + 1);
  auto lines = std::count(body.begin(), body.end(), '\n');
  if (!body.empty() && body.back() != '\n') ++lines;
  auto expected = t.header.at("count").get<std::size_t>();
  if (static_cast<std::size_t>(lines) < expected)
    throw TruncatedError(std::string(format) + ": " + std::to_string(lines) + " of " + std::to_string(expected) +
                         " records present");
  if (io::crc32(body) != t.header.at("crc32").get<std::uint32_t>())
    throw ChecksumError(std::string(format) + ": checksum mismatch");
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    auto line = body.substr(pos, end - pos);
    if (!line.empty()) t.records.push_back(nlohmann::json::parse(line));
    pos = end + 1;
  }
  if (t.records.size() != expected) throw FormatError(std::string(format) + ": record count mismatch");
  return t;
}

inline void save_publications(const std::filesystem::path& path, const PublicationTable& pubs,
                              std::string_view config_hash) {
  std::vector<nlohmann::json> recs;
  recs.reserve(pubs.size());
  for (const auto& p : pubs) recs.push_back(to_json(p));
  io::write_file_atomic(path, encode_ndjson("publications", config_hash, recs));
}

inline PublicationTable load_publications(const std::filesystem::path& path, std::string* config_hash = nullptr) {
  auto t = decode_ndjson(io::read_file(path), "publications");
  if (config_hash) *config_hash = t.header.at("config_hash").get<std::string>();
  PublicationTable pubs;
  for (const auto& r : t.records) pubs.push_back(publication_from_json(r));
  return pubs;
}

inline void save_mentions(const std::filesystem::path& path, const std::vector<RawEntityMention>& mentions,
                          std::string_view config_hash, nlohmann::json extra = nlohmann::json::object()) {
  std::vector<nlohmann::json> recs;
  for (const auto& m : mentions) recs.push_back(to_json(m));
  io::write_file_atomic(path, encode_ndjson("mentions", config_hash, recs, std::move(extra)));
}

inline std::vector<RawEntityMention> load_mentions(const std::filesystem::path& path, std::string* config_hash = nullptr) {
  auto t = decode_ndjson(io::read_file(path), "mentions");
  if (config_hash) *config_hash = t.header.at("config_hash").get<std::string>();
  std::vector<RawEntityMention> out;
  for (const auto& r : t.records) out.push_back(mention_from_json(r));
  return out;
}

inline void save_concepts(const std::filesystem::path& path, const std::vector<ConceptEntity>& entities,
                          std::string_view config_hash) {
  std::vector<nlohmann::json> recs;
  for (const auto& e : entities) recs.push_back(to_json(e));
  io::write_file_atomic(path, encode_ndjson("concepts", config_hash, recs));
}

inline std::vector<ConceptEntity> load_concepts(const std::filesystem::path& path, std::string* config_hash = nullptr) {
  auto t = decode_ndjson(io::read_file(path), "concepts");
  if (config_hash) *config_hash = t.header.at("config_hash").get<std::string>();
  std::vector<ConceptEntity> out;
  for (const auto& r : t.records) out.push_back(entity_from_json(r));
  return out;
}

// ---- network ----

inline constexpr const char* kNetworkHeader = "network.json";
inline constexpr const char* kEntitiesFile = "entities.ndjson";
inline constexpr const char* kEdgesFile = "edges.ndjson";

inline void save_network(const std::filesystem::path& dir, const CoocNetwork& net, std::string_view config_hash,
                         nlohmann::json extra = nlohmann::json::object(), int version = kFormatVersion) {
  std::string entities, edges;
  for (const auto& e : net.entities) entities += to_json(e).dump() + "\n";
  for (const auto& e : net.edges) edges += to_json(e).dump() + "\n";
  nlohmann::json header = std::move(extra);
  header["format"] = "cooc-network";
  header["version"] = version;
  header["n_docs"] = net.n_docs;
  header["log_base"] = stats::kLogBase;
  header["npmi_threshold"] = net.npmi_threshold;
  header["config_hash"] = config_hash;
  header["entities"] = {{"file", kEntitiesFile}, {"count", net.entities.size()}, {"crc32", io::crc32(entities)}};
  header["edges"] = {{"file", kEdgesFile}, {"count", net.edges.size()}, {"crc32", io::crc32(edges)}};
  io::write_file_atomic(dir / kEntitiesFile, entities);
  io::write_file_atomic(dir / kEdgesFile, edges);
  io::write_file_atomic(dir / kNetworkHeader, header.dump(2) + "\n");
}

namespace detail {

inline std::vector<nlohmann::json> read_checked_lines(const std::filesystem::path& path, const nlohmann::json& meta) {
  auto data = io::read_file(path);
  auto expected = meta.at("count").get<std::size_t>();
  auto lines = static_cast<std::size_t>(std::count(data.begin(), data.end(), '\n'));
  if (!data.empty() && data.back() != '\n') ++lines;
  if (lines < expected)
    throw TruncatedError(path.filename().string() + ": " + std::to_string(lines) + " of " + std::to_string(expected) +
                         " records present");
  if (io::crc32(data) != meta.at("crc32").get<std::uint32_t>())
    throw ChecksumError(path.filename().string() + ": checksum mismatch");
  std::vector<nlohmann::json> out;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    if (end > pos) out.push_back(nlohmann::json::parse(std::string_view(data).substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

}  // namespace detail

inline CoocNetwork load_network(const std::filesystem::path& dir, nlohmann::json* header_out = nullptr) {
  auto header = detail::parse_header(io::read_file(dir / kNetworkHeader), kNetworkHeader);
  if (header.value("format", "") != "cooc-network") throw FormatError("network.json: not a network header");
  detail::check_version(header, "cooc-network");
  CoocNetwork net;
  net.n_docs = header.at("n_docs").get<std::uint64_t>();
  net.npmi_threshold = header.at("npmi_threshold").get<double>();
  for (const auto& j : detail::read_checked_lines(dir / kEntitiesFile, header.at("entities")))
    net.entities.push_back(entity_from_json(j));
  for (const auto& j : detail::read_checked_lines(dir / kEdgesFile, header.at("edges")))
    net.edges.push_back(edge_from_json(j));
  if (header_out) *header_out = std::move(header);
  return net;
}

// ---- index ----

struct IndexBundle {
  InvertedIndex inverted;
  KeywordIndex keyword;
  std::string config_hash;

  friend bool operator==(const IndexBundle&, const IndexBundle&) = default;
};

namespace detail {

using PubIds = std::map<std::string, std::uint32_t, std::less<>>;

template <typename Map>
void write_postings(Writer& w, const Map& postings, const PubIds& ids) {
  w.u32(static_cast<std::uint32_t>(postings.size()));
  for (const auto& [key, list] : postings) {
    w.str(key);
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) w.u32(ids.at(p));
  }
}

template <typename Map>
void read_postings(Reader& r, Map& postings, const std::vector<std::string>& pubs) {
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto key = r.str();
    auto count = r.u32();
    std::vector<std::string> list;
    list.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
      auto id = r.u32();
      if (id >= pubs.size()) throw FormatError("index: posting refers to unknown publication slot");
      list.push_back(pubs[id]);
    }
    postings.emplace(std::move(key), std::move(list));
  }
}

}  // namespace detail

inline std::string encode_index(const IndexBundle& bundle, int version = kFormatVersion) {
  detail::PubIds ids;
  for (const auto& [_, list] : bundle.inverted.postings)
    for (const auto& p : list) ids.emplace(p, 0);
  for (const auto& [_, list] : bundle.keyword.postings)
    for (const auto& p : list) ids.emplace(p, 0);
  std::uint32_t next = 0;
  for (auto& [_, slot] : ids) slot = next++;

  std::vector<std::pair<std::string, std::string>> sections;
  {
    detail::Writer w;
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (const auto& [id, _] : ids) w.str(id);
    sections.emplace_back("pubs", w.take());
  }
  {
    detail::Writer w;
    w.u64(bundle.inverted.doc_count);
    detail::write_postings(w, bundle.inverted.postings, ids);
    sections.emplace_back("inverted", w.take());
  }
  {
    detail::Writer w;
    w.u64(bundle.keyword.doc_count);
    w.f64(bundle.keyword.max_df_fraction);
    detail::write_postings(w, bundle.keyword.postings, ids);
    w.u32(static_cast<std::uint32_t>(bundle.keyword.excluded.size()));
    for (const auto& [tok, df] : bundle.keyword.excluded) {
      w.str(tok);
      w.u64(df);
    }
    sections.emplace_back("keyword", w.take());
  }

  nlohmann::json header = {{"format", "cgsidx"},
                           {"version", version},
                           {"endianness", "little"},
                           {"config_hash", bundle.config_hash},
                           {"sections", nlohmann::json::array()}};
  for (const auto& [name, payload] : sections)
    header["sections"].push_back({{"name", name}, {"length", payload.size()}, {"crc32", io::crc32(payload)}});
  auto header_text = header.dump();

  detail::Writer out;
  out.raw(kIndexMagic);
  out.u32(static_cast<std::uint32_t>(header_text.size()));
  out.raw(header_text);
  out.u32(io::crc32(header_text));
  for (const auto& [_, payload] : sections) {
    out.u64(payload.size());
    out.raw(payload);
    out.u32(io::crc32(payload));
  }
  return out.take();
}

inline IndexBundle decode_index(std::string_view data) {
  detail::Reader r(data, "cgsidx");
  if (data.size() < kIndexMagic.size()) throw TruncatedError("cgsidx: file shorter than magic");
  if (r.bytes(kIndexMagic.size()) != kIndexMagic) throw FormatError("cgsidx: bad magic");
  auto header_len = r.u32();
  auto header_text = r.bytes(header_len);
  if (r.u32() != io::crc32(header_text)) throw ChecksumError("cgsidx: header checksum mismatch");
  auto header = detail::parse_header(header_text, "cgsidx");
  detail::check_version(header, "cgsidx");
  if (header.value("endianness", "") != "little") throw FormatError("cgsidx: unsupported endianness");

  std::map<std::string, std::string_view> payloads;
  for (const auto& s : header.at("sections")) {
    auto len = r.u64();
    if (len != s.at("length").get<std::uint64_t>()) throw FormatError("cgsidx: section length disagrees with header");
    auto payload = r.bytes(len);
    auto crc = r.u32();
    if (crc != io::crc32(payload) || crc != s.at("crc32").get<std::uint32_t>())
      throw ChecksumError("cgsidx: checksum mismatch in section " + s.at("name").get<std::string>());
    payloads[s.at("name").get<std::string>()] = payload;
  }
  if (!r.done()) throw FormatError("cgsidx: trailing bytes after last section");
  for (const char* name : {"pubs", "inverted", "keyword"})
    if (!payloads.contains(name)) throw FormatError(std::string("cgsidx: missing section ") + name);

  IndexBundle bundle;
  bundle.config_hash = header.at("config_hash").get<std::string>();
  std::vector<std::string> pubs;
  {
    detail::Reader s(payloads["pubs"], "cgsidx pubs");
    auto n = s.u32();
    pubs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) pubs.push_back(s.str());
  }
  {
    detail::Reader s(payloads["inverted"], "cgsidx inverted");
    bundle.inverted.doc_count = s.u64();
    detail::read_postings(s, bundle.inverted.postings, pubs);
  }
  {
    detail::Reader s(payloads["keyword"], "cgsidx keyword");
    bundle.keyword.doc_count = s.u64();
    bundle.keyword.max_df_fraction = s.f64();
    detail::read_postings(s, bundle.keyword.postings, pubs);
    auto n = s.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      auto tok = s.str();
      bundle.keyword.excluded.emplace(std::move(tok), s.u64());
    }
  }
  return bundle;
}

inline void save_index(const std::filesystem::path& path, const IndexBundle& bundle) {
  io::write_file_atomic(path, encode_index(bundle));
}

inline IndexBundle load_index(const std::filesystem::path& path) { return decode_index(io::read_file(path)); }

}  // namespace graphsearch::storage
