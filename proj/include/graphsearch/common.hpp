#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>
#include <zlib.h>

namespace graphsearch {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or record.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Artifact written by an incompatible format version.
class VersionError : public Error {
 public:
  VersionError(std::string artifact, int found, int expected)
      : Error(artifact + ": format version " + std::to_string(found) + " does not match supported version " +
              std::to_string(expected)),
        found_(found), expected_(expected) {}
  int found() const { return found_; }
  int expected() const { return expected_; }

 private:
  int found_;
  int expected_;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class TruncatedError : public Error {
 public:
  using Error::Error;
};

/// Artifacts produced under different pipeline configurations.
class ConfigMismatchError : public Error {
 public:
  using Error::Error;
};

namespace text {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

inline bool contains_icase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  auto lower = to_lower(haystack);
  return lower.find(to_lower(needle)) != std::string::npos;
}

/// Decodes UTF-8 into code points; invalid bytes map to themselves.
inline std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto b = static_cast<unsigned char>(s[i]);
    int len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(b);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok) {
      out.push_back(b);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace text

/// Calendar date with a record of which components were present in the source.
struct Date {
  enum class Precision { day, month, year };

  int year = 1970;
  int month = 1;
  int day = 1;
  Precision precision = Precision::day;

  /// Accepts "YYYY-MM-DD", "YYYY-MM" and "YYYY"; missing parts become 1.
  static std::optional<Date> parse(std::string_view s) {
    s = text::trim(s);
    auto digits = [](std::string_view part, std::size_t n) {
      return part.size() == n && std::all_of(part.begin(), part.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    };
    auto to_int = [](std::string_view part) { return std::stoi(std::string(part)); };
    Date d;
    if (digits(s, 4)) {
      d.year = to_int(s);
      d.precision = Precision::year;
    } else if (s.size() == 7 && digits(s.substr(0, 4), 4) && s[4] == '-' && digits(s.substr(5, 2), 2)) {
      d.year = to_int(s.substr(0, 4));
      d.month = to_int(s.substr(5, 2));
      d.precision = Precision::month;
    } else if (s.size() == 10 && digits(s.substr(0, 4), 4) && s[4] == '-' && digits(s.substr(5, 2), 2) && s[7] == '-' &&
               digits(s.substr(8, 2), 2)) {
      d.year = to_int(s.substr(0, 4));
      d.month = to_int(s.substr(5, 2));
      d.day = to_int(s.substr(8, 2));
    } else {
      return std::nullopt;
    }
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
    return d;
  }

  static int days_in_month(int y, int m) {
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return m == 2 && leap ? 29 : days[m - 1];
  }

  std::string iso() const {
    std::ostringstream os;
    os << std::setfill('0') << std::setw(4) << year << '-' << std::setw(2) << month << '-' << std::setw(2) << day;
    return os.str();
  }

  friend bool operator==(const Date& a, const Date& b) {
    return a.year == b.year && a.month == b.month && a.day == b.day && a.precision == b.precision;
  }
  /// Orders by calendar position only.
  friend std::strong_ordering operator<=>(const Date& a, const Date& b) {
    if (auto c = a.year <=> b.year; c != 0) return c;
    if (auto c = a.month <=> b.month; c != 0) return c;
    return a.day <=> b.day;
  }
};

inline std::string_view to_string(Date::Precision p) {
  switch (p) {
    case Date::Precision::day: return "day";
    case Date::Precision::month: return "month";
    case Date::Precision::year: return "year";
  }
  return "day";
}

inline Date::Precision precision_from_string(std::string_view s) {
  if (s == "day") return Date::Precision::day;
  if (s == "month") return Date::Precision::month;
  if (s == "year") return Date::Precision::year;
  throw FormatError("unknown date precision '" + std::string(s) + "'");
}

namespace io {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes through a temporary sibling and renames it into place, so readers
/// never observe a partially written file at `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::uint32_t crc32(std::string_view data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large buffers.
  std::size_t offset = 0;
  while (offset < data.size()) {
    auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1u << 30));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

}  // namespace io
}  // namespace graphsearch
