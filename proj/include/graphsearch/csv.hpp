#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graphsearch::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

/// RFC 4180 reader over an in-memory buffer. Quoted fields may contain the
/// delimiter, doubled quotes and line breaks. CRLF and LF endings are accepted.
class Reader {
 public:
  explicit Reader(std::string_view data, char delimiter = ',') : data_(data), delim_(delimiter) {
    if (data_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
  }

  /// Next record, or nullopt at end of input. `error` is set when the record
  /// is malformed; the partial record is still returned.
  std::optional<Record> next(std::optional<RecordError>& error) {
    error.reset();
    if (pos_ >= data_.size()) return std::nullopt;
    Record rec;
    rec.line = line_;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos_ < data_.size()) {
      char c = data_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        if (c == '\n') ++line_;
        field.push_back(c);
        ++pos_;
        continue;
      }
      if (c == '"' && !field_started) {
        quoted = true;
        field_started = true;
        ++pos_;
        continue;
      }
      if (c == delim_) {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        ++pos_;
        continue;
      }
      if (c == '\r' && pos_ + 1 < data_.size() && data_[pos_ + 1] == '\n') {
        ++pos_;
        continue;
      }
      if (c == '\n') {
        ++pos_;
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      }
      field.push_back(c);
      field_started = true;
      ++pos_;
    }
    if (quoted) error = RecordError{rec.line, "unterminated quoted field"};
    rec.fields.push_back(std::move(field));
    return rec;
  }

 private:
  std::string_view data_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline std::string escape_field(std::string_view s, char delimiter = ',') {
  bool needs = s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace graphsearch::csv
