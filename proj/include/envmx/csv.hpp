/*
 * Copyright 2026 The envmx Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file csv.hpp
 * @brief Minimal RFC 4180 reader/writer. Lines starting with '#' before or
 *        between records are comments.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "envmx/common.hpp"

namespace envmx::csv {

struct Record {
  std::size_t line = 0;  // 1-based physical line of the record start
  std::string raw;       // exact source text, without the line terminator
  std::vector<std::string> fields;
};

struct Document {
  std::vector<std::string> header;
  std::string raw_header;
  std::vector<Record> records;
};

inline std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw SchemaError(line_no, "", "unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

/// Parses a whole document. Empty input yields an empty header and no records.
inline Document parse(std::string_view text) {
  Document doc;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      doc.raw_header = std::string(line);
      doc.header = split_line(line, 0);
      have_header = true;
      continue;
    }
    Record rec;
    rec.line = line_no;
    rec.raw = std::string(line);
    rec.fields = split_line(line, doc.records.size() + 1);
    doc.records.push_back(std::move(rec));
  }
  return doc;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

/// Verifies that `doc.header` equals `expected` exactly (names and order).
inline void require_header(const Document& doc, const std::vector<std::string>& expected) {
  if (doc.header.size() != expected.size()) {
    throw SchemaError(0, "", "expected " + std::to_string(expected.size()) + " columns, found " +
                                 std::to_string(doc.header.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (doc.header[i] != expected[i]) {
      throw SchemaError(0, doc.header[i], "expected column '" + expected[i] + "'");
    }
  }
}

}  // namespace envmx::csv
