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
 * @file result_table.hpp
 * @brief Evaluation rows, the result column manifest, and the CSV and
 *        dashboard-bundle serializations.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "envmx/common.hpp"
#include "envmx/csv.hpp"

namespace envmx {

inline constexpr int kBundleSchemaVersion = 1;

enum class ColumnKind { Integer, Number, Boolean, String };

inline const char* kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::Integer: return "integer";
    case ColumnKind::Number: return "number";
    case ColumnKind::Boolean: return "boolean";
    case ColumnKind::String: return "string";
  }
  return "?";
}

struct Column {
  std::string name;
  std::string unit;
  ColumnKind kind;
};

using Value = std::variant<std::monostate, std::int64_t, double, bool, std::string>;

/// One design point. Optional members are empty when not applicable or when
/// the point failed (then `error` is set).
struct EvaluationRow {
  std::int64_t row_id = 0;
  std::string technology;
  std::string polarity;
  std::int64_t capacity_bytes = 0;
  std::int64_t bits_per_cell = 1;
  std::string opt_target;
  std::optional<std::int64_t> rows, cols, subarrays;
  std::optional<double> read_latency_ns, write_latency_ns;
  std::optional<double> read_energy_pj, write_energy_pj;
  std::optional<double> leakage_mw, area_mm2, area_efficiency;
  std::optional<double> read_bytes_per_s, write_bytes_per_s;
  std::optional<double> utilization;
  std::optional<bool> feasible;
  std::optional<double> total_power_mw;
  std::optional<double> task_latency_s;
  std::optional<bool> meets_latency_target;
  std::optional<double> lifetime_s;
  std::optional<double> energy_per_task_j;
  std::optional<double> tasks_per_day;
  std::optional<double> energy_per_day_j;
  std::optional<double> buffer_c;
  std::optional<double> accuracy;
  std::optional<std::string> error;

  friend bool operator==(const EvaluationRow&, const EvaluationRow&) = default;
};

inline const std::vector<Column>& result_columns() {
  using K = ColumnKind;
  static const std::vector<Column> kColumns{
      {"row_id", "", K::Integer},
      {"technology", "", K::String},
      {"polarity", "", K::String},
      {"capacity_bytes", "B", K::Integer},
      {"bits_per_cell", "", K::Integer},
      {"opt_target", "", K::String},
      {"R", "", K::Integer},
      {"C", "", K::Integer},
      {"S", "", K::Integer},
      {"read_latency_ns", "ns", K::Number},
      {"write_latency_ns", "ns", K::Number},
      {"read_energy_pj", "pJ", K::Number},
      {"write_energy_pj", "pJ", K::Number},
      {"leakage_mw", "mW", K::Number},
      {"area_mm2", "mm2", K::Number},
      {"area_efficiency", "", K::Number},
      {"read_bytes_per_s", "B/s", K::Number},
      {"write_bytes_per_s", "B/s", K::Number},
      {"utilization", "", K::Number},
      {"feasible", "", K::Boolean},
      {"total_power_mw", "mW", K::Number},
      {"task_latency_s", "s", K::Number},
      {"meets_latency_target", "", K::Boolean},
      {"lifetime_s", "s", K::Number},
      {"energy_per_task_j", "J", K::Number},
      {"tasks_per_day", "1/day", K::Number},
      {"energy_per_day_j", "J", K::Number},
      {"buffer_c", "", K::Number},
      {"accuracy", "", K::Number},
      {"error", "", K::String},
  };
  return kColumns;
}

inline std::vector<std::string> result_column_names() {
  std::vector<std::string> out;
  for (const auto& c : result_columns()) out.push_back(c.name);
  return out;
}

namespace detail {

template <class T>
Value opt_value(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  return Value(*v);
}

template <class T>
void assign(std::optional<T>& dst, const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) {
    dst.reset();
  } else if constexpr (std::is_same_v<T, double>) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
      dst = static_cast<double>(*i);
    } else {
      dst = std::get<double>(v);
    }
  } else {
    dst = std::get<T>(v);
  }
}

}  // namespace detail

/// Row values in result_columns() order.
inline std::vector<Value> to_values(const EvaluationRow& r) {
  using detail::opt_value;
  return {r.row_id,
          r.technology,
          r.polarity,
          r.capacity_bytes,
          r.bits_per_cell,
          r.opt_target,
          opt_value(r.rows),
          opt_value(r.cols),
          opt_value(r.subarrays),
          opt_value(r.read_latency_ns),
          opt_value(r.write_latency_ns),
          opt_value(r.read_energy_pj),
          opt_value(r.write_energy_pj),
          opt_value(r.leakage_mw),
          opt_value(r.area_mm2),
          opt_value(r.area_efficiency),
          opt_value(r.read_bytes_per_s),
          opt_value(r.write_bytes_per_s),
          opt_value(r.utilization),
          opt_value(r.feasible),
          opt_value(r.total_power_mw),
          opt_value(r.task_latency_s),
          opt_value(r.meets_latency_target),
          opt_value(r.lifetime_s),
          opt_value(r.energy_per_task_j),
          opt_value(r.tasks_per_day),
          opt_value(r.energy_per_day_j),
          opt_value(r.buffer_c),
          opt_value(r.accuracy),
          opt_value(r.error)};
}

inline EvaluationRow from_values(const std::vector<Value>& v) {
  if (v.size() != result_columns().size()) throw PreconditionError("row has wrong column count");
  EvaluationRow r;
  auto req_int = [&](std::size_t i) {
    if (const auto* x = std::get_if<std::int64_t>(&v[i])) return *x;
    throw PreconditionError("column " + result_columns()[i].name + " must be an integer");
  };
  auto req_str = [&](std::size_t i) {
    if (const auto* x = std::get_if<std::string>(&v[i])) return *x;
    throw PreconditionError("column " + result_columns()[i].name + " must be a string");
  };
  r.row_id = req_int(0);
  r.technology = req_str(1);
  r.polarity = req_str(2);
  r.capacity_bytes = req_int(3);
  r.bits_per_cell = req_int(4);
  r.opt_target = req_str(5);
  detail::assign(r.rows, v[6]);
  detail::assign(r.cols, v[7]);
  detail::assign(r.subarrays, v[8]);
  detail::assign(r.read_latency_ns, v[9]);
  detail::assign(r.write_latency_ns, v[10]);
  detail::assign(r.read_energy_pj, v[11]);
  detail::assign(r.write_energy_pj, v[12]);
  detail::assign(r.leakage_mw, v[13]);
  detail::assign(r.area_mm2, v[14]);
  detail::assign(r.area_efficiency, v[15]);
  detail::assign(r.read_bytes_per_s, v[16]);
  detail::assign(r.write_bytes_per_s, v[17]);
  detail::assign(r.utilization, v[18]);
  detail::assign(r.feasible, v[19]);
  detail::assign(r.total_power_mw, v[20]);
  detail::assign(r.task_latency_s, v[21]);
  detail::assign(r.meets_latency_target, v[22]);
  detail::assign(r.lifetime_s, v[23]);
  detail::assign(r.energy_per_task_j, v[24]);
  detail::assign(r.tasks_per_day, v[25]);
  detail::assign(r.energy_per_day_j, v[26]);
  detail::assign(r.buffer_c, v[27]);
  detail::assign(r.accuracy, v[28]);
  detail::assign(r.error, v[29]);
  return r;
}

struct ResultTable {
  std::vector<EvaluationRow> rows;
  std::string config_fingerprint;

  static const std::vector<Column>& columns() { return result_columns(); }
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(bool b) const { return b ? "1" : "0"; }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

inline std::string csv_line(const EvaluationRow& r) {
  std::vector<std::string> fields;
  for (const Value& v : to_values(r)) fields.push_back(format_value(v));
  return csv::join(fields);
}

inline std::string to_csv(const std::vector<EvaluationRow>& rows) {
  std::string out = csv::join(result_column_names()) + "\n";
  for (const auto& r : rows) out += csv_line(r) + "\n";
  return out;
}

/// Parses one CSV field according to the column kind. Empty means absent.
inline Value parse_value(const std::string& text, ColumnKind kind) {
  if (text.empty()) return std::monostate{};
  switch (kind) {
    case ColumnKind::String: return text;
    case ColumnKind::Integer: {
      auto v = parse_integer(text);
      if (!v) throw PreconditionError("not an integer: '" + text + "'");
      return static_cast<std::int64_t>(*v);
    }
    case ColumnKind::Boolean:
      if (text == "1" || text == "true") return true;
      if (text == "0" || text == "false") return false;
      throw PreconditionError("not a boolean: '" + text + "'");
    case ColumnKind::Number: {
      auto v = parse_double(text);
      if (!v) throw PreconditionError("not a number: '" + text + "'");
      return *v;
    }
  }
  return std::monostate{};
}

/// A result CSV held as parsed values while keeping each source line intact.
struct CsvTable {
  std::vector<Column> columns;
  std::string raw_header;
  std::vector<std::string> raw_rows;
  std::vector<std::vector<Value>> rows;
};

/// Reads any CSV with a header. Known result columns use their manifest kind;
/// other columns are numbers when every value parses, strings otherwise.
inline CsvTable parse_result_csv(std::string_view text) {
  const csv::Document doc = csv::parse(text);
  CsvTable t;
  t.raw_header = doc.raw_header;
  std::map<std::string, Column> known;
  for (const auto& c : result_columns()) known.emplace(c.name, c);
  for (std::size_t i = 0; i < doc.header.size(); ++i) {
    const std::string& name = doc.header[i];
    if (auto it = known.find(name); it != known.end()) {
      t.columns.push_back(it->second);
      continue;
    }
    bool numeric = true;
    for (const auto& rec : doc.records) {
      if (i < rec.fields.size() && !rec.fields[i].empty() && !parse_double(rec.fields[i])) {
        numeric = false;
        break;
      }
    }
    t.columns.push_back({name, "", numeric ? ColumnKind::Number : ColumnKind::String});
  }
  for (std::size_t r = 0; r < doc.records.size(); ++r) {
    const auto& rec = doc.records[r];
    if (rec.fields.size() != t.columns.size()) {
      throw SchemaError(r + 1, "", "expected " + std::to_string(t.columns.size()) + " fields, found " +
                                       std::to_string(rec.fields.size()));
    }
    std::vector<Value> values;
    values.reserve(rec.fields.size());
    for (std::size_t i = 0; i < rec.fields.size(); ++i) {
      try {
        values.push_back(parse_value(rec.fields[i], t.columns[i].kind));
      } catch (const PreconditionError& e) {
        throw SchemaError(r + 1, t.columns[i].name, e.what());
      }
    }
    t.raw_rows.push_back(rec.raw);
    t.rows.push_back(std::move(values));
  }
  return t;
}

inline std::vector<EvaluationRow> rows_from_csv(std::string_view text) {
  const CsvTable t = parse_result_csv(text);
  if (t.columns.size() != result_columns().size()) {
    throw SchemaError(0, "", "not a result table: wrong column count");
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (t.columns[i].name != result_columns()[i].name) {
      throw SchemaError(0, t.columns[i].name, "expected column '" + result_columns()[i].name + "'");
    }
  }
  std::vector<EvaluationRow> out;
  for (const auto& v : t.rows) out.push_back(from_values(v));
  return out;
}

/// Splits rows by technology and bits per cell into `<tech>_<B>BPC-combined.csv`.
inline std::vector<std::string> export_per_technology(const std::vector<EvaluationRow>& rows,
                                                      const std::string& dir) {
  std::map<std::string, std::vector<EvaluationRow>> groups;
  for (const auto& r : rows) {
    std::string tech = r.technology;
    for (char& ch : tech) {
      if (ch == ':' || ch == '/' || ch == ' ') ch = '-';
    }
    groups[tech + "_" + std::to_string(r.bits_per_cell) + "BPC-combined.csv"].push_back(r);
  }
  std::vector<std::string> written;
  for (const auto& [name, group] : groups) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    write_file(path, to_csv(group));
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// Dashboard bundle
// ---------------------------------------------------------------------------

inline std::string json_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      // JSON has no infinity; the bundle spells it as a string.
      if (std::isinf(d)) return d > 0 ? "\"inf\"" : "\"-inf\"";
      if (std::isnan(d)) return "null";
      return format_double(d);
    }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return nlohmann::json(s).dump(); }
  };
  return std::visit(Visitor{}, v);
}

/// Byte-deterministic bundle text: one row array per line.
inline std::string bundle_json(const ResultTable& table) {
  std::string out = "{\n";
  out += "  \"schema_version\": " + std::to_string(kBundleSchemaVersion) + ",\n";
  out += "  \"config_fingerprint\": " + nlohmann::json(table.config_fingerprint).dump() + ",\n";
  out += "  \"columns\": [\n";
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += "    {\"name\": " + nlohmann::json(cols[i].name).dump() +
           ", \"unit\": " + nlohmann::json(cols[i].unit).dump() + ", \"kind\": \"" +
           kind_name(cols[i].kind) + "\"}";
    out += i + 1 < cols.size() ? ",\n" : "\n";
  }
  out += "  ],\n  \"rows\": [";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += r == 0 ? "\n    [" : ",\n    [";
    const auto values = to_values(table.rows[r]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ", ";
      out += json_value(values[i]);
    }
    out += "]";
  }
  out += table.rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

inline void export_bundle(const ResultTable& table, const std::string& path) {
  write_file(path, bundle_json(table));
}

inline ResultTable parse_bundle(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed bundle: ") + e.what());
  }
  if (doc.value("schema_version", -1) != kBundleSchemaVersion) {
    throw PreconditionError("unsupported bundle schema version");
  }
  const auto& cols = result_columns();
  const auto& jcols = doc.at("columns");
  if (jcols.size() != cols.size()) throw PreconditionError("bundle column manifest mismatch");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (jcols[i].at("name").get<std::string>() != cols[i].name) {
      throw PreconditionError("bundle column " + std::to_string(i) + " is not " + cols[i].name);
    }
  }
  ResultTable table;
  table.config_fingerprint = doc.at("config_fingerprint").get<std::string>();
  for (const auto& jrow : doc.at("rows")) {
    if (jrow.size() != cols.size()) throw PreconditionError("bundle row has wrong column count");
    std::vector<Value> values;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& j = jrow[i];
      if (j.is_null()) {
        values.emplace_back(std::monostate{});
      } else if (cols[i].kind == ColumnKind::Boolean) {
        values.emplace_back(j.get<bool>());
      } else if (cols[i].kind == ColumnKind::String) {
        values.emplace_back(j.get<std::string>());
      } else if (cols[i].kind == ColumnKind::Integer) {
        values.emplace_back(j.get<std::int64_t>());
      } else if (j.is_string()) {
        values.emplace_back(*parse_double(j.get<std::string>()));
      } else {
        values.emplace_back(j.get<double>());
      }
    }
    table.rows.push_back(from_values(values));
  }
  return table;
}

}  // namespace envmx
