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
 * @file cell_library.hpp
 * @brief Cell technology records, complete cell definitions and the
 *        tentpole (bounding cell) construction.
 *
 * A CellRecord is what one publication reports: any subset of the cell
 * parameters. A CellDefinition is fully specified and can be handed to the
 * array model. build_tentpole() turns a set of records for one technology
 * into an optimistic or pessimistic bound:
 *
 *   1. the anchor is the densest (optimistic) or least dense (pessimistic)
 *      record, density = bits_per_cell_max / cell_area_f2;
 *   2. every field the anchor lacks is taken from the best (worst) value of
 *      that field over all records of the technology;
 *   3. fields nobody reports come from the per-technology defaults table
 *      and are marked "default" in the provenance.
 */

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envmx/common.hpp"
#include "envmx/csv.hpp"

namespace envmx {

enum class TechClass { SRAM, STT, SOT, RRAM, PCM, CTT, FeRAM, FeFET, Custom };

struct Technology {
  TechClass cls = TechClass::SRAM;
  std::string custom_name;  // only for TechClass::Custom

  std::string name() const {
    switch (cls) {
      case TechClass::SRAM: return "SRAM";
      case TechClass::STT: return "STT";
      case TechClass::SOT: return "SOT";
      case TechClass::RRAM: return "RRAM";
      case TechClass::PCM: return "PCM";
      case TechClass::CTT: return "CTT";
      case TechClass::FeRAM: return "FeRAM";
      case TechClass::FeFET: return "FeFET";
      case TechClass::Custom: return "Custom:" + custom_name;
    }
    return "?";
  }

  bool is_custom() const { return cls == TechClass::Custom; }

  friend bool operator==(const Technology& a, const Technology& b) {
    return a.cls == b.cls && (a.cls != TechClass::Custom || a.custom_name == b.custom_name);
  }

  /// Accepts the class names case-insensitively and `Custom:<name>`.
  static std::optional<Technology> parse(std::string_view text) {
    static const std::array<std::pair<const char*, TechClass>, 8> kNames{{
        {"sram", TechClass::SRAM}, {"stt", TechClass::STT},     {"sot", TechClass::SOT},
        {"rram", TechClass::RRAM}, {"pcm", TechClass::PCM},     {"ctt", TechClass::CTT},
        {"feram", TechClass::FeRAM}, {"fefet", TechClass::FeFET},
    }};
    std::string lower = to_lower(text);
    for (const auto& [n, c] : kNames) {
      if (lower == n) return Technology{c, {}};
    }
    constexpr std::string_view kPrefix = "custom:";
    if (lower.rfind(kPrefix, 0) == 0) {
      std::string name(text.substr(kPrefix.size()));
      if (name.empty()) return std::nullopt;
      return Technology{TechClass::Custom, name};
    }
    return std::nullopt;
  }
};

enum class Polarity { Optimistic, Pessimistic, Reference, Custom };

inline std::string polarity_name(Polarity p) {
  switch (p) {
    case Polarity::Optimistic: return "optimistic";
    case Polarity::Pessimistic: return "pessimistic";
    case Polarity::Reference: return "reference";
    case Polarity::Custom: return "custom";
  }
  return "?";
}

inline std::optional<Polarity> parse_polarity(std::string_view s) {
  std::string l = to_lower(s);
  if (l == "optimistic" || l == "opt") return Polarity::Optimistic;
  if (l == "pessimistic" || l == "pess") return Polarity::Pessimistic;
  if (l == "reference" || l == "ref") return Polarity::Reference;
  if (l == "custom") return Polarity::Custom;
  return std::nullopt;
}

/// Numeric cell parameters in record-file column order.
enum class CellField {
  CellArea,
  TechNode,
  BitsPerCell,
  ReadLatency,
  WriteLatency,
  ReadEnergy,
  WriteEnergy,
  Endurance,
  Retention,
  Standby,
};

inline constexpr std::array<CellField, 10> kCellFields{
    CellField::CellArea,   CellField::TechNode,    CellField::BitsPerCell, CellField::ReadLatency,
    CellField::WriteLatency, CellField::ReadEnergy, CellField::WriteEnergy, CellField::Endurance,
    CellField::Retention,  CellField::Standby};

inline const char* field_name(CellField f) {
  switch (f) {
    case CellField::CellArea: return "cell_area_f2";
    case CellField::TechNode: return "tech_node_nm";
    case CellField::BitsPerCell: return "bits_per_cell_max";
    case CellField::ReadLatency: return "read_latency_ns";
    case CellField::WriteLatency: return "write_latency_ns";
    case CellField::ReadEnergy: return "read_energy_pj";
    case CellField::WriteEnergy: return "write_energy_pj";
    case CellField::Endurance: return "endurance_cycles";
    case CellField::Retention: return "retention_s";
    case CellField::Standby: return "standby_power_per_cell_nw";
  }
  return "?";
}

inline std::optional<CellField> parse_field(std::string_view name) {
  for (CellField f : kCellFields) {
    if (name == field_name(f)) return f;
  }
  return std::nullopt;
}

/// True when a larger value is better (density-like); false for cost fields.
/// A smaller node is treated as the optimistic direction.
inline bool is_benefit_field(CellField f) {
  return f == CellField::BitsPerCell || f == CellField::Endurance || f == CellField::Retention;
}

struct CellRecord {
  Technology technology;
  std::string source_id;
  std::array<std::optional<double>, kCellFields.size()> values{};

  std::optional<double> get(CellField f) const { return values[static_cast<std::size_t>(f)]; }
  void set(CellField f, std::optional<double> v) { values[static_cast<std::size_t>(f)] = v; }
  bool has(CellField f) const { return get(f).has_value(); }

  /// Bits per F², counting records without bits_per_cell_max as SLC.
  std::optional<double> density() const {
    auto area = get(CellField::CellArea);
    if (!area) return std::nullopt;
    return get(CellField::BitsPerCell).value_or(1.0) / *area;
  }
};

struct CellDefinition {
  Technology technology;
  Polarity polarity = Polarity::Custom;
  double cell_area_f2 = 0;
  double tech_node_nm = 0;
  int bits_per_cell_max = 1;
  double read_latency_ns = 0;
  double write_latency_ns = 0;
  double read_energy_pj = 0;
  double write_energy_pj = 0;
  double endurance_cycles = 0;
  double retention_s = 0;
  double standby_power_per_cell_nw = 0;
  /// (field name, source id) for every field; "default" marks table defaults.
  std::vector<std::pair<std::string, std::string>> provenance;

  double get(CellField f) const {
    switch (f) {
      case CellField::CellArea: return cell_area_f2;
      case CellField::TechNode: return tech_node_nm;
      case CellField::BitsPerCell: return bits_per_cell_max;
      case CellField::ReadLatency: return read_latency_ns;
      case CellField::WriteLatency: return write_latency_ns;
      case CellField::ReadEnergy: return read_energy_pj;
      case CellField::WriteEnergy: return write_energy_pj;
      case CellField::Endurance: return endurance_cycles;
      case CellField::Retention: return retention_s;
      case CellField::Standby: return standby_power_per_cell_nw;
    }
    return 0;
  }

  void set(CellField f, double v) {
    switch (f) {
      case CellField::CellArea: cell_area_f2 = v; break;
      case CellField::TechNode: tech_node_nm = v; break;
      case CellField::BitsPerCell: bits_per_cell_max = static_cast<int>(v); break;
      case CellField::ReadLatency: read_latency_ns = v; break;
      case CellField::WriteLatency: write_latency_ns = v; break;
      case CellField::ReadEnergy: read_energy_pj = v; break;
      case CellField::WriteEnergy: write_energy_pj = v; break;
      case CellField::Endurance: endurance_cycles = v; break;
      case CellField::Retention: retention_s = v; break;
      case CellField::Standby: standby_power_per_cell_nw = v; break;
    }
  }

  double storage_density_bits_per_f2() const { return bits_per_cell_max / cell_area_f2; }

  std::string label() const { return technology.name() + "/" + polarity_name(polarity); }

  /// Numeric equality on every parameter; provenance is not compared.
  bool same_parameters(const CellDefinition& o) const {
    if (!(technology == o.technology)) return false;
    for (CellField f : kCellFields) {
      if (get(f) != o.get(f)) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Record file
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& cell_record_header() {
  static const std::vector<std::string> kHeader = [] {
    std::vector<std::string> h{"technology", "source_id"};
    for (CellField f : kCellFields) h.emplace_back(field_name(f));
    return h;
  }();
  return kHeader;
}

namespace detail {

inline void check_field_value(CellField f, double v, std::size_t row) {
  const char* name = field_name(f);
  if (std::isnan(v)) throw SchemaError(row, name, "not a number");
  switch (f) {
    case CellField::Endurance:
      if (!(v > 0)) throw SchemaError(row, name, "must be > 0");
      break;
    case CellField::Standby:
      if (!std::isfinite(v) || v < 0) throw SchemaError(row, name, "must be finite and >= 0");
      break;
    case CellField::BitsPerCell:
      if (!std::isfinite(v) || v < 1 || std::floor(v) != v) {
        throw SchemaError(row, name, "must be an integer >= 1");
      }
      break;
    default:
      if (!std::isfinite(v) || !(v > 0)) throw SchemaError(row, name, "must be finite and > 0");
  }
}

}  // namespace detail

/// Parses record-file text. Data rows are numbered from 1.
inline std::vector<CellRecord> parse_cell_records(std::string_view text) {
  csv::Document doc = csv::parse(text);
  std::vector<CellRecord> out;
  if (doc.header.empty()) return out;
  csv::require_header(doc, cell_record_header());
  out.reserve(doc.records.size());
  for (std::size_t i = 0; i < doc.records.size(); ++i) {
    const std::size_t row = i + 1;
    const auto& fields = doc.records[i].fields;
    if (fields.size() != cell_record_header().size()) {
      throw SchemaError(row, "", "expected " + std::to_string(cell_record_header().size()) +
                                     " fields, found " + std::to_string(fields.size()));
    }
    CellRecord rec;
    auto tech = Technology::parse(fields[0]);
    if (!tech) throw SchemaError(row, "technology", "unknown technology '" + fields[0] + "'");
    rec.technology = *tech;
    rec.source_id = fields[1];
    if (rec.source_id.empty()) throw SchemaError(row, "source_id", "must not be empty");
    for (std::size_t k = 0; k < kCellFields.size(); ++k) {
      const std::string& cell = fields[k + 2];
      if (cell.find_first_not_of(" \t") == std::string::npos) continue;
      CellField f = kCellFields[k];
      auto v = parse_double(cell);
      if (!v) throw SchemaError(row, field_name(f), "cannot parse '" + cell + "'");
      detail::check_field_value(f, *v, row);
      rec.set(f, *v);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<CellRecord> load_cell_records(const std::string& path) {
  return parse_cell_records(read_file(path));
}

// ---------------------------------------------------------------------------
// Defaults
// ---------------------------------------------------------------------------

/**
 * Per-technology fallback values for parameters no record reports. Stored in
 * the record-file format, one row per technology (source_id is ignored).
 * The standby default is specified at 22 nm and scaled by (node/22)^2.
 */
class CellDefaults {
 public:
  CellDefaults() = default;
  explicit CellDefaults(std::vector<CellRecord> rows) : rows_(std::move(rows)) {}

  static CellDefaults load(const std::string& path) { return CellDefaults(load_cell_records(path)); }

  /// Defaults row for `tech`; Custom technologies without their own row use
  /// the `Custom:*` row when present.
  const CellRecord* find(const Technology& tech) const {
    for (const auto& r : rows_) {
      if (r.technology == tech) return &r;
    }
    if (tech.is_custom()) {
      for (const auto& r : rows_) {
        if (r.technology.is_custom() && r.technology.custom_name == "*") return &r;
      }
    }
    return nullptr;
  }

  const std::vector<CellRecord>& rows() const { return rows_; }

 private:
  std::vector<CellRecord> rows_;
};

inline constexpr double kStandbyReferenceNodeNm = 22.0;

// ---------------------------------------------------------------------------
// Definitions
// ---------------------------------------------------------------------------

namespace detail {

/// Fills every field of `def` missing in `present` from `defaults`.
inline void complete_from_defaults(CellDefinition& def,
                                   const std::array<bool, kCellFields.size()>& present,
                                   const CellDefaults& defaults) {
  const CellRecord* row = defaults.find(def.technology);
  bool standby_defaulted = false;
  for (CellField f : kCellFields) {
    if (present[static_cast<std::size_t>(f)]) continue;
    std::optional<double> v = row ? row->get(f) : std::nullopt;
    if (!v) {
      throw PreconditionError("no value or default for " + std::string(field_name(f)) + " of " +
                              def.technology.name());
    }
    def.set(f, *v);
    def.provenance.emplace_back(field_name(f), "default");
    if (f == CellField::Standby) standby_defaulted = true;
  }
  if (standby_defaulted) {
    const double s = def.tech_node_nm / kStandbyReferenceNodeNm;
    def.standby_power_per_cell_nw *= s * s;
  }
  // Keep provenance in field order regardless of how it was filled.
  std::stable_sort(def.provenance.begin(), def.provenance.end(), [](const auto& a, const auto& b) {
    return static_cast<int>(*parse_field(a.first)) < static_cast<int>(*parse_field(b.first));
  });
}

}  // namespace detail

/// Converts one record to a definition, filling gaps from `defaults`.
inline CellDefinition definition_from_record(const CellRecord& rec, Polarity polarity,
                                             const CellDefaults& defaults) {
  CellDefinition def;
  def.technology = rec.technology;
  def.polarity = polarity;
  std::array<bool, kCellFields.size()> present{};
  for (CellField f : kCellFields) {
    if (auto v = rec.get(f)) {
      def.set(f, *v);
      def.provenance.emplace_back(field_name(f), rec.source_id);
      present[static_cast<std::size_t>(f)] = true;
    }
  }
  detail::complete_from_defaults(def, present, defaults);
  return def;
}

inline CellRecord record_from_definition(const CellDefinition& def, std::string source_id) {
  CellRecord rec;
  rec.technology = def.technology;
  rec.source_id = std::move(source_id);
  for (CellField f : kCellFields) rec.set(f, def.get(f));
  return rec;
}

/// Builds the optimistic or pessimistic bounding cell for one technology.
inline CellDefinition build_tentpole(const std::vector<CellRecord>& records,
                                     const Technology& technology, Polarity polarity,
                                     const CellDefaults& defaults = {}) {
  if (polarity != Polarity::Optimistic && polarity != Polarity::Pessimistic) {
    throw PreconditionError("tentpole polarity must be optimistic or pessimistic");
  }
  const bool optimistic = polarity == Polarity::Optimistic;

  std::vector<const CellRecord*> matching;
  for (const auto& r : records) {
    if (r.technology == technology) matching.push_back(&r);
  }
  if (matching.empty()) throw PreconditionError("no records for technology " + technology.name());

  const CellRecord* anchor = nullptr;
  for (const CellRecord* r : matching) {
    if (!r->density()) continue;
    if (!anchor) {
      anchor = r;
      continue;
    }
    const double d = *r->density();
    const double best = *anchor->density();
    bool take = optimistic ? d > best : d < best;
    if (d == best) {
      const double a = *r->get(CellField::CellArea);
      const double b = *anchor->get(CellField::CellArea);
      take = a < b || (a == b && r->source_id < anchor->source_id);
    }
    if (take) anchor = r;
  }
  if (!anchor) {
    throw PreconditionError("no " + technology.name() + " record reports cell_area_f2");
  }

  CellDefinition def;
  def.technology = technology;
  def.polarity = polarity;
  std::array<bool, kCellFields.size()> present{};
  for (CellField f : kCellFields) {
    const auto idx = static_cast<std::size_t>(f);
    if (auto v = anchor->get(f)) {
      def.set(f, *v);
      def.provenance.emplace_back(field_name(f), anchor->source_id);
      present[idx] = true;
      continue;
    }
    // Optimistic takes the best value, pessimistic the worst.
    const bool want_max = is_benefit_field(f) == optimistic;
    const CellRecord* pick = nullptr;
    for (const CellRecord* r : matching) {
      auto v = r->get(f);
      if (!v) continue;
      if (!pick || (want_max ? *v > *pick->get(f) : *v < *pick->get(f))) pick = r;
    }
    if (pick) {
      def.set(f, *pick->get(f));
      def.provenance.emplace_back(field_name(f), pick->source_id);
      present[idx] = true;
    }
  }
  detail::complete_from_defaults(def, present, defaults);
  return def;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

struct FieldRange {
  CellField field;
  double lo;
  double hi;
};

/// Published per-technology ranges; a definition outside them gets a warning.
inline const std::vector<FieldRange>& survey_ranges(TechClass cls) {
  using F = CellField;
  static const std::map<TechClass, std::vector<FieldRange>> kRanges{
      {TechClass::SRAM,
       {{F::CellArea, 146, 146}, {F::TechNode, 7, 16}, {F::ReadLatency, 0.5, 1.5},
        {F::WriteLatency, 0.5, 1.5}, {F::ReadEnergy, 1.1, 2.4}, {F::WriteEnergy, 1.1, 33}}},
      {TechClass::PCM,
       {{F::CellArea, 25, 40}, {F::TechNode, 28, 120}, {F::WriteLatency, 10, 3e4},
        {F::Endurance, 1e5, 1e11}, {F::Retention, 1e8, 1e10}}},
      {TechClass::STT,
       {{F::CellArea, 14, 75}, {F::TechNode, 22, 90}, {F::ReadLatency, 1.3, 19},
        {F::WriteLatency, 2, 200}, {F::ReadEnergy, 0.21, 1.2}, {F::WriteEnergy, 0.6, 4.5},
        {F::Endurance, 1e5, 1e15}, {F::Retention, 1e8, 1e8}}},
      {TechClass::SOT,
       {{F::ReadLatency, 1.4, 11}, {F::WriteLatency, 0.35, 17}, {F::Retention, 1e8, 1e8}}},
      {TechClass::RRAM,
       {{F::CellArea, 4, 53}, {F::TechNode, 16, 130}, {F::ReadLatency, 3.3, 2e3},
        {F::WriteLatency, 5, 1e5}, {F::ReadEnergy, 1e-3, 1e-3}, {F::WriteEnergy, 0.68, 0.68},
        {F::Endurance, 1e3, 1e8}, {F::Retention, 1e3, 1e8}}},
      {TechClass::CTT,
       {{F::CellArea, 1, 12}, {F::TechNode, 14, 16}, {F::WriteLatency, 6e7, 2.6e9},
        {F::Endurance, 1e4, 1e4}, {F::Retention, 1e8, 1e8}}},
      {TechClass::FeRAM,
       {{F::TechNode, 40, 40}, {F::ReadLatency, 14, 14}, {F::WriteLatency, 14, 1e3},
        {F::ReadEnergy, 1e-3, 1e-3}, {F::Endurance, 1e4, 1e11}, {F::Retention, 1e5, 1e8}}},
      {TechClass::FeFET,
       {{F::CellArea, 4, 103}, {F::TechNode, 45, 45}, {F::WriteLatency, 0.93, 1.3e3},
        {F::WriteEnergy, 3e-4, 0.01}, {F::Endurance, 1e7, 1e11}}},
      {TechClass::Custom, {}},
  };
  return kRanges.at(cls);
}

/// Reports invariant violations (errors) and out-of-survey-range values (warnings).
inline ValidationReport validate_cell(const CellDefinition& def) {
  ValidationReport rep;
  if (def.technology.is_custom() && def.technology.custom_name.empty()) {
    rep.violations.emplace_back("custom technology requires a name");
  }
  for (CellField f : kCellFields) {
    const double v = def.get(f);
    const std::string name = field_name(f);
    if (std::isnan(v)) {
      rep.violations.push_back(name + " is NaN");
      continue;
    }
    switch (f) {
      case CellField::Endurance:
        if (!(v > 0)) rep.violations.push_back(name + " must be > 0");
        break;
      case CellField::Standby:
        if (!std::isfinite(v) || v < 0) rep.violations.push_back(name + " must be finite and >= 0");
        break;
      case CellField::BitsPerCell:
        if (v < 1) rep.violations.push_back(name + " must be >= 1");
        break;
      default:
        if (!std::isfinite(v) || !(v > 0)) rep.violations.push_back(name + " must be finite and > 0");
    }
  }
  const double density = def.storage_density_bits_per_f2();
  if (!std::isfinite(density) || !(density > 0)) {
    rep.violations.emplace_back("storage density must be finite and > 0");
  }
  for (CellField f : kCellFields) {
    const bool covered = std::any_of(def.provenance.begin(), def.provenance.end(),
                                     [&](const auto& p) { return p.first == field_name(f); });
    if (!covered) rep.violations.push_back(std::string("no provenance for ") + field_name(f));
  }
  for (const FieldRange& r : survey_ranges(def.technology.cls)) {
    const double v = def.get(r.field);
    if (v < r.lo || v > r.hi) {
      rep.warnings.push_back(std::string(field_name(r.field)) + " = " + format_double(v) +
                             " outside surveyed range [" + format_double(r.lo) + ", " +
                             format_double(r.hi) + "] for " + def.technology.name());
    }
  }
  return rep;
}

}  // namespace envmx
