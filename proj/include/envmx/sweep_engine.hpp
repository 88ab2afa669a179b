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
 * @file sweep_engine.hpp
 * @brief Declarative sweep configuration, cross-product expansion and the
 *        per-point evaluation pipeline.
 *
 * Axis order (outermost first): cell, capacity, target, bits per cell,
 * traffic, use-case (tasks per day), buffer coalesce fraction.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "envmx/array_model.hpp"
#include "envmx/cell_library.hpp"
#include "envmx/common.hpp"
#include "envmx/evaluation.hpp"
#include "envmx/fault_injection.hpp"
#include "envmx/result_table.hpp"
#include "envmx/rng.hpp"
#include "envmx/traffic.hpp"

namespace envmx {

using json = nlohmann::json;

/// How a cell on the cell axis is obtained.
struct CellSpec {
  enum class Kind { Tentpole, Record, Inline };

  Kind kind = Kind::Tentpole;
  Technology technology;
  Polarity polarity = Polarity::Optimistic;
  std::string source_id;                  // Record
  std::optional<CellDefinition> inline_cell;  // Inline
};

struct GenericTraffic {
  std::pair<double, double> read_range{1e9, 1e10};
  std::pair<double, double> write_range{1e6, 1e9};
  int points_per_axis = 5;
  int access_width_bits = kDefaultAccessWidthBits;
};

struct WorkloadTraffic {
  std::string path;
  std::vector<std::string> names;  // empty: every workload in the file
};

using TrafficSpec = std::variant<GenericTraffic, WorkloadTraffic>;

struct UseCase {
  bool intermittent = false;
  std::vector<double> tasks_per_day;
  StandbyPolicy standby = StandbyPolicy::retain();
};

struct WriteBufferConfig {
  CellSpec cell;
  std::int64_t capacity_bytes = 64 * 1024;
  OptimizationTarget target = OptimizationTarget::WriteLatency;
  std::vector<double> coalesce_fractions{0.0};
  bool mask_latency = false;
};

/// Fault parameters for one (technology, polarity); either may be absent.
struct FaultEntry {
  std::optional<double> slc_bit_error_rate;
  std::optional<double> mlc_adjacent_q;
};

struct FaultsConfig {
  // technology name -> polarity name (or "*") -> entry
  std::map<std::string, std::map<std::string, FaultEntry>> models;
  std::string models_path;  // empty when given inline
  std::string weights;
  AccuracyAdapter adapter = AccuracyAdapter::TinyLinearClassifier;
  std::vector<std::uint64_t> seeds{1};
  std::optional<double> accuracy_floor;
  LevelCoding level_coding = LevelCoding::Gray;
};

struct OutputConfig {
  std::string directory = "out";
  bool per_technology_csv = false;
};

struct SweepConfig {
  std::string base_dir;  // relative paths resolve against this
  std::string cell_records = "cells/survey.csv";
  std::string cell_defaults = "cells/defaults.csv";
  std::vector<CellSpec> cells;
  std::vector<std::int64_t> capacities_bytes;
  int word_width_bits = 64;
  std::vector<OptimizationTarget> optimization_targets;
  std::vector<int> bits_per_cell{1};
  TrafficSpec traffic = GenericTraffic{};
  UseCase use_case;
  std::optional<WriteBufferConfig> write_buffer;
  std::optional<FaultsConfig> faults;
  Calibration calibration;
  OutputConfig output;
  std::uint64_t seed = 0;
  bool fail_fast = false;

  std::string resolve(const std::string& path) const {
    if (path.empty() || std::filesystem::path(path).is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / path).lexically_normal().string();
  }
};

/// JSON view of a cell definition with per-field provenance.
inline json cell_definition_json(const CellDefinition& def) {
  json j = json::object();
  j["technology"] = def.technology.name();
  j["polarity"] = polarity_name(def.polarity);
  for (CellField f : kCellFields) {
    const double v = def.get(f);
    if (f == CellField::BitsPerCell) j[field_name(f)] = def.bits_per_cell_max;
    else if (std::isinf(v)) j[field_name(f)] = "inf";
    else j[field_name(f)] = v;
  }
  j["storage_density_bits_per_f2"] = def.storage_density_bits_per_f2();
  json prov = json::object();
  for (const auto& [field, source] : def.provenance) prov[field] = source;
  j["provenance"] = prov;
  return j;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

/// JSON object view that tracks its pointer and rejects unknown keys.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError(ptr_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        throw ConfigError(child(it.key()), "unknown key '" + it.key() + "'");
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string child(const std::string& key) const { return ptr_ + "/" + escape(key); }
  const std::string& pointer() const { return ptr_; }

  const json& require(const char* key) const {
    if (!has(key)) throw ConfigError(ptr_, std::string("missing required key '") + key + "'");
    return j_.at(key);
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

 private:
  const json& j_;
  std::string ptr_;
};

inline double as_number(const json& j, const std::string& ptr) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = to_lower(j.get<std::string>());
    if (s == "inf") return kInf;
  }
  throw ConfigError(ptr, "expected a number");
}

inline double as_positive(const json& j, const std::string& ptr) {
  const double v = as_number(j, ptr);
  if (!(v > 0) || std::isinf(v)) throw ConfigError(ptr, "expected a finite number > 0");
  return v;
}

inline std::int64_t as_integer(const json& j, const std::string& ptr) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.2e18) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(ptr, "expected an integer");
}

inline bool as_bool(const json& j, const std::string& ptr) {
  if (!j.is_boolean()) throw ConfigError(ptr, "expected true or false");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

inline const json& as_nonempty_array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw ConfigError(ptr, "expected an array");
  if (j.empty()) throw ConfigError(ptr, "must not be empty");
  return j;
}

inline std::pair<double, double> as_range(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(ptr, "expected [lo, hi]");
  const double lo = as_positive(j[0], ptr + "/0");
  const double hi = as_positive(j[1], ptr + "/1");
  if (lo > hi) throw ConfigError(ptr, "lo must be <= hi");
  return {lo, hi};
}

inline Technology as_technology(const json& j, const std::string& ptr) {
  auto t = Technology::parse(as_string(j, ptr));
  if (!t) throw ConfigError(ptr, "unknown technology '" + j.get<std::string>() + "'");
  return *t;
}

inline CellDefinition parse_inline_cell(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  std::vector<const char*> keys{"technology", "polarity"};
  for (CellField f : kCellFields) keys.push_back(field_name(f));
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError(r.child(it.key()), "unknown key '" + it.key() + "'");
    }
  }
  CellDefinition def;
  def.technology = as_technology(r.require("technology"), r.child("technology"));
  def.polarity = Polarity::Custom;
  if (r.has("polarity")) {
    auto p = parse_polarity(as_string(r.at("polarity"), r.child("polarity")));
    if (!p) throw ConfigError(r.child("polarity"), "unknown polarity");
    def.polarity = *p;
  }
  for (CellField f : kCellFields) {
    const std::string ptr_f = r.child(field_name(f));
    const double v = as_number(r.require(field_name(f)), ptr_f);
    try {
      check_field_value(f, v, 1);
    } catch (const SchemaError& e) {
      throw ConfigError(ptr_f, e.what());
    }
    def.set(f, v);
    def.provenance.emplace_back(field_name(f), "inline");
  }
  return def;
}

inline CellSpec parse_cell_spec(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  CellSpec spec;
  if (r.has("inline")) {
    r.allow({"inline"});
    spec.kind = CellSpec::Kind::Inline;
    spec.inline_cell = parse_inline_cell(r.at("inline"), r.child("inline"));
    spec.technology = spec.inline_cell->technology;
    spec.polarity = spec.inline_cell->polarity;
    return spec;
  }
  r.allow({"technology", "polarity", "source_id"});
  spec.technology = as_technology(r.require("technology"), r.child("technology"));
  auto p = parse_polarity(as_string(r.require("polarity"), r.child("polarity")));
  if (!p) throw ConfigError(r.child("polarity"), "unknown polarity");
  spec.polarity = *p;
  if (spec.polarity == Polarity::Optimistic || spec.polarity == Polarity::Pessimistic) {
    if (r.has("source_id")) {
      throw ConfigError(r.child("source_id"), "source_id only applies to reference/custom cells");
    }
    spec.kind = CellSpec::Kind::Tentpole;
  } else {
    spec.kind = CellSpec::Kind::Record;
    spec.source_id = as_string(r.require("source_id"), r.child("source_id"));
    if (spec.source_id.empty()) throw ConfigError(r.child("source_id"), "must not be empty");
  }
  return spec;
}

inline json cell_spec_json(const CellSpec& s) {
  if (s.kind == CellSpec::Kind::Inline) {
    json in = json::object();
    in["technology"] = s.inline_cell->technology.name();
    in["polarity"] = polarity_name(s.inline_cell->polarity);
    for (CellField f : kCellFields) {
      const double v = s.inline_cell->get(f);
      if (std::isinf(v)) in[field_name(f)] = "inf";
      else in[field_name(f)] = v;
    }
    return json{{"inline", in}};
  }
  json out{{"technology", s.technology.name()}, {"polarity", polarity_name(s.polarity)}};
  if (s.kind == CellSpec::Kind::Record) out["source_id"] = s.source_id;
  return out;
}

inline StandbyPolicy parse_standby(const std::string& name, const std::string& ptr) {
  const std::string l = to_lower(name);
  if (l == "retain") return StandbyPolicy::retain();
  if (l == "power_off" || l == "poweroff") return StandbyPolicy::power_off();
  if (l == "reload" || l == "reload_from_off_chip") return StandbyPolicy::reload();
  throw ConfigError(ptr, "unknown standby policy '" + name + "'");
}

inline FaultEntry parse_fault_entry(const json& j, const std::string& ptr) {
  ObjectReader r(j, ptr);
  r.allow({"slc_bit_error_rate", "mlc_adjacent_q"});
  FaultEntry e;
  if (r.has("slc_bit_error_rate")) {
    const double v = as_number(r.at("slc_bit_error_rate"), r.child("slc_bit_error_rate"));
    if (!(v >= 0 && v <= 1)) throw ConfigError(r.child("slc_bit_error_rate"), "must be in [0, 1]");
    e.slc_bit_error_rate = v;
  }
  if (r.has("mlc_adjacent_q")) {
    const double v = as_number(r.at("mlc_adjacent_q"), r.child("mlc_adjacent_q"));
    if (!(v >= 0 && v <= 0.5)) throw ConfigError(r.child("mlc_adjacent_q"), "must be in [0, 0.5]");
    e.mlc_adjacent_q = v;
  }
  return e;
}

/// `{ "<technology>": { "<polarity>|*": {slc_bit_error_rate, mlc_adjacent_q} } }`
inline std::map<std::string, std::map<std::string, FaultEntry>> parse_fault_models(
    const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  std::map<std::string, std::map<std::string, FaultEntry>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string tptr = ptr + "/" + ObjectReader::escape(it.key());
    auto tech = Technology::parse(it.key());
    if (!tech) throw ConfigError(tptr, "unknown technology '" + it.key() + "'");
    if (!it.value().is_object()) throw ConfigError(tptr, "expected an object");
    auto& per = out[tech->name()];
    for (auto pt = it.value().begin(); pt != it.value().end(); ++pt) {
      const std::string pptr = tptr + "/" + ObjectReader::escape(pt.key());
      std::string pol = pt.key();
      if (pol != "*") {
        auto p = parse_polarity(pol);
        if (!p) throw ConfigError(pptr, "unknown polarity '" + pol + "'");
        pol = polarity_name(*p);
      }
      per[pol] = parse_fault_entry(pt.value(), pptr);
    }
  }
  return out;
}

}  // namespace detail

/// Parses a sweep configuration document. `base_dir` anchors relative paths.
inline SweepConfig parse_config_json(const json& doc, const std::string& base_dir = "") {
  using namespace detail;
  ObjectReader root(doc, "");
  root.allow({"cell_records", "cell_defaults", "cells", "capacities_bytes", "word_width_bits",
              "optimization_targets", "bits_per_cell", "traffic", "use_case", "write_buffer",
              "faults", "calibration", "output", "seed", "fail_fast"});

  SweepConfig cfg;
  cfg.base_dir = base_dir;
  if (root.has("cell_records")) cfg.cell_records = as_string(root.at("cell_records"), "/cell_records");
  if (root.has("cell_defaults")) {
    cfg.cell_defaults = as_string(root.at("cell_defaults"), "/cell_defaults");
  }

  const json& cells = as_nonempty_array(root.require("cells"), "/cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cfg.cells.push_back(parse_cell_spec(cells[i], "/cells/" + std::to_string(i)));
  }

  const json& caps = as_nonempty_array(root.require("capacities_bytes"), "/capacities_bytes");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    const std::string p = "/capacities_bytes/" + std::to_string(i);
    const auto v = as_integer(caps[i], p);
    if (v < 1024) throw ConfigError(p, "capacity must be >= 1024 bytes");
    cfg.capacities_bytes.push_back(v);
  }

  if (root.has("word_width_bits")) {
    const auto w = as_integer(root.at("word_width_bits"), "/word_width_bits");
    if (w < 8 || w > (1 << 20)) throw ConfigError("/word_width_bits", "must be >= 8");
    cfg.word_width_bits = static_cast<int>(w);
  }

  const json& targets = as_nonempty_array(root.require("optimization_targets"), "/optimization_targets");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string p = "/optimization_targets/" + std::to_string(i);
    auto t = parse_target(as_string(targets[i], p));
    if (!t) throw ConfigError(p, "unknown optimization target '" + targets[i].get<std::string>() + "'");
    cfg.optimization_targets.push_back(*t);
  }

  if (root.has("bits_per_cell")) {
    const json& bs = as_nonempty_array(root.at("bits_per_cell"), "/bits_per_cell");
    cfg.bits_per_cell.clear();
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string p = "/bits_per_cell/" + std::to_string(i);
      const auto b = as_integer(bs[i], p);
      if (b < 1 || b > 8) throw ConfigError(p, "bits per cell must be in [1, 8]");
      cfg.bits_per_cell.push_back(static_cast<int>(b));
    }
  }

  if (root.has("traffic")) {
    ObjectReader tr(root.at("traffic"), "/traffic");
    tr.allow({"generic", "workloads", "workload_names"});
    if (tr.has("generic") == tr.has("workloads")) {
      throw ConfigError("/traffic", "exactly one of 'generic' or 'workloads' is required");
    }
    if (tr.has("generic")) {
      if (tr.has("workload_names")) {
        throw ConfigError("/traffic/workload_names", "only valid with 'workloads'");
      }
      ObjectReader g(tr.at("generic"), "/traffic/generic");
      g.allow({"read_bytes_per_s", "write_bytes_per_s", "points_per_axis", "access_width_bits"});
      GenericTraffic gt;
      gt.read_range = as_range(g.require("read_bytes_per_s"), g.child("read_bytes_per_s"));
      gt.write_range = as_range(g.require("write_bytes_per_s"), g.child("write_bytes_per_s"));
      if (g.has("points_per_axis")) {
        const auto n = as_integer(g.at("points_per_axis"), g.child("points_per_axis"));
        if (n < 1 || n > 10000) throw ConfigError(g.child("points_per_axis"), "must be in [1, 10000]");
        gt.points_per_axis = static_cast<int>(n);
      }
      if (gt.points_per_axis == 1 &&
          (gt.read_range.first != gt.read_range.second || gt.write_range.first != gt.write_range.second)) {
        throw ConfigError(g.child("points_per_axis"), "a single point needs lo == hi");
      }
      if (g.has("access_width_bits")) {
        const auto w = as_integer(g.at("access_width_bits"), g.child("access_width_bits"));
        if (w < 8) throw ConfigError(g.child("access_width_bits"), "must be >= 8");
        gt.access_width_bits = static_cast<int>(w);
      }
      cfg.traffic = gt;
    } else {
      WorkloadTraffic wt;
      wt.path = as_string(tr.at("workloads"), "/traffic/workloads");
      if (tr.has("workload_names")) {
        const json& names = as_nonempty_array(tr.at("workload_names"), "/traffic/workload_names");
        for (std::size_t i = 0; i < names.size(); ++i) {
          wt.names.push_back(as_string(names[i], "/traffic/workload_names/" + std::to_string(i)));
        }
      }
      cfg.traffic = wt;
    }
  }

  if (root.has("use_case")) {
    ObjectReader uc(root.at("use_case"), "/use_case");
    uc.allow({"mode", "tasks_per_day", "standby", "reload_energy_per_bit_pj"});
    const std::string mode = to_lower(as_string(uc.require("mode"), "/use_case/mode"));
    if (mode == "continuous") {
      for (const char* k : {"tasks_per_day", "standby", "reload_energy_per_bit_pj"}) {
        if (uc.has(k)) throw ConfigError(uc.child(k), "only valid for intermittent mode");
      }
    } else if (mode == "intermittent") {
      cfg.use_case.intermittent = true;
      const json& n = as_nonempty_array(uc.require("tasks_per_day"), "/use_case/tasks_per_day");
      for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string p = "/use_case/tasks_per_day/" + std::to_string(i);
        const double v = as_number(n[i], p);
        if (!(v >= 0) || std::isinf(v)) throw ConfigError(p, "must be finite and >= 0");
        cfg.use_case.tasks_per_day.push_back(v);
      }
      if (uc.has("standby")) {
        cfg.use_case.standby = parse_standby(as_string(uc.at("standby"), "/use_case/standby"),
                                             "/use_case/standby");
      }
      if (uc.has("reload_energy_per_bit_pj")) {
        cfg.use_case.standby.reload_energy_per_bit_pj =
            as_positive(uc.at("reload_energy_per_bit_pj"), "/use_case/reload_energy_per_bit_pj");
      }
      if (!std::holds_alternative<WorkloadTraffic>(cfg.traffic)) {
        throw ConfigError("/use_case/mode", "intermittent mode needs workload traffic");
      }
    } else {
      throw ConfigError("/use_case/mode", "expected 'continuous' or 'intermittent'");
    }
  }

  if (root.has("write_buffer")) {
    ObjectReader wb(root.at("write_buffer"), "/write_buffer");
    wb.allow({"cell", "capacity_bytes", "optimization_target", "coalesce_fractions", "mask_latency"});
    WriteBufferConfig b;
    b.cell = parse_cell_spec(wb.require("cell"), "/write_buffer/cell");
    if (wb.has("capacity_bytes")) {
      b.capacity_bytes = as_integer(wb.at("capacity_bytes"), "/write_buffer/capacity_bytes");
      if (b.capacity_bytes < 1024) throw ConfigError("/write_buffer/capacity_bytes", "must be >= 1024");
    }
    if (wb.has("optimization_target")) {
      auto t = parse_target(as_string(wb.at("optimization_target"), "/write_buffer/optimization_target"));
      if (!t) throw ConfigError("/write_buffer/optimization_target", "unknown optimization target");
      b.target = *t;
    }
    if (wb.has("coalesce_fractions")) {
      const json& cs = as_nonempty_array(wb.at("coalesce_fractions"), "/write_buffer/coalesce_fractions");
      b.coalesce_fractions.clear();
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string p = "/write_buffer/coalesce_fractions/" + std::to_string(i);
        const double c = as_number(cs[i], p);
        if (!(c >= 0 && c <= 1)) throw ConfigError(p, "must be in [0, 1]");
        b.coalesce_fractions.push_back(c);
      }
    }
    if (wb.has("mask_latency")) b.mask_latency = as_bool(wb.at("mask_latency"), "/write_buffer/mask_latency");
    cfg.write_buffer = b;
  }

  if (root.has("faults")) {
    ObjectReader fr(root.at("faults"), "/faults");
    fr.allow({"models", "weights", "adapter", "seeds", "accuracy_floor", "level_coding"});
    FaultsConfig f;
    const json& models = fr.require("models");
    if (models.is_string()) {
      f.models_path = models.get<std::string>();
    } else {
      f.models = parse_fault_models(models, "/faults/models");
    }
    f.weights = as_string(fr.require("weights"), "/faults/weights");
    if (fr.has("adapter")) {
      auto a = parse_adapter(as_string(fr.at("adapter"), "/faults/adapter"));
      if (!a) throw ConfigError("/faults/adapter", "unknown accuracy adapter");
      f.adapter = *a;
    }
    if (fr.has("seeds")) {
      const json& ss = as_nonempty_array(fr.at("seeds"), "/faults/seeds");
      f.seeds.clear();
      for (std::size_t i = 0; i < ss.size(); ++i) {
        const std::string p = "/faults/seeds/" + std::to_string(i);
        const auto s = as_integer(ss[i], p);
        if (s < 0) throw ConfigError(p, "must be >= 0");
        f.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    }
    if (fr.has("accuracy_floor")) f.accuracy_floor = as_number(fr.at("accuracy_floor"), "/faults/accuracy_floor");
    if (fr.has("level_coding")) {
      const std::string lc = to_lower(as_string(fr.at("level_coding"), "/faults/level_coding"));
      if (lc == "gray") f.level_coding = LevelCoding::Gray;
      else if (lc == "binary") f.level_coding = LevelCoding::Binary;
      else throw ConfigError("/faults/level_coding", "expected 'gray' or 'binary'");
    }
    cfg.faults = f;
  }

  if (root.has("calibration")) {
    ObjectReader cr(root.at("calibration"), "/calibration");
    cr.allow({"k_dec", "k_sense", "k_fixed", "d0", "d1", "d2", "d3", "e0", "e1", "e2",
              "lambda_peri_mw_per_mm2", "mlc_latency_factor", "mlc_energy_factor"});
    auto read = [&](const char* key, double& dst, bool positive) {
      if (!cr.has(key)) return;
      const double v = as_number(cr.at(key), cr.child(key));
      if (std::isinf(v) || (positive ? !(v > 0) : !(v >= 0))) {
        throw ConfigError(cr.child(key), positive ? "must be finite and > 0" : "must be finite and >= 0");
      }
      dst = v;
    };
    Calibration& c = cfg.calibration;
    read("k_dec", c.k_dec, false);
    read("k_sense", c.k_sense, false);
    read("k_fixed", c.k_fixed, false);
    read("d0", c.d0, false);
    read("d1", c.d1, false);
    read("d2", c.d2, false);
    read("d3", c.d3, false);
    read("e0", c.e0, false);
    read("e1", c.e1, false);
    read("e2", c.e2, false);
    read("lambda_peri_mw_per_mm2", c.lambda_peri_mw_per_mm2, false);
    read("mlc_latency_factor", c.mlc_latency_factor, true);
    read("mlc_energy_factor", c.mlc_energy_factor, true);
  }

  if (root.has("output")) {
    ObjectReader o(root.at("output"), "/output");
    o.allow({"directory", "per_technology_csv"});
    if (o.has("directory")) cfg.output.directory = as_string(o.at("directory"), "/output/directory");
    if (o.has("per_technology_csv")) {
      cfg.output.per_technology_csv = as_bool(o.at("per_technology_csv"), "/output/per_technology_csv");
    }
  }

  if (root.has("seed")) {
    const auto s = as_integer(root.at("seed"), "/seed");
    if (s < 0) throw ConfigError("/seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (root.has("fail_fast")) cfg.fail_fast = as_bool(root.at("fail_fast"), "/fail_fast");
  return cfg;
}

inline SweepConfig parse_config_text(std::string_view text, const std::string& base_dir = "") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config_json(doc, base_dir);
}

inline SweepConfig parse_config(const std::string& path) {
  const std::string text = read_file(path);
  return parse_config_text(text, std::filesystem::path(path).parent_path().string());
}

/// Sorted keys, every default materialized; stable for a given configuration.
inline json canonical_config(const SweepConfig& cfg) {
  using detail::cell_spec_json;
  json j = json::object();
  j["cell_records"] = cfg.cell_records;
  j["cell_defaults"] = cfg.cell_defaults;
  j["cells"] = json::array();
  for (const auto& c : cfg.cells) j["cells"].push_back(cell_spec_json(c));
  j["capacities_bytes"] = cfg.capacities_bytes;
  j["word_width_bits"] = cfg.word_width_bits;
  j["optimization_targets"] = json::array();
  for (auto t : cfg.optimization_targets) j["optimization_targets"].push_back(target_name(t));
  j["bits_per_cell"] = cfg.bits_per_cell;

  if (const auto* g = std::get_if<GenericTraffic>(&cfg.traffic)) {
    j["traffic"] = {{"generic",
                     {{"read_bytes_per_s", {g->read_range.first, g->read_range.second}},
                      {"write_bytes_per_s", {g->write_range.first, g->write_range.second}},
                      {"points_per_axis", g->points_per_axis},
                      {"access_width_bits", g->access_width_bits}}}};
  } else {
    const auto& w = std::get<WorkloadTraffic>(cfg.traffic);
    j["traffic"] = {{"workloads", w.path}};
    if (!w.names.empty()) j["traffic"]["workload_names"] = w.names;
  }

  if (cfg.use_case.intermittent) {
    j["use_case"] = {{"mode", "intermittent"},
                     {"tasks_per_day", cfg.use_case.tasks_per_day},
                     {"standby", standby_name(cfg.use_case.standby)},
                     {"reload_energy_per_bit_pj", cfg.use_case.standby.reload_energy_per_bit_pj}};
  } else {
    j["use_case"] = {{"mode", "continuous"}};
  }

  if (cfg.write_buffer) {
    const auto& b = *cfg.write_buffer;
    j["write_buffer"] = {{"cell", cell_spec_json(b.cell)},
                         {"capacity_bytes", b.capacity_bytes},
                         {"optimization_target", target_name(b.target)},
                         {"coalesce_fractions", b.coalesce_fractions},
                         {"mask_latency", b.mask_latency}};
  }

  if (cfg.faults) {
    const auto& f = *cfg.faults;
    json fj = json::object();
    if (!f.models_path.empty()) {
      fj["models"] = f.models_path;
    } else {
      json m = json::object();
      for (const auto& [tech, per] : f.models) {
        for (const auto& [pol, e] : per) {
          json ej = json::object();
          if (e.slc_bit_error_rate) ej["slc_bit_error_rate"] = *e.slc_bit_error_rate;
          if (e.mlc_adjacent_q) ej["mlc_adjacent_q"] = *e.mlc_adjacent_q;
          m[tech][pol] = ej;
        }
      }
      fj["models"] = m;
    }
    fj["weights"] = f.weights;
    fj["adapter"] = f.adapter == AccuracyAdapter::Mse ? "mse" : "tiny_linear_classifier";
    fj["seeds"] = f.seeds;
    fj["accuracy_floor"] = f.accuracy_floor ? json(*f.accuracy_floor) : json(nullptr);
    fj["level_coding"] = f.level_coding == LevelCoding::Gray ? "gray" : "binary";
    j["faults"] = fj;
  }

  const Calibration& c = cfg.calibration;
  j["calibration"] = {{"k_dec", c.k_dec}, {"k_sense", c.k_sense}, {"k_fixed", c.k_fixed},
                      {"d0", c.d0}, {"d1", c.d1}, {"d2", c.d2}, {"d3", c.d3},
                      {"e0", c.e0}, {"e1", c.e1}, {"e2", c.e2},
                      {"lambda_peri_mw_per_mm2", c.lambda_peri_mw_per_mm2},
                      {"mlc_latency_factor", c.mlc_latency_factor},
                      {"mlc_energy_factor", c.mlc_energy_factor}};
  j["output"] = {{"directory", cfg.output.directory}, {"per_technology_csv", cfg.output.per_technology_csv}};
  j["seed"] = cfg.seed;
  j["fail_fast"] = cfg.fail_fast;
  return j;
}

inline std::string canonical_config_text(const SweepConfig& cfg) {
  return canonical_config(cfg).dump(2) + "\n";
}

inline std::string config_fingerprint(const SweepConfig& cfg) {
  return hex64(fnv1a64(canonical_config(cfg).dump()));
}

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

/// One design point; indices refer to the corresponding config axis.
struct DesignPoint {
  std::size_t cell = 0;
  std::size_t capacity = 0;
  std::size_t target = 0;
  std::size_t bits = 0;
  std::size_t traffic = 0;
  std::size_t use_case = 0;
  std::size_t buffer = 0;
};

/// Traffic axis entries: generic patterns or workloads, never both.
struct TrafficAxis {
  std::vector<TrafficPattern> patterns;
  std::vector<WorkloadSpec> workloads;

  std::size_t size() const { return workloads.empty() ? patterns.size() : workloads.size(); }
};

inline TrafficAxis resolve_traffic(const SweepConfig& cfg) {
  TrafficAxis axis;
  if (const auto* g = std::get_if<GenericTraffic>(&cfg.traffic)) {
    axis.patterns = generate_generic_sweep(g->read_range, g->write_range, g->points_per_axis,
                                           g->access_width_bits);
    return axis;
  }
  const auto& w = std::get<WorkloadTraffic>(cfg.traffic);
  auto all = load_workloads(cfg.resolve(w.path));
  if (w.names.empty()) {
    axis.workloads = std::move(all);
  } else {
    for (std::size_t i = 0; i < w.names.size(); ++i) {
      auto it = std::find_if(all.begin(), all.end(), [&](const WorkloadSpec& s) { return s.name == w.names[i]; });
      if (it == all.end()) {
        throw ConfigError("/traffic/workload_names/" + std::to_string(i),
                          "no workload named '" + w.names[i] + "'");
      }
      axis.workloads.push_back(*it);
    }
  }
  if (axis.workloads.empty()) throw ConfigError("/traffic/workloads", "workload file has no rows");
  return axis;
}

inline std::size_t use_case_axis_size(const SweepConfig& cfg) {
  return cfg.use_case.intermittent ? cfg.use_case.tasks_per_day.size() : 1;
}

inline std::size_t buffer_axis_size(const SweepConfig& cfg) {
  return cfg.write_buffer ? cfg.write_buffer->coalesce_fractions.size() : 1;
}

inline std::vector<DesignPoint> expand(const SweepConfig& cfg, std::size_t traffic_points) {
  std::vector<DesignPoint> out;
  const std::size_t nu = use_case_axis_size(cfg);
  const std::size_t nb = buffer_axis_size(cfg);
  out.reserve(cfg.cells.size() * cfg.capacities_bytes.size() * cfg.optimization_targets.size() *
              cfg.bits_per_cell.size() * traffic_points * nu * nb);
  for (std::size_t a = 0; a < cfg.cells.size(); ++a)
    for (std::size_t b = 0; b < cfg.capacities_bytes.size(); ++b)
      for (std::size_t c = 0; c < cfg.optimization_targets.size(); ++c)
        for (std::size_t d = 0; d < cfg.bits_per_cell.size(); ++d)
          for (std::size_t e = 0; e < traffic_points; ++e)
            for (std::size_t f = 0; f < nu; ++f)
              for (std::size_t g = 0; g < nb; ++g) out.push_back({a, b, c, d, e, f, g});
  return out;
}

inline std::vector<DesignPoint> expand(const SweepConfig& cfg) {
  return expand(cfg, resolve_traffic(cfg).size());
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

/// A design point failed under fail_fast.
class RunError : public Error {
 public:
  using Error::Error;
};

struct RunOptions {
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

namespace detail {

template <class T>
struct Outcome {
  std::optional<T> value;
  std::string error;
};

inline CellDefinition resolve_cell(const CellSpec& spec, const std::vector<CellRecord>& records,
                                   const CellDefaults& defaults) {
  switch (spec.kind) {
    case CellSpec::Kind::Inline:
      return *spec.inline_cell;
    case CellSpec::Kind::Tentpole:
      return build_tentpole(records, spec.technology, spec.polarity, defaults);
    case CellSpec::Kind::Record:
      for (const auto& r : records) {
        if (r.technology == spec.technology && r.source_id == spec.source_id) {
          return definition_from_record(r, spec.polarity, defaults);
        }
      }
      throw PreconditionError("no record for " + spec.technology.name() + " with source_id '" +
                              spec.source_id + "'");
  }
  throw PreconditionError("bad cell spec");
}

inline bool needs_records(const CellSpec& s) { return s.kind != CellSpec::Kind::Inline; }

inline std::optional<FaultModel> fault_model_for(const FaultsConfig& f, const CellDefinition& cell,
                                                 int bits_per_cell) {
  auto t = f.models.find(cell.technology.name());
  if (t == f.models.end()) return std::nullopt;
  auto p = t->second.find(polarity_name(cell.polarity));
  if (p == t->second.end()) p = t->second.find("*");
  if (p == t->second.end()) return std::nullopt;
  if (bits_per_cell == 1) {
    if (!p->second.slc_bit_error_rate) return std::nullopt;
    return FaultModel{SlcFaults{*p->second.slc_bit_error_rate}};
  }
  if (!p->second.mlc_adjacent_q) return std::nullopt;
  return FaultModel{adjacent_level_model(1 << bits_per_cell, *p->second.mlc_adjacent_q)};
}

inline void fill_array(EvaluationRow& row, const ArrayCharacterization& a) {
  row.rows = a.organization.rows;
  row.cols = a.organization.cols;
  row.subarrays = a.organization.subarrays;
  row.read_latency_ns = a.read_latency_ns;
  row.write_latency_ns = a.write_latency_ns;
  row.read_energy_pj = a.read_energy_pj;
  row.write_energy_pj = a.write_energy_pj;
  row.leakage_mw = a.leakage_mw;
  row.area_mm2 = a.area_mm2;
  row.area_efficiency = a.area_efficiency;
}

}  // namespace detail

/// Everything the per-point pipeline needs, loaded once.
struct PreparedSweep {
  SweepConfig config;
  std::uint64_t seed = 0;
  TrafficAxis traffic;
  std::vector<detail::Outcome<CellDefinition>> cells;
  std::optional<detail::Outcome<ArrayCharacterization>> buffer;
  std::optional<WeightsFile> weights;
  std::optional<EvalSet> eval_set;
  std::vector<DesignPoint> points;
  std::string fingerprint;
};

inline PreparedSweep prepare(const SweepConfig& config, std::optional<std::uint64_t> seed = std::nullopt) {
  PreparedSweep p;
  p.config = config;
  if (seed) p.config.seed = *seed;
  p.seed = p.config.seed;
  p.fingerprint = config_fingerprint(p.config);
  const SweepConfig& cfg = p.config;

  std::vector<CellRecord> records;
  const bool any_records =
      std::any_of(cfg.cells.begin(), cfg.cells.end(), detail::needs_records) ||
      (cfg.write_buffer && detail::needs_records(cfg.write_buffer->cell));
  if (any_records) records = load_cell_records(cfg.resolve(cfg.cell_records));
  CellDefaults defaults;
  if (!cfg.cell_defaults.empty() && std::filesystem::exists(cfg.resolve(cfg.cell_defaults))) {
    defaults = CellDefaults::load(cfg.resolve(cfg.cell_defaults));
  }

  for (const auto& spec : cfg.cells) {
    detail::Outcome<CellDefinition> o;
    try {
      o.value = detail::resolve_cell(spec, records, defaults);
    } catch (const Error& e) {
      o.error = e.what();
    }
    p.cells.push_back(std::move(o));
  }

  if (cfg.write_buffer) {
    detail::Outcome<ArrayCharacterization> o;
    try {
      const CellDefinition bc = detail::resolve_cell(cfg.write_buffer->cell, records, defaults);
      o.value = optimize(bc, cfg.write_buffer->capacity_bytes, cfg.word_width_bits,
                         cfg.write_buffer->target, 1, cfg.calibration)
                    .characterization;
    } catch (const Error& e) {
      o.error = std::string("write buffer: ") + e.what();
    }
    p.buffer = std::move(o);
  }

  if (cfg.faults) {
    if (!cfg.faults->models_path.empty()) {
      json doc;
      try {
        doc = json::parse(read_file(cfg.resolve(cfg.faults->models_path)));
      } catch (const json::parse_error& e) {
        throw ConfigError("/faults/models", std::string("invalid JSON: ") + e.what());
      }
      p.config.faults->models = detail::parse_fault_models(doc, "/faults/models");
    }
    const std::string wpath = cfg.resolve(cfg.faults->weights);
    p.weights = load_weights(wpath);
    if (cfg.faults->adapter == AccuracyAdapter::TinyLinearClassifier) p.eval_set = load_eval_set(wpath);
  }

  p.traffic = resolve_traffic(cfg);
  p.points = expand(cfg, p.traffic.size());
  return p;
}

inline std::string describe(const PreparedSweep& p, const DesignPoint& d) {
  const SweepConfig& cfg = p.config;
  std::string s = "cell=" + cfg.cells[d.cell].technology.name() + "/" +
                  polarity_name(cfg.cells[d.cell].polarity) +
                  " capacity=" + std::to_string(cfg.capacities_bytes[d.capacity]) +
                  " target=" + target_name(cfg.optimization_targets[d.target]) +
                  " B=" + std::to_string(cfg.bits_per_cell[d.bits]);
  if (!p.traffic.workloads.empty()) s += " workload=" + p.traffic.workloads[d.traffic].name;
  else s += " traffic=" + std::to_string(d.traffic);
  if (cfg.use_case.intermittent) s += " tasks_per_day=" + format_double(cfg.use_case.tasks_per_day[d.use_case]);
  if (cfg.write_buffer) s += " c=" + format_double(cfg.write_buffer->coalesce_fractions[d.buffer]);
  return s;
}

namespace detail {

/// Mean accuracy over the configured seeds; absent when no model applies.
inline std::optional<double> accuracy_for(const PreparedSweep& p, const CellDefinition& cell, int b) {
  const FaultsConfig& f = *p.config.faults;
  const std::optional<FaultModel> model = fault_model_for(f, cell, b);
  StoredTensor tensor;
  tensor.payload = p.weights->payload;
  tensor.bits_per_cell = b;
  tensor.level_coding = f.level_coding;
  tensor.quantization = p.weights->quantization;
  double sum = 0;
  for (std::uint64_t s : f.seeds) {
    InjectionResult r;
    if (model) {
      r = inject(tensor, *model, mix64(p.seed ^ mix64(s)));
    } else {
      r.corrupted = tensor.payload;  // no model: storage is ideal
    }
    sum += evaluate_accuracy(*p.weights, p.eval_set ? &*p.eval_set : nullptr, r, f.adapter);
  }
  return sum / static_cast<double>(f.seeds.size());
}

inline EvaluationRow evaluate_point(const PreparedSweep& p, const DesignPoint& d,
                                    const std::optional<double>& accuracy) {
  const SweepConfig& cfg = p.config;
  const CellSpec& spec = cfg.cells[d.cell];
  EvaluationRow row;
  row.technology = spec.technology.name();
  row.polarity = polarity_name(spec.polarity);
  row.capacity_bytes = cfg.capacities_bytes[d.capacity];
  row.bits_per_cell = cfg.bits_per_cell[d.bits];
  row.opt_target = target_name(cfg.optimization_targets[d.target]);
  if (cfg.use_case.intermittent) row.tasks_per_day = cfg.use_case.tasks_per_day[d.use_case];
  if (cfg.write_buffer) row.buffer_c = cfg.write_buffer->coalesce_fractions[d.buffer];

  const WorkloadSpec* workload = p.traffic.workloads.empty() ? nullptr : &p.traffic.workloads[d.traffic];
  TrafficPattern traffic;
  if (workload) {
    WorkloadSpec w = *workload;
    if (!w.tasks_per_second && cfg.use_case.intermittent) {
      w.tasks_per_second = *row.tasks_per_day / kSecondsPerDay;
    }
    if (!w.tasks_per_second) {
      throw PreconditionError("workload '" + w.name + "' has no tasks_per_second");
    }
    traffic = workload_to_rates(w);
  } else {
    traffic = p.traffic.patterns[d.traffic];
  }
  row.read_bytes_per_s = traffic.read_bytes_per_s;
  row.write_bytes_per_s = traffic.write_bytes_per_s;

  const auto& cell_outcome = p.cells[d.cell];
  if (!cell_outcome.value) throw PreconditionError(cell_outcome.error);
  const CellDefinition& cell = *cell_outcome.value;

  const OptimizedArray arr = optimize(cell, row.capacity_bytes, cfg.word_width_bits,
                                      cfg.optimization_targets[d.target],
                                      static_cast<int>(row.bits_per_cell), cfg.calibration);
  const ArrayCharacterization& a = arr.characterization;
  fill_array(row, a);

  if (!cfg.write_buffer) {
    const LongPole pole = long_pole(a, traffic);
    row.utilization = pole.utilization;
    row.feasible = pole.feasible;
    row.total_power_mw = memory_power(a, traffic);
    row.lifetime_s = lifetime(a, cell, traffic);
    if (workload) {
      const TaskLatency tl = task_latency(a, *workload);
      row.task_latency_s = tl.seconds;
      row.meets_latency_target = tl.meets_target;
      row.energy_per_task_j = energy_per_task(a, *workload);
      if (cfg.use_case.intermittent) {
        row.energy_per_day_j =
            intermittent_energy_per_day(a, cell, *workload, *row.tasks_per_day, cfg.use_case.standby);
      }
    }
  } else {
    if (!p.buffer->value) throw PreconditionError(p.buffer->error);
    WriteBufferSpec buf{*p.buffer->value, *row.buffer_c, cfg.write_buffer->mask_latency};
    const BufferedEvaluation be = apply_write_buffer(a, cell, traffic, buf);
    row.utilization = std::max(be.envm_utilization, be.buffer_utilization);
    row.feasible = be.feasible;
    row.total_power_mw = be.total_power_mw;
    row.lifetime_s = be.lifetime_s;
    if (workload) {
      const TaskLatency tl = buffered_task_latency(a, *workload, buf);
      row.task_latency_s = tl.seconds;
      row.meets_latency_target = tl.meets_target;
      const double e_task = buffered_energy_per_task(a, *workload, buf);
      row.energy_per_task_j = e_task;
      if (cfg.use_case.intermittent) {
        const double n = *row.tasks_per_day;
        const double t_active = std::max(tl.seconds, workload->task_duration_s.value_or(0.0));
        if (n * t_active > kSecondsPerDay) {
          throw PreconditionError("day overcommitted: " + format_double(n) + " tasks do not fit in 86400 s");
        }
        const DailyEnergyLine line =
            daily_energy_line(e_task, t_active, a.leakage_mw + buf.buffer.leakage_mw,
                              footprint_bits(a, *workload), cfg.use_case.standby);
        row.energy_per_day_j = line.at(n);
      }
    }
  }
  row.accuracy = accuracy;
  return row;
}

}  // namespace detail

/// Evaluates every design point. Rows come back in canonical order whatever
/// the thread count.
inline ResultTable run(const PreparedSweep& p, unsigned threads = 1) {
  const SweepConfig& cfg = p.config;

  // Accuracy depends only on (cell, B); compute it once per pair.
  std::map<std::pair<std::size_t, std::size_t>, detail::Outcome<double>> accuracy;
  if (cfg.faults) {
    for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
      for (std::size_t b = 0; b < cfg.bits_per_cell.size(); ++b) {
        detail::Outcome<double> o;
        if (p.cells[c].value) {
          try {
            o.value = detail::accuracy_for(p, *p.cells[c].value, cfg.bits_per_cell[b]);
          } catch (const Error& e) {
            o.error = std::string("fault injection: ") + e.what();
          }
        }
        accuracy[{c, b}] = std::move(o);
      }
    }
  }

  std::vector<EvaluationRow> rows(p.points.size());
  std::vector<std::string> errors(p.points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < p.points.size(); i = next++) {
      const DesignPoint& d = p.points[i];
      std::optional<double> acc;
      try {
        if (cfg.faults) {
          const auto& o = accuracy.at({d.cell, d.bits});
          if (!o.error.empty()) throw PreconditionError(o.error);
          acc = o.value;
        }
        rows[i] = detail::evaluate_point(p, d, acc);
      } catch (const Error& e) {
        EvaluationRow& r = rows[i];
        const CellSpec& spec = cfg.cells[d.cell];
        r.technology = spec.technology.name();
        r.polarity = polarity_name(spec.polarity);
        r.capacity_bytes = cfg.capacities_bytes[d.capacity];
        r.bits_per_cell = cfg.bits_per_cell[d.bits];
        r.opt_target = target_name(cfg.optimization_targets[d.target]);
        if (cfg.use_case.intermittent) r.tasks_per_day = cfg.use_case.tasks_per_day[d.use_case];
        if (cfg.write_buffer) r.buffer_c = cfg.write_buffer->coalesce_fractions[d.buffer];
        errors[i] = describe(p, d) + ": " + e.what();
        r.error = errors[i];
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(p.points.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (cfg.fail_fast) {
    for (const auto& e : errors) {
      if (!e.empty()) throw RunError(e);
    }
  }

  ResultTable table;
  table.config_fingerprint = p.fingerprint;
  table.rows = std::move(rows);
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].row_id = static_cast<std::int64_t>(i);
  return table;
}

inline ResultTable run(const SweepConfig& cfg, const RunOptions& opt = {}) {
  return run(prepare(cfg, opt.seed), opt.threads);
}

}  // namespace envmx
