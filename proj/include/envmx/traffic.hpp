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
 * @file traffic.hpp
 * @brief Workload demand: per-task access counts and byte-rate traffic.
 */

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envmx/common.hpp"
#include "envmx/csv.hpp"

namespace envmx {

inline constexpr int kDefaultAccessWidthBits = 64;

struct WorkloadSpec {
  std::string name;
  double reads_per_task = 0;
  double writes_per_task = 0;
  int access_width_bits = kDefaultAccessWidthBits;
  std::optional<double> tasks_per_second;
  std::optional<double> target_task_latency_s;
  std::optional<double> accuracy_floor;
  std::optional<std::int64_t> footprint_bytes;
  /// Wall-clock duration of one task when known; not part of the CSV schema.
  std::optional<double> task_duration_s;
};

struct TrafficPattern {
  double read_bytes_per_s = 0;
  double write_bytes_per_s = 0;
  int access_width_bits = kDefaultAccessWidthBits;
};

/// Log-spaced grid, inclusive endpoints, read rate outer and write rate inner.
inline std::vector<TrafficPattern> generate_generic_sweep(std::pair<double, double> read_range,
                                                          std::pair<double, double> write_range,
                                                          int points_per_axis,
                                                          int access_width_bits = kDefaultAccessWidthBits) {
  auto check = [](std::pair<double, double> r, const char* what) {
    if (!(r.first > 0) || !std::isfinite(r.second) || r.first > r.second) {
      throw PreconditionError(std::string(what) + " range must satisfy 0 < lo <= hi");
    }
  };
  check(read_range, "read");
  check(write_range, "write");
  if (points_per_axis < 1) throw PreconditionError("points_per_axis must be >= 1");
  if (access_width_bits < 8) throw PreconditionError("access width must be at least 8 bits");

  auto axis = [points_per_axis](std::pair<double, double> r) {
    std::vector<double> v(static_cast<std::size_t>(points_per_axis));
    if (points_per_axis == 1) {
      v[0] = r.first;
      return v;
    }
    const double lo = std::log10(r.first);
    const double hi = std::log10(r.second);
    for (int i = 0; i < points_per_axis; ++i) {
      v[static_cast<std::size_t>(i)] = std::pow(10.0, lo + (hi - lo) * i / (points_per_axis - 1));
    }
    v.front() = r.first;
    v.back() = r.second;
    return v;
  };
  const auto reads = axis(read_range);
  const auto writes = axis(write_range);
  std::vector<TrafficPattern> out;
  out.reserve(reads.size() * writes.size());
  for (double r : reads) {
    for (double w : writes) out.push_back({r, w, access_width_bits});
  }
  return out;
}

inline TrafficPattern workload_to_rates(const WorkloadSpec& w) {
  if (!w.tasks_per_second) {
    throw PreconditionError("workload '" + w.name + "' has no tasks_per_second");
  }
  const double bytes_per_access = w.access_width_bits / 8.0;
  return {w.reads_per_task * *w.tasks_per_second * bytes_per_access,
          w.writes_per_task * *w.tasks_per_second * bytes_per_access, w.access_width_bits};
}

inline const std::vector<std::string>& workload_header() {
  static const std::vector<std::string> kHeader{
      "name", "reads_per_task", "writes_per_task", "access_width_bits", "tasks_per_second",
      "target_task_latency_s", "accuracy_floor", "footprint_bytes"};
  return kHeader;
}

inline std::vector<WorkloadSpec> parse_workloads(std::string_view text) {
  csv::Document doc = csv::parse(text);
  std::vector<WorkloadSpec> out;
  if (doc.header.empty()) return out;
  csv::require_header(doc, workload_header());
  for (std::size_t i = 0; i < doc.records.size(); ++i) {
    const std::size_t row = i + 1;
    const auto& f = doc.records[i].fields;
    if (f.size() != workload_header().size()) {
      throw SchemaError(row, "", "expected " + std::to_string(workload_header().size()) +
                                     " fields, found " + std::to_string(f.size()));
    }
    auto blank = [](const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; };
    auto number = [&](std::size_t k) -> std::optional<double> {
      if (blank(f[k])) return std::nullopt;
      auto v = parse_double(f[k]);
      if (!v || !std::isfinite(*v)) {
        throw SchemaError(row, workload_header()[k], "cannot parse '" + f[k] + "'");
      }
      return v;
    };
    WorkloadSpec w;
    w.name = f[0];
    if (w.name.empty()) throw SchemaError(row, "name", "must not be empty");
    auto reads = number(1);
    auto writes = number(2);
    if (!reads || *reads < 0 || std::floor(*reads) != *reads) throw SchemaError(row, "reads_per_task", "must be a count >= 0");
    if (!writes || *writes < 0 || std::floor(*writes) != *writes) throw SchemaError(row, "writes_per_task", "must be a count >= 0");
    if (*reads + *writes < 1) throw SchemaError(row, "reads_per_task", "reads + writes must be >= 1");
    w.reads_per_task = *reads;
    w.writes_per_task = *writes;
    if (auto width = number(3)) {
      if (*width < 8 || std::floor(*width) != *width) {
        throw SchemaError(row, "access_width_bits", "must be an integer >= 8");
      }
      w.access_width_bits = static_cast<int>(*width);
    }
    if (auto tps = number(4)) {
      if (!(*tps > 0)) throw SchemaError(row, "tasks_per_second", "must be > 0");
      w.tasks_per_second = tps;
    }
    if (auto lat = number(5)) {
      if (!(*lat > 0)) throw SchemaError(row, "target_task_latency_s", "must be > 0");
      w.target_task_latency_s = lat;
    }
    if (auto acc = number(6)) {
      if (*acc < 0 || *acc > 1) throw SchemaError(row, "accuracy_floor", "must be in [0, 1]");
      w.accuracy_floor = acc;
    }
    if (auto fp = number(7)) {
      if (*fp < 0 || std::floor(*fp) != *fp) {
        throw SchemaError(row, "footprint_bytes", "must be a non-negative integer");
      }
      w.footprint_bytes = static_cast<std::int64_t>(*fp);
    }
    out.push_back(std::move(w));
  }
  return out;
}

inline std::vector<WorkloadSpec> load_workloads(const std::string& path) {
  return parse_workloads(read_file(path));
}

}  // namespace envmx
