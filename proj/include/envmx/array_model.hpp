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
 * @file array_model.hpp
 * @brief Analytical array surrogate: maps a cell definition, a capacity and
 *        an array organization to per-access latency/energy, leakage and area.
 *
 * Model (F = tech_node_nm * 1e-3 um, scale = tech_node_nm / 22):
 *
 *   cells            = ceil(capacity_bits / B)
 *   data_area        = cells * cell_area_f2 * F^2                    [um^2]
 *   periphery_area   = S * (k_dec*R + k_sense*C + k_fixed) * 100 * F^2
 *   periphery_delay  = scale * (d0 + d1*log2 S + d2*R/1024 + d3*C/1024)  [ns]
 *   access_energy    = (W/B) * cell_energy
 *                      + scale^2 * (e0 + e1*C/1024 + e2*log2 S)          [pJ]
 *   leakage          = cells * standby_nw * 1e-6 + lambda * periphery_mm2 [mW]
 *
 * MLC (B >= 2) multiplies the cell latencies and energies by
 * mlc_factor^(B-1). The constants are tuned for qualitative trends only; they
 * do not reproduce any specific circuit-level tool.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "envmx/cell_library.hpp"
#include "envmx/common.hpp"

namespace envmx {

inline constexpr std::array<int, 5> kSubarrayDims{128, 256, 512, 1024, 2048};

/// Surrogate constants. All overridable from the sweep config `calibration` block.
struct Calibration {
  double k_dec = 16;
  double k_sense = 32;
  double k_fixed = 4096;
  double d0 = 0.2;
  double d1 = 0.05;
  double d2 = 0.5;
  double d3 = 0.3;
  double e0 = 0.5;
  double e1 = 0.4;
  double e2 = 0.2;
  double lambda_peri_mw_per_mm2 = 5.0;
  double mlc_latency_factor = 1.5;
  double mlc_energy_factor = 1.5;
};

struct ArrayOrganization {
  int rows = 0;            // R
  int cols = 0;            // C
  std::int64_t subarrays = 0;  // S
  int word_width_bits = 64;    // W
  int bits_per_cell = 1;       // B

  friend bool operator==(const ArrayOrganization&, const ArrayOrganization&) = default;
};

struct ArrayCharacterization {
  double read_latency_ns = 0;
  double write_latency_ns = 0;
  double read_energy_pj = 0;   // per word access
  double write_energy_pj = 0;  // per word access
  double leakage_mw = 0;
  double area_mm2 = 0;
  double data_area_mm2 = 0;
  double area_efficiency = 0;
  std::int64_t capacity_bytes = 0;
  ArrayOrganization organization;
  CellDefinition cell;
};

enum class OptimizationTarget {
  ReadLatency,
  ReadEnergy,
  ReadEDP,
  WriteLatency,
  WriteEnergy,
  WriteEDP,
  Area,
  Leakage,
};

inline constexpr std::array<OptimizationTarget, 8> kOptimizationTargets{
    OptimizationTarget::ReadLatency, OptimizationTarget::ReadEnergy,
    OptimizationTarget::ReadEDP,     OptimizationTarget::WriteLatency,
    OptimizationTarget::WriteEnergy, OptimizationTarget::WriteEDP,
    OptimizationTarget::Area,        OptimizationTarget::Leakage};

inline std::string target_name(OptimizationTarget t) {
  switch (t) {
    case OptimizationTarget::ReadLatency: return "ReadLatency";
    case OptimizationTarget::ReadEnergy: return "ReadEnergy";
    case OptimizationTarget::ReadEDP: return "ReadEDP";
    case OptimizationTarget::WriteLatency: return "WriteLatency";
    case OptimizationTarget::WriteEnergy: return "WriteEnergy";
    case OptimizationTarget::WriteEDP: return "WriteEDP";
    case OptimizationTarget::Area: return "Area";
    case OptimizationTarget::Leakage: return "Leakage";
  }
  return "?";
}

inline std::optional<OptimizationTarget> parse_target(std::string_view s) {
  for (OptimizationTarget t : kOptimizationTargets) {
    if (to_lower(s) == to_lower(target_name(t))) return t;
  }
  return std::nullopt;
}

/// Value minimized by optimize(); EDP is energy [pJ] * latency [ns].
inline double target_metric(const ArrayCharacterization& c, OptimizationTarget t) {
  switch (t) {
    case OptimizationTarget::ReadLatency: return c.read_latency_ns;
    case OptimizationTarget::ReadEnergy: return c.read_energy_pj;
    case OptimizationTarget::ReadEDP: return c.read_energy_pj * c.read_latency_ns;
    case OptimizationTarget::WriteLatency: return c.write_latency_ns;
    case OptimizationTarget::WriteEnergy: return c.write_energy_pj;
    case OptimizationTarget::WriteEDP: return c.write_energy_pj * c.write_latency_ns;
    case OptimizationTarget::Area: return c.area_mm2;
    case OptimizationTarget::Leakage: return c.leakage_mw;
  }
  return 0;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

inline void check_geometry(std::int64_t capacity_bytes, int word_width_bits, int bits_per_cell) {
  if (capacity_bytes <= 0 || word_width_bits <= 0 || bits_per_cell <= 0) {
    throw PreconditionError("capacity, word width and bits per cell must be positive");
  }
  if (capacity_bytes < 1024) throw PreconditionError("capacity must be at least 1 KiB");
  if (word_width_bits < 8) throw PreconditionError("word width must be at least 8 bits");
  if (word_width_bits % bits_per_cell != 0) {
    throw PreconditionError("word width " + std::to_string(word_width_bits) +
                            " is not divisible by bits per cell " + std::to_string(bits_per_cell));
  }
}

/// Every (R, C) grid point, R ascending then C ascending, with S sized to fit.
inline std::vector<ArrayOrganization> enumerate_organizations(std::int64_t capacity_bytes,
                                                              int word_width_bits,
                                                              int bits_per_cell) {
  check_geometry(capacity_bytes, word_width_bits, bits_per_cell);
  const std::int64_t bits = capacity_bytes * 8;
  std::vector<ArrayOrganization> out;
  out.reserve(kSubarrayDims.size() * kSubarrayDims.size());
  for (int r : kSubarrayDims) {
    for (int c : kSubarrayDims) {
      const std::int64_t per_subarray = static_cast<std::int64_t>(bits_per_cell) * r * c;
      out.push_back({r, c, ceil_div(bits, per_subarray), word_width_bits, bits_per_cell});
    }
  }
  return out;
}

inline bool is_grid_dim(int v) {
  return std::find(kSubarrayDims.begin(), kSubarrayDims.end(), v) != kSubarrayDims.end();
}

inline void check_organization(const ArrayOrganization& org, std::int64_t capacity_bytes) {
  check_geometry(capacity_bytes, org.word_width_bits, org.bits_per_cell);
  if (!is_grid_dim(org.rows) || !is_grid_dim(org.cols)) {
    throw PreconditionError("subarray rows/cols must be one of 128..2048 (powers of two)");
  }
  if (org.subarrays < 1) throw PreconditionError("at least one subarray is required");
  const double cells = static_cast<double>(org.subarrays) * org.rows * org.cols * org.bits_per_cell;
  if (cells < static_cast<double>(capacity_bytes) * 8) {
    throw PreconditionError("organization too small for the requested capacity");
  }
}

inline ArrayCharacterization characterize(const CellDefinition& cell, const ArrayOrganization& org,
                                          std::int64_t capacity_bytes,
                                          const Calibration& cal = {}) {
  check_organization(org, capacity_bytes);
  const double node = cell.tech_node_nm;
  const double scale = node / 22.0;
  const double feature_um = node * 1e-3;
  const double f2_um2 = feature_um * feature_um;
  const int b = org.bits_per_cell;
  const double cells = static_cast<double>(ceil_div(capacity_bytes * 8, b));
  const double s = static_cast<double>(org.subarrays);
  const double r = org.rows;
  const double c = org.cols;

  const double data_mm2 = cells * cell.cell_area_f2 * f2_um2 * 1e-6;
  const double overhead_cells = cal.k_dec * r + cal.k_sense * c + cal.k_fixed;
  const double periphery_mm2 = s * overhead_cells * 100.0 * f2_um2 * 1e-6;

  const double lat_penalty = std::pow(cal.mlc_latency_factor, b - 1);
  const double energy_penalty = std::pow(cal.mlc_energy_factor, b - 1);

  const double delay_ns =
      scale * (cal.d0 + cal.d1 * std::log2(s) + cal.d2 * r / 1024.0 + cal.d3 * c / 1024.0);
  const double periphery_pj =
      scale * scale * (cal.e0 + cal.e1 * c / 1024.0 + cal.e2 * std::log2(s));
  const double cells_per_word = static_cast<double>(org.word_width_bits) / b;

  ArrayCharacterization out;
  out.read_latency_ns = cell.read_latency_ns * lat_penalty + delay_ns;
  out.write_latency_ns = cell.write_latency_ns * lat_penalty + delay_ns;
  out.read_energy_pj = cells_per_word * cell.read_energy_pj * energy_penalty + periphery_pj;
  out.write_energy_pj = cells_per_word * cell.write_energy_pj * energy_penalty + periphery_pj;
  out.leakage_mw = cells * cell.standby_power_per_cell_nw * 1e-6 +
                   cal.lambda_peri_mw_per_mm2 * periphery_mm2;
  out.data_area_mm2 = data_mm2;
  out.area_mm2 = data_mm2 + periphery_mm2;
  out.area_efficiency = data_mm2 / out.area_mm2;
  out.capacity_bytes = capacity_bytes;
  out.organization = org;
  out.cell = cell;
  return out;
}

struct OptimizedArray {
  ArrayOrganization organization;
  ArrayCharacterization characterization;
};

/**
 * Exhaustive search over enumerate_organizations(). Ties on the target metric
 * go to the smaller area, then fewer subarrays, then (R, C) lexicographic.
 */
inline OptimizedArray optimize(const CellDefinition& cell, std::int64_t capacity_bytes,
                               int word_width_bits, OptimizationTarget target,
                               int bits_per_cell = 1, const Calibration& cal = {}) {
  if (bits_per_cell > cell.bits_per_cell_max) {
    throw PreconditionError(std::to_string(bits_per_cell) + " bits per cell exceeds the " +
                            std::to_string(cell.bits_per_cell_max) + " supported by " +
                            cell.label());
  }
  std::optional<OptimizedArray> best;
  auto key = [&](const ArrayCharacterization& c) {
    return std::make_tuple(target_metric(c, target), c.area_mm2, c.organization.subarrays,
                           c.organization.rows, c.organization.cols);
  };
  for (const auto& org : enumerate_organizations(capacity_bytes, word_width_bits, bits_per_cell)) {
    ArrayCharacterization c = characterize(cell, org, capacity_bytes, cal);
    if (!best || key(c) < key(best->characterization)) best = OptimizedArray{org, std::move(c)};
  }
  return *best;
}

}  // namespace envmx
