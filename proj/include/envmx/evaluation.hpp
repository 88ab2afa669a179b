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
 * @file evaluation.hpp
 * @brief Application-level metrics for one characterized array: power,
 *        bandwidth occupancy (long-pole), task latency/energy, lifetime,
 *        intermittent energy per day and the write-buffer transform.
 *
 * Units: latency ns, energy pJ, power mW at the array interface; task
 * latency in s and task/day energy in J at the application interface.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "envmx/array_model.hpp"
#include "envmx/cell_library.hpp"
#include "envmx/common.hpp"
#include "envmx/traffic.hpp"

namespace envmx {

/// Word accesses per second for a byte rate on an array with `word_width_bits`.
inline double accesses_per_second(double bytes_per_s, int word_width_bits) {
  return bytes_per_s * 8.0 / word_width_bits;
}

inline double read_accesses(const ArrayCharacterization& c, const TrafficPattern& t) {
  return accesses_per_second(t.read_bytes_per_s, c.organization.word_width_bits);
}

inline double write_accesses(const ArrayCharacterization& c, const TrafficPattern& t) {
  return accesses_per_second(t.write_bytes_per_s, c.organization.word_width_bits);
}

/// Leakage plus dynamic access power, in mW.
inline double memory_power(const ArrayCharacterization& c, const TrafficPattern& t) {
  // pJ/s -> mW is a factor of 1e-9.
  return c.leakage_mw +
         (read_accesses(c, t) * c.read_energy_pj + write_accesses(c, t) * c.write_energy_pj) * 1e-9;
}

struct LongPole {
  double utilization = 0;  // seconds of port occupancy per second
  bool feasible = true;
  double total_latency_s_per_s = 0;
};

/// Single-port serialization: reads and writes share one port.
inline LongPole long_pole(const ArrayCharacterization& c, const TrafficPattern& t) {
  const double u = read_accesses(c, t) * c.read_latency_ns * 1e-9 +
                   write_accesses(c, t) * c.write_latency_ns * 1e-9;
  return {u, u <= 1.0, u};
}

struct TaskLatency {
  double seconds = 0;
  std::optional<bool> meets_target;
};

namespace detail {

/// Access counts of the workload expressed in array words.
inline std::pair<double, double> word_accesses(const ArrayCharacterization& c,
                                               const WorkloadSpec& w) {
  const double ratio = static_cast<double>(w.access_width_bits) / c.organization.word_width_bits;
  return {w.reads_per_task * ratio, w.writes_per_task * ratio};
}

inline std::optional<bool> meets(const WorkloadSpec& w, double seconds) {
  if (!w.target_task_latency_s) return std::nullopt;
  return seconds <= *w.target_task_latency_s;
}

}  // namespace detail

inline TaskLatency task_latency(const ArrayCharacterization& c, const WorkloadSpec& w) {
  const auto [reads, writes] = detail::word_accesses(c, w);
  const double s = (reads * c.read_latency_ns + writes * c.write_latency_ns) * 1e-9;
  return {s, detail::meets(w, s)};
}

/// Ideal wear leveling over the whole array.
inline double lifetime(const ArrayCharacterization& c, const CellDefinition& cell,
                       const TrafficPattern& t) {
  if (std::isinf(cell.endurance_cycles) || t.write_bytes_per_s <= 0) return kInf;
  const double capacity_bits = static_cast<double>(c.capacity_bytes) * 8.0;
  return cell.endurance_cycles * capacity_bits / (t.write_bytes_per_s * 8.0);
}

/// Time the memory is considered active for one task.
inline double active_time(const ArrayCharacterization& c, const WorkloadSpec& w) {
  const double busy = task_latency(c, w).seconds;
  return w.task_duration_s ? std::max(busy, *w.task_duration_s) : busy;
}

/// Access energy plus leakage over the active time, in J.
inline double energy_per_task(const ArrayCharacterization& c, const WorkloadSpec& w) {
  const auto [reads, writes] = detail::word_accesses(c, w);
  return (reads * c.read_energy_pj + writes * c.write_energy_pj) * 1e-12 +
         c.leakage_mw * 1e-3 * active_time(c, w);
}

struct StandbyPolicy {
  enum class Kind { PowerOff, Retain, ReloadFromOffChip };

  Kind kind = Kind::PowerOff;
  double reload_energy_per_bit_pj = 10.0;

  static StandbyPolicy power_off() { return {Kind::PowerOff, 10.0}; }
  static StandbyPolicy retain() { return {Kind::Retain, 10.0}; }
  static StandbyPolicy reload(double pj_per_bit = 10.0) {
    return {Kind::ReloadFromOffChip, pj_per_bit};
  }
};

inline std::string standby_name(const StandbyPolicy& p) {
  switch (p.kind) {
    case StandbyPolicy::Kind::PowerOff: return "power_off";
    case StandbyPolicy::Kind::Retain: return "retain";
    case StandbyPolicy::Kind::ReloadFromOffChip: return "reload";
  }
  return "?";
}

/// E_day(n) = intercept + slope * n, valid for 0 <= n <= capacity.
struct DailyEnergyLine {
  double intercept_j = 0;
  double slope_j = 0;
  double capacity_tasks = kInf;

  double at(double n) const { return intercept_j + slope_j * n; }
};

/// Daily energy line from per-task energy/active time and standby leakage.
inline DailyEnergyLine daily_energy_line(double energy_per_task_j, double active_time_s,
                                         double leakage_mw, double footprint_bits,
                                         const StandbyPolicy& policy) {
  if (policy.kind == StandbyPolicy::Kind::ReloadFromOffChip &&
      !(policy.reload_energy_per_bit_pj > 0)) {
    throw PreconditionError("reload energy per bit must be > 0");
  }
  DailyEnergyLine line;
  line.capacity_tasks = active_time_s > 0 ? kSecondsPerDay / active_time_s : kInf;
  switch (policy.kind) {
    case StandbyPolicy::Kind::PowerOff:
      line.slope_j = energy_per_task_j;
      break;
    case StandbyPolicy::Kind::Retain: {
      const double leak_w = leakage_mw * 1e-3;
      line.intercept_j = leak_w * kSecondsPerDay;
      line.slope_j = energy_per_task_j - leak_w * active_time_s;
      break;
    }
    case StandbyPolicy::Kind::ReloadFromOffChip:
      line.slope_j = energy_per_task_j + footprint_bits * policy.reload_energy_per_bit_pj * 1e-12;
      break;
  }
  return line;
}

/// Footprint reloaded after power-off; the whole array when not given.
inline double footprint_bits(const ArrayCharacterization& c, const WorkloadSpec& w) {
  return static_cast<double>(w.footprint_bytes.value_or(c.capacity_bytes)) * 8.0;
}

inline DailyEnergyLine daily_energy_line(const ArrayCharacterization& c, const WorkloadSpec& w,
                                         const StandbyPolicy& policy) {
  return daily_energy_line(energy_per_task(c, w), active_time(c, w), c.leakage_mw,
                           footprint_bits(c, w), policy);
}

/// Memory energy over one day at `tasks_per_day` wake-ups, in J.
inline double intermittent_energy_per_day(const ArrayCharacterization& c, const CellDefinition&,
                                          const WorkloadSpec& w, double tasks_per_day,
                                          const StandbyPolicy& policy) {
  if (tasks_per_day < 0) throw PreconditionError("tasks per day must be >= 0");
  const DailyEnergyLine line = daily_energy_line(c, w, policy);
  if (tasks_per_day * active_time(c, w) > kSecondsPerDay) {
    throw PreconditionError("day overcommitted: " + format_double(tasks_per_day) +
                            " tasks do not fit in 86400 s");
  }
  return line.at(tasks_per_day);
}

struct Solution {
  ArrayCharacterization array;
  CellDefinition cell;
};

/// Task rate at which both solutions spend the same energy per day, if it
/// lies in (0, day capacity]. Parallel or identical lines have no crossover.
inline std::optional<double> crossover_tasks_per_day(const Solution& a, const Solution& b,
                                                     const WorkloadSpec& w,
                                                     const StandbyPolicy& policy) {
  const DailyEnergyLine la = daily_energy_line(a.array, w, policy);
  const DailyEnergyLine lb = daily_energy_line(b.array, w, policy);
  if (la.slope_j == lb.slope_j) return std::nullopt;
  const double n = (lb.intercept_j - la.intercept_j) / (la.slope_j - lb.slope_j);
  if (!(n > 0) || n > std::min(la.capacity_tasks, lb.capacity_tasks)) return std::nullopt;
  return n;
}

// ---------------------------------------------------------------------------
// Write buffer
// ---------------------------------------------------------------------------

struct WriteBufferSpec {
  ArrayCharacterization buffer;
  double coalesce_fraction = 0;  // c: share of writes merged in the buffer
  bool mask_latency = false;
};

struct BufferedEvaluation {
  TrafficPattern envm_traffic;  // traffic reaching the eNVM
  double envm_utilization = 0;
  double buffer_utilization = 0;
  bool feasible = true;
  double added_power_mw = 0;
  double total_power_mw = 0;
  double lifetime_s = kInf;
  double visible_write_latency_ns = 0;
};

/**
 * All writes land in the buffer; a fraction (1 - c) is written back to the
 * eNVM. The buffer pays one write per incoming write and one read per
 * write-back. Masking replaces the write latency seen by tasks with the
 * buffer's; eNVM occupancy always uses its own write latency.
 */
inline BufferedEvaluation apply_write_buffer(const ArrayCharacterization& envm,
                                             const CellDefinition& cell, const TrafficPattern& t,
                                             const WriteBufferSpec& buf) {
  const double c = buf.coalesce_fraction;
  if (!(c >= 0 && c <= 1)) throw PreconditionError("coalesce fraction must be in [0, 1]");

  BufferedEvaluation out;
  out.envm_traffic = t;
  out.envm_traffic.write_bytes_per_s = (1.0 - c) * t.write_bytes_per_s;

  const LongPole envm_pole = long_pole(envm, out.envm_traffic);
  out.envm_utilization = envm_pole.utilization;

  const double incoming = accesses_per_second(t.write_bytes_per_s, buf.buffer.organization.word_width_bits);
  const double writebacks =
      accesses_per_second(out.envm_traffic.write_bytes_per_s, buf.buffer.organization.word_width_bits);
  out.buffer_utilization =
      (incoming * buf.buffer.write_latency_ns + writebacks * buf.buffer.read_latency_ns) * 1e-9;
  out.feasible = envm_pole.feasible && out.buffer_utilization <= 1.0;

  out.added_power_mw = buf.buffer.leakage_mw + (incoming * buf.buffer.write_energy_pj +
                                                writebacks * buf.buffer.read_energy_pj) * 1e-9;
  out.total_power_mw = memory_power(envm, out.envm_traffic) + out.added_power_mw;
  out.lifetime_s = lifetime(envm, cell, out.envm_traffic);
  out.visible_write_latency_ns = buf.mask_latency ? buf.buffer.write_latency_ns : envm.write_latency_ns;
  return out;
}

/// Task latency behind a write buffer.
inline TaskLatency buffered_task_latency(const ArrayCharacterization& envm, const WorkloadSpec& w,
                                         const WriteBufferSpec& buf) {
  const auto [reads, writes] = detail::word_accesses(envm, w);
  const double write_part = buf.mask_latency
                                ? writes * buf.buffer.write_latency_ns
                                : (1.0 - buf.coalesce_fraction) * writes * envm.write_latency_ns;
  const double s = (reads * envm.read_latency_ns + write_part) * 1e-9;
  return {s, detail::meets(w, s)};
}

/// Task energy behind a write buffer, both arrays leaking over the active time.
inline double buffered_energy_per_task(const ArrayCharacterization& envm, const WorkloadSpec& w,
                                       const WriteBufferSpec& buf) {
  const auto [reads, writes] = detail::word_accesses(envm, w);
  const double c = buf.coalesce_fraction;
  const double t_active = std::max(buffered_task_latency(envm, w, buf).seconds,
                                   w.task_duration_s.value_or(0.0));
  const double dynamic_pj = reads * envm.read_energy_pj + (1.0 - c) * writes * envm.write_energy_pj +
                            writes * buf.buffer.write_energy_pj +
                            (1.0 - c) * writes * buf.buffer.read_energy_pj;
  return dynamic_pj * 1e-12 + (envm.leakage_mw + buf.buffer.leakage_mw) * 1e-3 * t_active;
}

/// Smallest coalesce fraction that makes the eNVM port feasible, if any.
inline std::optional<double> minimal_coalesce_fraction(const ArrayCharacterization& envm,
                                                       const TrafficPattern& t) {
  const double read_u = read_accesses(envm, t) * envm.read_latency_ns * 1e-9;
  const double write_u = write_accesses(envm, t) * envm.write_latency_ns * 1e-9;
  if (read_u > 1.0) return std::nullopt;
  if (read_u + write_u <= 1.0) return 0.0;
  return 1.0 - (1.0 - read_u) / write_u;
}

}  // namespace envmx
