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

#include <gtest/gtest.h>

#include "envmx/envmx.hpp"
#include "oracles.hpp"

using namespace envmx;

namespace {

const char* kMinimal = R"({
  "cells": [{"inline": {"technology": "STT", "cell_area_f2": 40, "tech_node_nm": 28,
    "bits_per_cell_max": 1, "read_latency_ns": 5, "write_latency_ns": 10,
    "read_energy_pj": 0.5, "write_energy_pj": 1.5, "endurance_cycles": 1e12,
    "retention_s": 1e8, "standby_power_per_cell_nw": 0}}],
  "capacities_bytes": [1048576],
  "optimization_targets": ["ReadEDP"],
  "traffic": {"generic": {"read_bytes_per_s": [1e9, 1e9], "write_bytes_per_s": [1e6, 1e6],
                          "points_per_axis": 1}}
})";

SweepConfig bundled(const char* name) { return parse_config(oracle::source_path(std::string("configs/") + name)); }

std::string config_error_pointer(const std::string& text) {
  try {
    parse_config_text(text, oracle::source_dir());
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<none>";
}

std::string with(const std::string& key_value) {
  std::string s = kMinimal;
  const auto pos = s.rfind('}');
  return s.substr(0, pos) + ", " + key_value + "\n}";
}

}  // namespace

TEST(Config, MinimalConfigGivesOneRow) {
  const auto cfg = parse_config_text(kMinimal, oracle::source_dir());
  const auto table = run(cfg);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_FALSE(table.rows[0].error) << *table.rows[0].error;
  EXPECT_EQ(table.rows[0].read_bytes_per_s, 1e9);
  EXPECT_EQ(to_csv(run(cfg).rows), to_csv(table.rows));
}

TEST(Config, UnknownKeyNamed) {
  std::string s = kMinimal;
  s.replace(s.find("capacities_bytes"), 16, "capactiy");
  try {
    parse_config_text(s, oracle::source_dir());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("capactiy"), std::string::npos);
    EXPECT_EQ(e.pointer(), "/capactiy");
  }
}

TEST(Config, SchemaErrorsCarryPointers) {
  EXPECT_EQ(config_error_pointer(with(R"("output": {"directroy": "x"})")), "/output/directroy");
  EXPECT_EQ(config_error_pointer(with(R"("bits_per_cell": [])")), "/bits_per_cell");
  EXPECT_EQ(config_error_pointer(with(R"("bits_per_cell": [9])")), "/bits_per_cell/0");
  EXPECT_EQ(config_error_pointer(with(R"("seed": -1)")), "/seed");
  EXPECT_EQ(config_error_pointer(with(R"("calibration": {"d0": "x"})")), "/calibration/d0");
  EXPECT_EQ(config_error_pointer(with(R"("use_case": {"mode": "sometimes"})")), "/use_case/mode");
  std::string bad_target = kMinimal;
  bad_target.replace(bad_target.find("ReadEDP"), 7, "Speed");
  EXPECT_EQ(config_error_pointer(bad_target), "/optimization_targets/0");
  auto doc = nlohmann::json::parse(kMinimal);
  doc["cells"] = nlohmann::json::array();
  EXPECT_EQ(config_error_pointer(doc.dump()), "/cells");
  EXPECT_THROW(parse_config_text("{", ""), ConfigError);
  EXPECT_THROW(parse_config("/nonexistent/config.json"), Error);
}

TEST(Config, CanonicalFormIsStableAndMaterializesDefaults) {
  const auto cfg = parse_config_text(kMinimal, oracle::source_dir());
  const auto text = canonical_config_text(cfg);
  EXPECT_NE(text.find("\"word_width_bits\": 64"), std::string::npos);
  EXPECT_NE(text.find("\"lambda_peri_mw_per_mm2\""), std::string::npos);
  // Reparsing the canonical text gives the same canonical text.
  const auto again = parse_config_text(text, oracle::source_dir());
  EXPECT_EQ(canonical_config_text(again), text);
  EXPECT_EQ(config_fingerprint(again), config_fingerprint(cfg));
  auto seeded = cfg;
  seeded.seed = 99;
  EXPECT_NE(config_fingerprint(seeded), config_fingerprint(cfg));
}

TEST(Config, BundledConfigsParseAndRoundTrip) {
  for (const char* name : {"dnn_study.json", "intermittent.json", "graph_sweep.json", "write_buffer.json",
                           "mlc_study.json", "bg_fefet.json", "llc.json"}) {
    const auto cfg = bundled(name);
    const auto again = parse_config_text(canonical_config_text(cfg), cfg.base_dir);
    EXPECT_EQ(canonical_config_text(again), canonical_config_text(cfg)) << name;
  }
}

TEST(Expand, DnnStudyAxes) {
  const auto cfg = bundled("dnn_study.json");
  EXPECT_EQ(cfg.cells.size(), 10u);
  EXPECT_EQ(cfg.capacities_bytes.size(), 3u);
  EXPECT_EQ(cfg.optimization_targets.size(), 4u);
  EXPECT_EQ(cfg.bits_per_cell.size(), 2u);
  EXPECT_EQ(resolve_traffic(cfg).size(), 3u);
  EXPECT_EQ(expand(cfg).size(), 720u);
}

TEST(Expand, ProductOfAxes) {
  auto cfg = parse_config_text(kMinimal, oracle::source_dir());
  cfg.cells.push_back(cfg.cells[0]);
  cfg.cells.push_back(cfg.cells[0]);
  cfg.capacities_bytes = {1 << 20, 2 << 20};
  cfg.optimization_targets = {OptimizationTarget::ReadEDP, OptimizationTarget::Area};
  const auto pts = expand(cfg);
  ASSERT_EQ(pts.size(), 12u);
  // Canonical order: later axes vary fastest.
  EXPECT_EQ(pts[1].target, 1u);
  EXPECT_EQ(pts[2].capacity, 1u);
  EXPECT_EQ(pts[4].cell, 1u);
}

TEST(Expand, GraphSweepCount) {
  const auto cfg = bundled("graph_sweep.json");
  const auto table = run(cfg);
  EXPECT_EQ(table.rows.size(), 125u);
  for (const auto& r : table.rows) EXPECT_FALSE(r.error);
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  for (const char* name : {"dnn_study.json", "write_buffer.json", "intermittent.json"}) {
    const auto cfg = bundled(name);
    const auto serial = run(cfg, {1, std::nullopt});
    const auto parallel = run(cfg, {8, std::nullopt});
    EXPECT_EQ(bundle_json(serial), bundle_json(parallel)) << name;
  }
}

TEST(Run, DnnStudyErrorRowsAreSramMlc) {
  const auto table = run(bundled("dnn_study.json"), {4, std::nullopt});
  ASSERT_EQ(table.rows.size(), 720u);
  std::size_t errors = 0;
  for (const auto& r : table.rows) {
    if (r.error) {
      ++errors;
      EXPECT_EQ(r.technology, "SRAM");
      EXPECT_EQ(r.bits_per_cell, 2);
      EXPECT_NE(r.error->find("cell=SRAM/"), std::string::npos);
    } else {
      ASSERT_TRUE(r.accuracy);
    }
  }
  EXPECT_EQ(errors, 72u);
}

TEST(Run, FailFastRaises) {
  auto cfg = bundled("dnn_study.json");
  cfg.fail_fast = true;
  EXPECT_THROW(run(cfg), RunError);
}

TEST(Run, SeedChangesOnlyFaultedRows) {
  const auto cfg = bundled("mlc_study.json");
  const auto a = run(cfg, {2, 1});
  const auto b = run(cfg, {2, 1});
  EXPECT_EQ(bundle_json(a), bundle_json(b));
}

TEST(Run, BufferAxisDoublesRows) {
  auto cfg = bundled("write_buffer.json");
  cfg.write_buffer->coalesce_fractions = {0.0};
  const auto one = run(cfg);
  cfg.write_buffer->coalesce_fractions = {0.0, 0.5};
  const auto two = run(cfg);
  ASSERT_EQ(two.rows.size(), 2 * one.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    const auto& base = two.rows[2 * i];
    const auto& half = two.rows[2 * i + 1];
    EXPECT_EQ(*half.write_bytes_per_s, *base.write_bytes_per_s);  // offered traffic unchanged
    if (std::isfinite(*base.lifetime_s)) {
      EXPECT_DOUBLE_EQ(*half.lifetime_s, 2 * *base.lifetime_s);
    }
  }
}

TEST(Run, GraphSweepPessimisticFefetBound) {
  const auto cfg = bundled("graph_sweep.json");
  const auto prepared = prepare(cfg);
  const auto table = run(prepared);
  // Independent bound: with reads at rate r, writes above (1 - r t_r)/t_w overflow the port.
  std::size_t checked = 0, infeasible = 0;
  for (const auto& r : table.rows) {
    if (r.technology != "FeFET" || r.polarity != "pessimistic") continue;
    const double r_acc = *r.read_bytes_per_s / 8;
    const double w_acc = *r.write_bytes_per_s / 8;
    const double bound = (1 - r_acc * *r.read_latency_ns * 1e-9) / (*r.write_latency_ns * 1e-9);
    if (w_acc > bound) {
      EXPECT_FALSE(*r.feasible);
      ++infeasible;
    } else {
      EXPECT_TRUE(*r.feasible);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 25u);
  EXPECT_GT(infeasible, 0u);
}

TEST(Run, WriteBufferFlipsPessimisticFefet) {
  const auto table = run(bundled("write_buffer.json"));
  std::vector<bool> feasible;
  for (const auto& r : table.rows) {
    if (r.technology == "FeFET" && r.polarity == "pessimistic" && r.read_bytes_per_s &&
        *r.read_bytes_per_s == 2e7 * 8) {
      feasible.push_back(*r.feasible);
    }
  }
  ASSERT_EQ(feasible.size(), 4u);
  EXPECT_FALSE(feasible[0]);
  EXPECT_TRUE(feasible[2]);
}

TEST(Run, IntermittentRowsCarryDailyEnergy) {
  const auto table = run(bundled("intermittent.json"));
  ASSERT_EQ(table.rows.size(), 4u * 8u);
  for (const auto& r : table.rows) {
    ASSERT_FALSE(r.error) << *r.error;
    ASSERT_TRUE(r.energy_per_day_j);
    ASSERT_TRUE(r.tasks_per_day);
  }
}

TEST(Run, MissingWorkloadNameIsConfigError) {
  auto doc = nlohmann::json::parse(kMinimal);
  doc["traffic"] = {{"workloads", "workloads/dnn.csv"}, {"workload_names", {"nope"}}};
  try {
    prepare(parse_config_json(doc, oracle::source_dir()));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/traffic/workload_names/0");
  }
}
