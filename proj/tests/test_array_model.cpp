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

#include <random>
#include <set>

#include "envmx/array_model.hpp"
#include "oracles.hpp"

using namespace envmx;

namespace {

CellDefinition make_cell(const char* tech, double area, double node, int bits, double t_r, double t_w,
                         double e_r, double e_w, double standby) {
  CellDefinition d;
  d.technology = *Technology::parse(tech);
  d.cell_area_f2 = area;
  d.tech_node_nm = node;
  d.bits_per_cell_max = bits;
  d.read_latency_ns = t_r;
  d.write_latency_ns = t_w;
  d.read_energy_pj = e_r;
  d.write_energy_pj = e_w;
  d.endurance_cycles = 1e12;
  d.retention_s = 1e8;
  d.standby_power_per_cell_nw = standby;
  return d;
}

CellDefinition sram() { return make_cell("SRAM", 146, 16, 1, 1, 1, 1.5, 1.5, 0.53); }

void expect_rel(double got, double want, double rel, const char* what) {
  EXPECT_NEAR(got, want, std::abs(want) * rel) << what;
}

constexpr std::int64_t kMiB = 1 << 20;

}  // namespace

TEST(Organizations, TwentyFiveGridPoints) {
  const auto orgs = enumerate_organizations(2 * kMiB, 64, 1);
  ASSERT_EQ(orgs.size(), 25u);
  std::set<std::pair<int, int>> seen;
  for (const auto& o : orgs) {
    seen.insert({o.rows, o.cols});
    EXPECT_GE(o.subarrays * o.rows * o.cols, 2 * kMiB * 8);
    EXPECT_LT((o.subarrays - 1) * o.rows * o.cols, 2 * kMiB * 8);
  }
  EXPECT_EQ(seen.size(), 25u);
}

TEST(Organizations, SubarrayCountExample) {
  for (const auto& o : enumerate_organizations(2 * kMiB, 64, 1)) {
    if (o.rows == 1024 && o.cols == 1024) {
      EXPECT_EQ(o.subarrays, 16);
    }
  }
}

TEST(Organizations, IndivisibleWordWidthRejected) {
  EXPECT_THROW(enumerate_organizations(2 * kMiB, 63, 2), PreconditionError);
  EXPECT_THROW(optimize(make_cell("STT", 40, 28, 2, 5, 10, 0.5, 1.5, 0), 2 * kMiB, 63,
                        OptimizationTarget::ReadEDP, 2),
               PreconditionError);
  EXPECT_THROW(enumerate_organizations(512, 64, 1), PreconditionError);
}

TEST(Organizations, BitsAboveCellMaximumRejected) {
  EXPECT_THROW(optimize(sram(), 2 * kMiB, 64, OptimizationTarget::ReadEDP, 2), PreconditionError);
}

TEST(Characterize, MatchesSpreadsheetOracle) {
  const CellDefinition c = sram();
  ArrayOrganization org{1024, 1024, 16, 64, 1};
  const auto got = characterize(c, org, 2 * kMiB);
  const auto want = oracle::spreadsheet(146, 16, 1, 1, 1.5, 1.5, 0.53, 2 * kMiB, 1024, 1024, 16, 64, 1);
  expect_rel(got.read_latency_ns, want.read_latency_ns, 1e-12, "read latency");
  expect_rel(got.write_latency_ns, want.write_latency_ns, 1e-12, "write latency");
  expect_rel(got.read_energy_pj, want.read_energy_pj, 1e-12, "read energy");
  expect_rel(got.write_energy_pj, want.write_energy_pj, 1e-12, "write energy");
  expect_rel(got.leakage_mw, want.leakage_mw, 1e-12, "leakage");
  expect_rel(got.area_mm2, want.area_mm2, 1e-12, "area");
  expect_rel(got.area_efficiency, want.area_efficiency, 1e-12, "efficiency");
}

TEST(Characterize, RandomOrganizationsMatchOracle) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int bits = 1 + static_cast<int>(rng() % 3);
    const int width = bits == 3 ? 48 : 64;
    const double area = 4 + 150 * u(rng);
    const double node = 7 + 123 * u(rng);
    const double tr = 0.5 + 50 * u(rng), tw = 1 + 500 * u(rng);
    const double er = 0.001 + u(rng), ew = 0.01 + 5 * u(rng), sb = u(rng);
    const std::int64_t cap = std::int64_t(1024) << (rng() % 14);
    const auto c = make_cell("RRAM", area, node, bits, tr, tw, er, ew, sb);
    for (const auto& org : enumerate_organizations(cap, width, bits)) {
      const auto got = characterize(c, org, cap);
      const auto want = oracle::spreadsheet(area, node, tr, tw, er, ew, sb, cap, org.rows, org.cols,
                                            org.subarrays, width, bits);
      ASSERT_NEAR(got.read_latency_ns, want.read_latency_ns, 1e-9 * want.read_latency_ns);
      ASSERT_NEAR(got.write_energy_pj, want.write_energy_pj, 1e-9 * want.write_energy_pj);
      ASSERT_NEAR(got.leakage_mw, want.leakage_mw, 1e-9 * want.leakage_mw);
      ASSERT_NEAR(got.area_mm2, want.area_mm2, 1e-9 * want.area_mm2);
    }
  }
}

TEST(Characterize, LatencyMonotoneInRows) {
  const auto c = sram();
  for (int col : kSubarrayDims) {
    double prev = 0;
    for (int r : kSubarrayDims) {
      // Fixed S isolates the row term.
      const auto ch = characterize(c, {r, col, 64, 64, 1}, 128 * 1024);
      EXPECT_GT(ch.read_latency_ns, prev);
      prev = ch.read_latency_ns;
    }
  }
}

TEST(Characterize, AreaEfficiencyGrowsWithSubarraySize) {
  const auto c = sram();
  double prev = 0;
  for (int d : kSubarrayDims) {
    const auto orgs = enumerate_organizations(8 * kMiB, 64, 1);
    for (const auto& o : orgs) {
      if (o.rows == d && o.cols == d) {
        const auto ch = characterize(c, o, 8 * kMiB);
        EXPECT_GT(ch.area_efficiency, prev);
        EXPECT_LT(ch.area_efficiency, 1.0);
        prev = ch.area_efficiency;
      }
    }
  }
}

TEST(Characterize, ZeroDelayConstantsLeaveCellLatency) {
  Calibration cal;
  cal.d0 = cal.d1 = cal.d2 = cal.d3 = 0;
  const auto c = sram();
  for (const auto& o : enumerate_organizations(kMiB, 64, 1)) {
    const auto ch = characterize(c, o, kMiB, cal);
    EXPECT_DOUBLE_EQ(ch.read_latency_ns, c.read_latency_ns);
    EXPECT_DOUBLE_EQ(ch.write_latency_ns, c.write_latency_ns);
  }
}

TEST(Characterize, MlcHalvesDataArea) {
  const auto c = make_cell("STT", 40, 28, 2, 5, 10, 0.5, 1.5, 0);
  const auto slc = characterize(c, {1024, 1024, 16, 64, 1}, 2 * kMiB);
  const auto mlc = characterize(c, {1024, 1024, 8, 64, 2}, 2 * kMiB);
  EXPECT_DOUBLE_EQ(mlc.data_area_mm2, slc.data_area_mm2 / 2);
  // MLC sensing costs 1.5x per extra bit on the cell term.
  const double slc_delay = slc.read_latency_ns - 5;
  const double mlc_delay = mlc.read_latency_ns - 7.5;
  EXPECT_NEAR(mlc_delay, slc_delay - 0.05 * 28 / 22.0, 1e-12);
}

TEST(Characterize, RejectsOffGridOrganizations) {
  EXPECT_THROW(characterize(sram(), {1000, 1024, 16, 64, 1}, 2 * kMiB), PreconditionError);
  EXPECT_THROW(characterize(sram(), {1024, 1024, 8, 64, 1}, 2 * kMiB), PreconditionError);
}

TEST(Optimize, MatchesExhaustiveScanForEveryTarget) {
  const auto c = make_cell("FeFET", 20, 45, 2, 25, 100, 0.25, 5e-3, 0);
  for (int bits : {1, 2}) {
    for (OptimizationTarget t : kOptimizationTargets) {
      const auto best = optimize(c, 4 * kMiB, 64, t, bits);
      double lowest = std::numeric_limits<double>::infinity();
      for (const auto& o : enumerate_organizations(4 * kMiB, 64, bits)) {
        lowest = std::min(lowest, target_metric(characterize(c, o, 4 * kMiB), t));
      }
      EXPECT_EQ(target_metric(best.characterization, t), lowest) << target_name(t);
    }
  }
}

TEST(Optimize, TiesGoToSmallerArea) {
  // Zero delay constants and zero cell latency: every organization ties on latency.
  Calibration cal;
  cal.d0 = cal.d1 = cal.d2 = cal.d3 = 0;
  auto c = sram();
  c.read_latency_ns = 1;
  const auto best = optimize(c, 2 * kMiB, 64, OptimizationTarget::ReadLatency, 1, cal);
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& o : enumerate_organizations(2 * kMiB, 64, 1)) {
    smallest = std::min(smallest, characterize(c, o, 2 * kMiB, cal).area_mm2);
  }
  EXPECT_EQ(best.characterization.area_mm2, smallest);
}

TEST(Optimize, DeterministicAcrossCalls) {
  const auto c = sram();
  const auto a = optimize(c, 2 * kMiB, 64, OptimizationTarget::ReadEDP);
  const auto b = optimize(c, 2 * kMiB, 64, OptimizationTarget::ReadEDP);
  EXPECT_EQ(a.organization, b.organization);
}

TEST(Optimize, AreaTargetPrefersLargeSubarrays) {
  const auto best = optimize(sram(), 8 * kMiB, 64, OptimizationTarget::Area);
  EXPECT_EQ(best.organization.rows, 2048);
  EXPECT_EQ(best.organization.cols, 2048);
}

TEST(Optimize, DenserCellHasSmallerArrayAtFixedOrganization) {
  const auto dense = make_cell("RRAM", 4, 22, 2, 10, 100, 1e-3, 0.68, 0);
  const auto sparse = make_cell("RRAM", 53, 22, 2, 10, 100, 1e-3, 0.68, 0);
  for (const auto& o : enumerate_organizations(2 * kMiB, 64, 1)) {
    EXPECT_LT(characterize(dense, o, 2 * kMiB).area_mm2, characterize(sparse, o, 2 * kMiB).area_mm2);
    EXPECT_DOUBLE_EQ(characterize(dense, o, 2 * kMiB).read_latency_ns,
                     characterize(sparse, o, 2 * kMiB).read_latency_ns);
  }
}
