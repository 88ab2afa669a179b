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

#include <cmath>

#include "envmx/traffic.hpp"
#include "oracles.hpp"

using namespace envmx;

namespace {

const std::string kHeader =
    "name,reads_per_task,writes_per_task,access_width_bits,tasks_per_second,"
    "target_task_latency_s,accuracy_floor,footprint_bytes\n";

}  // namespace

TEST(GenericSweep, ThreePointLogGrid) {
  const auto pats = generate_generic_sweep({1e9, 1e10}, {1e6, 1e8}, 3);
  ASSERT_EQ(pats.size(), 9u);
  EXPECT_EQ(pats[0].read_bytes_per_s, 1e9);
  EXPECT_NEAR(pats[3].read_bytes_per_s, std::pow(10.0, 9.5), 1e-3);
  EXPECT_EQ(pats[6].read_bytes_per_s, 1e10);
  // Read outer, write inner.
  EXPECT_EQ(pats[0].write_bytes_per_s, 1e6);
  EXPECT_NEAR(pats[1].write_bytes_per_s, 1e7, 1e-6);
  EXPECT_EQ(pats[2].write_bytes_per_s, 1e8);
  EXPECT_EQ(pats[2].read_bytes_per_s, 1e9);
}

TEST(GenericSweep, SinglePointIsLowEndpoint) {
  const auto pats = generate_generic_sweep({1e9, 1e10}, {1e6, 1e8}, 1);
  ASSERT_EQ(pats.size(), 1u);
  EXPECT_EQ(pats[0].read_bytes_per_s, 1e9);
  EXPECT_EQ(pats[0].write_bytes_per_s, 1e6);
}

TEST(GenericSweep, InvalidRangesRejected) {
  EXPECT_THROW(generate_generic_sweep({1e10, 1e9}, {1e6, 1e8}, 3), PreconditionError);
  EXPECT_THROW(generate_generic_sweep({0, 1e9}, {1e6, 1e8}, 3), PreconditionError);
  EXPECT_THROW(generate_generic_sweep({1e9, 1e10}, {1e6, 1e8}, 0), PreconditionError);
}

TEST(GenericSweep, StrictlyMonotoneAxesWithEndpoints) {
  for (int n = 2; n <= 12; ++n) {
    const auto pats = generate_generic_sweep({1e9, 1e10}, {1e6, 1e8}, n);
    ASSERT_EQ(pats.size(), static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
      for (int j = 1; j < n; ++j) {
        EXPECT_LT(pats[i * n + j - 1].write_bytes_per_s, pats[i * n + j].write_bytes_per_s);
      }
      if (i > 0) {
        EXPECT_LT(pats[(i - 1) * n].read_bytes_per_s, pats[i * n].read_bytes_per_s);
      }
    }
    EXPECT_EQ(pats.front().read_bytes_per_s, 1e9);
    EXPECT_EQ(pats.back().read_bytes_per_s, 1e10);
    EXPECT_EQ(pats.back().write_bytes_per_s, 1e8);
  }
}

TEST(WorkloadRates, SixtyFramesPerSecond) {
  WorkloadSpec w;
  w.name = "frame";
  w.reads_per_task = 1e6;
  w.tasks_per_second = 60;
  const auto t = workload_to_rates(w);
  EXPECT_EQ(t.read_bytes_per_s, 4.8e8);
  EXPECT_EQ(t.write_bytes_per_s, 0.0);
}

TEST(WorkloadRates, MissingRateRejected) {
  WorkloadSpec w;
  w.name = "x";
  w.reads_per_task = 1;
  EXPECT_THROW(workload_to_rates(w), PreconditionError);
}

TEST(WorkloadRates, LinearInTaskRate) {
  WorkloadSpec w;
  w.name = "x";
  w.reads_per_task = 12345;
  w.writes_per_task = 678;
  w.access_width_bits = 512;
  for (double tps : {0.5, 3.0, 60.0, 1e3}) {
    w.tasks_per_second = tps;
    const auto a = workload_to_rates(w);
    w.tasks_per_second = 2 * tps;
    const auto b = workload_to_rates(w);
    EXPECT_EQ(b.read_bytes_per_s, 2 * a.read_bytes_per_s);
    EXPECT_EQ(b.write_bytes_per_s, 2 * a.write_bytes_per_s);
  }
}

TEST(Workloads, BundledGraphBfs) {
  const auto ws = load_workloads(oracle::source_path("workloads/graph_bfs.csv"));
  ASSERT_FALSE(ws.empty());
  EXPECT_EQ(ws[0].name, "Facebook-Graph-BFS");
  EXPECT_GT(ws[0].writes_per_task, 0);
}

TEST(Workloads, AllBundledFilesParse) {
  for (const char* f : {"workloads/dnn.csv", "workloads/graph_bfs.csv", "workloads/llc.csv"}) {
    EXPECT_FALSE(load_workloads(oracle::source_path(f)).empty()) << f;
  }
}

TEST(Workloads, EmptyFile) {
  EXPECT_TRUE(parse_workloads("").empty());
  EXPECT_TRUE(parse_workloads(kHeader).empty());
}

TEST(Workloads, SchemaErrors) {
  EXPECT_THROW(parse_workloads(kHeader + "w,-1,0,64,1,,,\n"), SchemaError);
  EXPECT_THROW(parse_workloads(kHeader + "w,0,0,64,1,,,\n"), SchemaError);
  EXPECT_THROW(parse_workloads(kHeader + "w,1,0,4,1,,,\n"), SchemaError);
  EXPECT_THROW(parse_workloads(kHeader + "w,1,0,64,0,,,\n"), SchemaError);
  EXPECT_THROW(parse_workloads(kHeader + "w,1,0,64,1,,1.5,\n"), SchemaError);
  EXPECT_THROW(parse_workloads(kHeader + ",1,0,64,1,,,\n"), SchemaError);
}

TEST(Workloads, OptionalFieldsAndDefaultWidth) {
  const auto ws = parse_workloads(kHeader + "w,10,2,,,,,\n");
  ASSERT_EQ(ws.size(), 1u);
  EXPECT_EQ(ws[0].access_width_bits, 64);
  EXPECT_FALSE(ws[0].tasks_per_second);
  EXPECT_FALSE(ws[0].footprint_bytes);
}
