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

#include <bitset>
#include <cmath>
#include <random>

#include "envmx/fault_injection.hpp"
#include "oracles.hpp"

using namespace envmx;

namespace {

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

std::string weights_path() { return oracle::source_path("data/tiny_classifier/weights.bin"); }

// Clean top-1 accuracy of the bundled classifier, frozen when the data was generated.
constexpr double kGoldenCleanAccuracy = 0.951;

struct Row {
  std::optional<double> accuracy;
};

}  // namespace

TEST(Inject, ZeroRateIsIdentity) {
  const StoredTensor t{random_bytes(4096, 1), 1, LevelCoding::Gray, std::nullopt};
  const auto r = inject(t, SlcFaults{0.0}, 3);
  EXPECT_EQ(r.corrupted, t.payload);
  EXPECT_EQ(r.bit_error_rate, 0.0);
  EXPECT_EQ(r.cell_error_rate, 0.0);
}

TEST(Inject, UnitRateFlipsEveryBit) {
  const StoredTensor t{random_bytes(4096, 1), 1, LevelCoding::Gray, std::nullopt};
  const auto r = inject(t, SlcFaults{1.0}, 3);
  for (std::size_t i = 0; i < t.payload.size(); ++i) {
    ASSERT_EQ(r.corrupted[i], static_cast<std::uint8_t>(~t.payload[i]));
  }
  EXPECT_EQ(r.bit_error_rate, 1.0);
}

TEST(Inject, SlcRateWithinBinomialBound) {
  const double ber = 0.01;
  const std::size_t bytes = 12500;  // 1e5 bits
  const double n = bytes * 8.0;
  const double bound = 4 * std::sqrt(ber * (1 - ber) / n);
  const StoredTensor t{random_bytes(bytes, 2), 1, LevelCoding::Gray, std::nullopt};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto r = inject(t, SlcFaults{ber}, seed);
    EXPECT_NEAR(r.bit_error_rate, ber, bound) << "seed " << seed;
  }
}

TEST(Inject, MlcMatchesEnumeratedExpectation) {
  for (LevelCoding coding : {LevelCoding::Gray, LevelCoding::Binary}) {
    const bool gray = coding == LevelCoding::Gray;
    const auto model = adjacent_level_model(4, 0.01);
    const double expected = oracle::expected_mlc_bit_error_rate(model.transition, 2, gray);
    // Per-cell flip count variance from the same table.
    double m1 = 0, m2 = 0;
    for (unsigned l = 0; l < 4; ++l) {
      for (unsigned k = 0; k < 4; ++k) {
        const unsigned cl = gray ? gray_encode(l) : l, ck = gray ? gray_encode(k) : k;
        const double flips = std::bitset<8>(cl ^ ck).count();
        m1 += model.transition[l][k] * flips / 4;
        m2 += model.transition[l][k] * flips * flips / 4;
      }
    }
    const double cells = 1e5;
    const double sigma = std::sqrt((m2 - m1 * m1) / cells) / 2;
    const StoredTensor t{random_bytes(25000, 3), 2, coding, std::nullopt};
    const auto r = inject(t, model, 17);
    EXPECT_NEAR(r.bit_error_rate, expected, 3 * sigma);
  }
  // Gray: q/2 per interior level pair; 2 interior and 2 boundary levels.
  EXPECT_NEAR(oracle::expected_mlc_bit_error_rate(adjacent_level_model(4, 0.01).transition, 2, true),
              (2 * 0.02 + 2 * 0.01) / 4 / 2, 1e-15);
}

TEST(Inject, GrayAdjacentErrorFlipsOneBit) {
  for (int b : {2, 3}) {
    const unsigned levels = 1u << b;
    for (unsigned l = 0; l + 1 < levels; ++l) {
      EXPECT_EQ(std::bitset<8>(gray_encode(l) ^ gray_encode(l + 1)).count(), 1u);
      EXPECT_EQ(gray_decode(gray_encode(l)), l);
    }
    // Force every level to move up one step, and the top level down.
    MlcFaults up;
    up.levels = static_cast<int>(levels);
    up.transition.assign(levels, std::vector<double>(levels, 0.0));
    for (unsigned l = 0; l < levels; ++l) up.transition[l][l + 1 < levels ? l + 1 : l - 1] = 1.0;
    const StoredTensor t{random_bytes(3 * 64, 4), b, LevelCoding::Gray, std::nullopt};
    const auto r = inject(t, up, 1);
    EXPECT_EQ(r.cell_error_rate, 1.0);
    EXPECT_NEAR(r.bit_error_rate, 1.0 / b, 1e-15);
  }
}

TEST(Inject, IdentityMatrixIsNoOp) {
  for (int b : {2, 3, 4}) {
    const StoredTensor t{random_bytes(3 * 100, 5), b, LevelCoding::Gray, std::nullopt};
    const auto r = inject(t, adjacent_level_model(1 << b, 0.0), 9);
    EXPECT_EQ(r.corrupted, t.payload);
  }
}

TEST(Inject, DeterministicPerSeed) {
  const StoredTensor t{random_bytes(10000, 6), 2, LevelCoding::Gray, std::nullopt};
  const auto m = adjacent_level_model(4, 0.2);
  EXPECT_EQ(inject(t, m, 42).corrupted, inject(t, m, 42).corrupted);
  EXPECT_NE(inject(t, m, 42).corrupted, inject(t, m, 43).corrupted);
}

TEST(Inject, ModelMismatchRejected) {
  const StoredTensor slc{random_bytes(12, 7), 1, LevelCoding::Gray, std::nullopt};
  const StoredTensor mlc{random_bytes(12, 7), 2, LevelCoding::Gray, std::nullopt};
  EXPECT_THROW(inject(slc, adjacent_level_model(4, 0.1), 1), PreconditionError);
  EXPECT_THROW(inject(mlc, SlcFaults{0.1}, 1), PreconditionError);
  EXPECT_THROW(inject(mlc, adjacent_level_model(8, 0.1), 1), PreconditionError);
  const StoredTensor tlc{random_bytes(4, 7), 3, LevelCoding::Gray, std::nullopt};
  EXPECT_THROW(inject(tlc, adjacent_level_model(8, 0.1), 1), PreconditionError);
  EXPECT_THROW(inject(slc, SlcFaults{1.5}, 1), PreconditionError);
}

TEST(AdjacentModel, Construction) {
  const auto m = adjacent_level_model(4, 0.1);
  EXPECT_EQ(m.transition[0], (std::vector<double>{0.9, 0.1, 0, 0}));
  EXPECT_EQ(m.transition[1], (std::vector<double>{0.1, 0.8, 0.1, 0}));
  const auto id = adjacent_level_model(8, 0.0);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) EXPECT_EQ(id.transition[i][j], i == j ? 1.0 : 0.0);
  }
  for (double q : {0.0, 0.013, 0.25, 0.5}) {
    for (const auto& row : adjacent_level_model(16, q).transition) {
      double s = 0;
      for (double p : row) s += p;
      EXPECT_NEAR(s, 1.0, 1e-15);
    }
  }
  EXPECT_THROW(adjacent_level_model(4, 0.6), PreconditionError);
}

TEST(Accuracy, CleanClassifierMatchesGolden) {
  const auto w = load_weights(weights_path());
  ASSERT_EQ(w.shape, (std::vector<std::int64_t>{10, 64}));
  const auto r = inject(w.as_tensor(1), SlcFaults{0.0}, 1);
  EXPECT_DOUBLE_EQ(evaluate_accuracy(weights_path(), r, AccuracyAdapter::TinyLinearClassifier),
                   kGoldenCleanAccuracy);
  EXPECT_EQ(evaluate_accuracy(weights_path(), r, AccuracyAdapter::Mse), 0.0);
}

TEST(Accuracy, HalfBerIsNearChance) {
  const auto w = load_weights(weights_path());
  const auto eval = load_eval_set(weights_path());
  double sum = 0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    const auto r = inject(w.as_tensor(1), SlcFaults{0.5}, s);
    sum += evaluate_accuracy(w, &eval, r, AccuracyAdapter::TinyLinearClassifier);
  }
  EXPECT_NEAR(sum / 30, 0.1, 0.05);
}

TEST(Accuracy, MseGrowsWithErrorRate) {
  const auto w = load_weights(weights_path());
  double prev = 0;
  for (double ber : {1e-3, 1e-2, 1e-1}) {
    const double mse = evaluate_accuracy(w, nullptr, inject(w.as_tensor(1), SlcFaults{ber}, 7),
                                         AccuracyAdapter::Mse);
    EXPECT_GT(mse, prev);
    prev = mse;
  }
}

TEST(Accuracy, ShapeAndSizeChecks) {
  auto w = load_weights(weights_path());
  const auto eval = load_eval_set(weights_path());
  InjectionResult r;
  r.corrupted.assign(10, 0);
  EXPECT_THROW(evaluate_accuracy(w, &eval, r, AccuracyAdapter::Mse), PreconditionError);
  r.corrupted = w.payload;
  w.shape = {640};
  EXPECT_THROW(evaluate_accuracy(w, &eval, r, AccuracyAdapter::TinyLinearClassifier), PreconditionError);
}

TEST(AccuracyFilter, FloorSemantics) {
  std::vector<Row> rows{{0.95}, {std::nullopt}, {0.5}, {0.9}, {0.89999}};
  EXPECT_EQ(accuracy_filter(rows, 0.0).size(), rows.size());
  EXPECT_TRUE(accuracy_filter(std::vector<Row>{{0.1}, {0.2}}, 0.5).empty());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Row> many;
  for (int i = 0; i < 500; ++i) many.push_back({u(rng) < 0.1 ? std::nullopt : std::optional<double>(u(rng))});
  const auto kept = accuracy_filter(many, 0.6);
  std::size_t want = 0;
  for (const auto& r : many) want += (!r.accuracy || *r.accuracy >= 0.6);
  ASSERT_EQ(kept.size(), want);
  // Stable order.
  std::size_t j = 0;
  for (const auto& r : many) {
    if (!r.accuracy || *r.accuracy >= 0.6) {
      EXPECT_EQ(kept[j++].accuracy, r.accuracy);
    }
  }
}
