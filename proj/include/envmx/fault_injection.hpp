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
 * @file fault_injection.hpp
 * @brief Store-time fault injection into cell-encoded data and accuracy
 *        scoring of the corrupted result.
 *
 * Payload bits are taken MSB first within each byte; a cell of B bits holds
 * B consecutive payload bits. With Gray level coding, the bits stored in a
 * cell at level l are l ^ (l >> 1), so neighbouring levels differ in one bit.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "envmx/common.hpp"
#include "envmx/rng.hpp"

namespace envmx {

struct SlcFaults {
  double bit_error_rate = 0;
};

/// Row-stochastic level transition matrix; levels = 2^B.
struct MlcFaults {
  int levels = 4;
  std::vector<std::vector<double>> transition;
};

using FaultModel = std::variant<SlcFaults, MlcFaults>;

inline void validate_fault_model(const FaultModel& model) {
  if (const auto* slc = std::get_if<SlcFaults>(&model)) {
    if (!(slc->bit_error_rate >= 0 && slc->bit_error_rate <= 1)) {
      throw PreconditionError("SLC bit error rate must be in [0, 1]");
    }
    return;
  }
  const auto& mlc = std::get<MlcFaults>(model);
  if (mlc.levels < 2 || (mlc.levels & (mlc.levels - 1)) != 0) {
    throw PreconditionError("MLC level count must be a power of two >= 2");
  }
  if (mlc.transition.size() != static_cast<std::size_t>(mlc.levels)) {
    throw PreconditionError("transition matrix must have one row per level");
  }
  for (const auto& row : mlc.transition) {
    if (row.size() != static_cast<std::size_t>(mlc.levels)) {
      throw PreconditionError("transition matrix must be square");
    }
    double sum = 0;
    for (double p : row) {
      if (!(p >= 0)) throw PreconditionError("transition probabilities must be >= 0");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12) throw PreconditionError("transition rows must sum to 1");
  }
}

/// Level confusion with neighbours only: interior levels move up or down with
/// probability q each, boundary levels move inward with probability q.
inline MlcFaults adjacent_level_model(int levels, double q) {
  if (!(q >= 0) || q > 0.5) throw PreconditionError("adjacent-level probability must be in [0, 0.5]");
  if (levels < 2) throw PreconditionError("need at least two levels");
  MlcFaults m;
  m.levels = levels;
  m.transition.assign(static_cast<std::size_t>(levels), std::vector<double>(static_cast<std::size_t>(levels), 0.0));
  for (int l = 0; l < levels; ++l) {
    auto& row = m.transition[static_cast<std::size_t>(l)];
    if (l > 0) row[static_cast<std::size_t>(l - 1)] = q;
    if (l + 1 < levels) row[static_cast<std::size_t>(l + 1)] = q;
    const bool boundary = l == 0 || l == levels - 1;
    row[static_cast<std::size_t>(l)] = boundary ? 1.0 - q : 1.0 - 2.0 * q;
  }
  return m;
}

enum class LevelCoding { Gray, Binary };

inline unsigned gray_encode(unsigned level) { return level ^ (level >> 1); }

inline unsigned gray_decode(unsigned code) {
  unsigned level = code;
  for (unsigned shift = code >> 1; shift; shift >>= 1) level ^= shift;
  return level;
}

struct Quantization {
  double scale = 1;
  int zero_point = 0;
  int element_bits = 8;
};

struct StoredTensor {
  std::vector<std::uint8_t> payload;
  int bits_per_cell = 1;
  LevelCoding level_coding = LevelCoding::Gray;
  std::optional<Quantization> quantization;
};

struct InjectionResult {
  std::vector<std::uint8_t> corrupted;
  double bit_error_rate = 0;
  double cell_error_rate = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline unsigned read_bits(const std::vector<std::uint8_t>& bytes, std::size_t first_bit, int count) {
  unsigned v = 0;
  for (int k = 0; k < count; ++k) {
    const std::size_t bit = first_bit + static_cast<std::size_t>(k);
    const unsigned b = (bytes[bit / 8] >> (7 - bit % 8)) & 1u;
    v = (v << 1) | b;
  }
  return v;
}

inline void write_bits(std::vector<std::uint8_t>& bytes, std::size_t first_bit, int count, unsigned v) {
  for (int k = 0; k < count; ++k) {
    const std::size_t bit = first_bit + static_cast<std::size_t>(k);
    const unsigned b = (v >> (count - 1 - k)) & 1u;
    const auto mask = static_cast<std::uint8_t>(1u << (7 - bit % 8));
    if (b) {
      bytes[bit / 8] |= mask;
    } else {
      bytes[bit / 8] &= static_cast<std::uint8_t>(~mask);
    }
  }
}

inline std::size_t popcount8(std::uint8_t v) {
  std::size_t n = 0;
  for (; v; v &= static_cast<std::uint8_t>(v - 1)) ++n;
  return n;
}

}  // namespace detail

/// Corrupts `data` under `model`. Deterministic in (payload, model, seed);
/// each bit (SLC) or cell (MLC) uses its own counter so order is irrelevant.
inline InjectionResult inject(const StoredTensor& data, const FaultModel& model, std::uint64_t seed) {
  validate_fault_model(model);
  const int b = data.bits_per_cell;
  if (b < 1 || b > 16) throw PreconditionError("bits per cell must be in [1, 16]");
  if (const auto* mlc = std::get_if<MlcFaults>(&model)) {
    if (mlc->levels != (1 << b)) {
      throw PreconditionError("fault model has " + std::to_string(mlc->levels) +
                              " levels but cells hold " + std::to_string(b) + " bits");
    }
  } else if (b != 1) {
    throw PreconditionError("SLC fault model requires 1 bit per cell");
  }
  const std::size_t total_bits = data.payload.size() * 8;
  if (total_bits % static_cast<std::size_t>(b) != 0) {
    throw PreconditionError("payload bit count is not divisible by bits per cell");
  }

  const CounterRng rng(seed);
  InjectionResult out;
  out.seed = seed;
  out.corrupted = data.payload;
  const std::size_t cells = total_bits / static_cast<std::size_t>(b);
  std::size_t cells_changed = 0;

  if (const auto* slc = std::get_if<SlcFaults>(&model)) {
    for (std::size_t i = 0; i < total_bits; ++i) {
      if (rng.uniform(i) < slc->bit_error_rate) {
        out.corrupted[i / 8] ^= static_cast<std::uint8_t>(1u << (7 - i % 8));
        ++cells_changed;
      }
    }
  } else {
    const auto& mlc = std::get<MlcFaults>(model);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const std::size_t first = cell * static_cast<std::size_t>(b);
      const unsigned code = detail::read_bits(data.payload, first, b);
      const unsigned level = data.level_coding == LevelCoding::Gray ? gray_decode(code) : code;
      const auto& row = mlc.transition[level];
      const double u = rng.uniform(cell);
      // Inverse CDF; falls back to the last nonzero entry on rounding slack.
      unsigned next = level;
      double acc = 0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] <= 0) continue;
        acc += row[k];
        next = static_cast<unsigned>(k);
        if (u < acc) break;
      }
      if (next != level) {
        ++cells_changed;
        const unsigned new_code = data.level_coding == LevelCoding::Gray ? gray_encode(next) : next;
        detail::write_bits(out.corrupted, first, b, new_code);
      }
    }
  }

  std::size_t flipped = 0;
  for (std::size_t i = 0; i < data.payload.size(); ++i) {
    flipped += detail::popcount8(static_cast<std::uint8_t>(data.payload[i] ^ out.corrupted[i]));
  }
  out.bit_error_rate = total_bits ? static_cast<double>(flipped) / static_cast<double>(total_bits) : 0.0;
  out.cell_error_rate = cells ? static_cast<double>(cells_changed) / static_cast<double>(cells) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Weights files and accuracy adapters
// ---------------------------------------------------------------------------

/// int8 payload plus its `{shape, scale, zero_point, element_bits}` sidecar.
struct WeightsFile {
  std::vector<std::int64_t> shape;
  Quantization quantization;
  std::vector<std::uint8_t> payload;

  std::size_t elements() const {
    std::size_t n = 1;
    for (auto d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  StoredTensor as_tensor(int bits_per_cell, LevelCoding coding = LevelCoding::Gray) const {
    return {payload, bits_per_cell, coding, quantization};
  }
};

inline std::string sidecar_path(const std::string& weights_path) {
  std::filesystem::path p(weights_path);
  p.replace_extension(".json");
  return p.string();
}

inline WeightsFile load_weights(const std::string& path) {
  WeightsFile w;
  const std::string bytes = read_file(path);
  w.payload.assign(bytes.begin(), bytes.end());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(sidecar_path(path)));
    w.shape = meta.at("shape").get<std::vector<std::int64_t>>();
    w.quantization.scale = meta.at("scale").get<double>();
    w.quantization.zero_point = meta.at("zero_point").get<int>();
    w.quantization.element_bits = meta.at("element_bits").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad weights sidecar for '" + path + "': " + e.what());
  }
  if (w.quantization.element_bits != 8) throw PreconditionError("only 8-bit weights are supported");
  if (w.elements() != w.payload.size()) {
    throw PreconditionError("weights payload has " + std::to_string(w.payload.size()) +
                            " bytes but shape needs " + std::to_string(w.elements()));
  }
  return w;
}

inline std::vector<double> dequantize(const std::vector<std::uint8_t>& payload, const Quantization& q) {
  std::vector<double> out(payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const auto v = static_cast<std::int8_t>(payload[i]);
    out[i] = (static_cast<double>(v) - q.zero_point) * q.scale;
  }
  return out;
}

enum class AccuracyAdapter { Mse, TinyLinearClassifier };

inline std::optional<AccuracyAdapter> parse_adapter(std::string_view s) {
  const std::string l = to_lower(s);
  if (l == "mse") return AccuracyAdapter::Mse;
  if (l == "tiny_linear_classifier" || l == "tinylinearclassifier") {
    return AccuracyAdapter::TinyLinearClassifier;
  }
  return std::nullopt;
}

inline constexpr int kClassifierClasses = 10;
inline constexpr int kClassifierFeatures = 64;

/// Evaluation set stored next to the classifier weights.
struct EvalSet {
  std::vector<float> inputs;  // samples x 64, row-major
  std::vector<std::uint8_t> labels;
};

inline EvalSet load_eval_set(const std::string& weights_path) {
  const auto dir = std::filesystem::path(weights_path).parent_path();
  EvalSet set;
  const std::string raw = read_file((dir / "eval_inputs.f32").string());
  const std::string labels = read_file((dir / "eval_labels.u8").string());
  if (raw.size() % (sizeof(float) * kClassifierFeatures) != 0) {
    throw PreconditionError("eval inputs are not a multiple of 64 float32 values");
  }
  set.inputs.resize(raw.size() / sizeof(float));
  std::memcpy(set.inputs.data(), raw.data(), raw.size());  // little-endian host assumed
  set.labels.assign(labels.begin(), labels.end());
  if (set.labels.size() * kClassifierFeatures != set.inputs.size()) {
    throw PreconditionError("eval inputs and labels disagree on sample count");
  }
  return set;
}

/// Top-1 accuracy of logits = W x with dequantized 10x64 weights.
inline double classifier_accuracy(const std::vector<double>& weights, const EvalSet& set) {
  if (weights.size() != static_cast<std::size_t>(kClassifierClasses * kClassifierFeatures)) {
    throw PreconditionError("classifier expects 10x64 weights");
  }
  if (set.labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < set.labels.size(); ++s) {
    const float* x = &set.inputs[s * kClassifierFeatures];
    int best = 0;
    double best_logit = -kInf;
    for (int k = 0; k < kClassifierClasses; ++k) {
      double logit = 0;
      for (int j = 0; j < kClassifierFeatures; ++j) {
        logit += weights[static_cast<std::size_t>(k * kClassifierFeatures + j)] * x[j];
      }
      if (logit > best_logit) {
        best_logit = logit;
        best = k;
      }
    }
    if (best == set.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.labels.size());
}

/**
 * Scores corrupted weights. Mse: mean squared error between the dequantized
 * original and corrupted tensors. TinyLinearClassifier: top-1 accuracy of the
 * bundled classifier on its evaluation set (`eval` required).
 */
inline double evaluate_accuracy(const WeightsFile& w, const EvalSet* eval,
                                const InjectionResult& result, AccuracyAdapter adapter) {
  if (result.corrupted.size() != w.payload.size()) {
    throw PreconditionError("corrupted payload size does not match weights file");
  }
  const auto corrupted = dequantize(result.corrupted, w.quantization);
  if (adapter == AccuracyAdapter::Mse) {
    const auto original = dequantize(w.payload, w.quantization);
    if (original.empty()) return 0.0;
    double sum = 0;
    for (std::size_t i = 0; i < original.size(); ++i) {
      const double d = original[i] - corrupted[i];
      sum += d * d;
    }
    return sum / static_cast<double>(original.size());
  }
  if (w.shape != std::vector<std::int64_t>{kClassifierClasses, kClassifierFeatures}) {
    throw PreconditionError("classifier weights must have shape [10, 64]");
  }
  if (!eval) throw PreconditionError("classifier accuracy needs an evaluation set");
  return classifier_accuracy(corrupted, *eval);
}

inline double evaluate_accuracy(const std::string& weights_path, const InjectionResult& result,
                                AccuracyAdapter adapter) {
  const WeightsFile w = load_weights(weights_path);
  if (adapter == AccuracyAdapter::Mse) return evaluate_accuracy(w, nullptr, result, adapter);
  const EvalSet eval = load_eval_set(weights_path);
  return evaluate_accuracy(w, &eval, result, adapter);
}

/// Keeps rows whose accuracy is absent or at least `floor`, preserving order.
template <class Row>
std::vector<Row> accuracy_filter(const std::vector<Row>& rows, double floor) {
  std::vector<Row> out;
  for (const Row& r : rows) {
    if (!r.accuracy || *r.accuracy >= floor) out.push_back(r);
  }
  return out;
}

}  // namespace envmx
