#!/usr/bin/env python3
# Copyright 2026 The envmx Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates data/tiny_classifier: int8 10x64 linear classifier + eval set."""

import json
import pathlib

import numpy as np

CLASSES, FEATURES, SAMPLES = 10, 64, 1000
NOISE = 2.2


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "tiny_classifier"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20260101)

    prototypes = rng.standard_normal((CLASSES, FEATURES))
    labels = rng.integers(0, CLASSES, SAMPLES).astype(np.uint8)
    inputs = prototypes[labels] + NOISE * rng.standard_normal((SAMPLES, FEATURES))

    scale = float(np.abs(prototypes).max() / 127.0)
    q = np.clip(np.round(prototypes / scale), -127, 127).astype(np.int8)

    (out / "weights.bin").write_bytes(q.tobytes())
    meta = {"shape": [CLASSES, FEATURES], "scale": scale, "zero_point": 0, "element_bits": 8}
    (out / "weights.json").write_text(json.dumps(meta, indent=2) + "\n")
    (out / "eval_inputs.f32").write_bytes(inputs.astype("<f4").tobytes())
    (out / "eval_labels.u8").write_bytes(labels.tobytes())

    logits = inputs.astype(np.float32).astype(np.float64) @ (q.astype(np.float64) * scale).T
    print("clean accuracy:", float((logits.argmax(axis=1) == labels).mean()))


if __name__ == "__main__":
    main()
