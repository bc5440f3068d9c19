# Copyright 2026 The Aesthetics Toolkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the committed test fixtures under tests/fixtures.

Usage: python3 tools/make_fixtures.py [out_dir]
"""

import json
import math
import random
import sys
from pathlib import Path

DIMENSIONS = ["layout", "harmony", "lighting", "distortion"]
TRUE_WEIGHTS = [0.2, 0.5, 0.2, 0.1]


def dump(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def clamp(x, lo, hi):
    return max(lo, min(hi, x))


def annotations(rng, n_images=40):
    """Six raters per image; r6 answers at random, a few ratings are slips."""
    quality = {}
    for i in range(n_images):
        for d in DIMENSIONS:
            quality[(f"img{i:03d}", d)] = clamp(rng.randint(1, 5) + rng.gauss(0, 0.15), 1, 5)
    records = []
    gold = []
    for (image, dim), q in sorted(quality.items()):
        gold.append({"image_id": image, "dimension": dim, "score": int(round(q))})
        for r in range(1, 7):
            if r == 6:
                score = rng.randint(1, 5)
            else:
                score = int(clamp(round(q + rng.gauss(0, 0.3)), 1, 5))
                if rng.random() < 0.03:
                    score = 1 if q > 3 else 5
            records.append({"image_id": image, "dimension": dim, "annotator_id": f"r{r}",
                            "score": score, "batch_id": f"batch-r{r}"})
    rng.shuffle(records)
    return quality, records, gold


def logits(rng, quality):
    """Peaked around the true quality, so the expected score tracks it."""
    out = []
    for (image, dim), q in sorted(quality.items()):
        centre = clamp(q + rng.gauss(0, 0.35), 1, 5)
        values = [5, 4, 3, 2, 1]
        out.append({"image_id": image, "dimension": dim,
                    "logits": [round(-((v - centre) ** 2) / 0.8, 6) for v in values],
                    "backend_id": "fixture"})
    return out


def pairs(rng, n=750):
    out = []
    for k in range(n):
        a = [round(rng.uniform(1, 5), 3) for _ in DIMENSIONS]
        b = [round(rng.uniform(1, 5), 3) for _ in DIMENSIONS]
        d = sum(w * (x - y) for w, x, y in zip(TRUE_WEIGHTS, a, b))
        if abs(d) < 0.1:
            label = "Tie"
        else:
            label = "A" if rng.random() < 1 / (1 + math.exp(-4 * d)) else "B"
        out.append({"pair_id": f"p{k:04d}", "image_a_id": f"pa{k:04d}",
                    "image_b_id": f"pb{k:04d}", "scores_a": a, "scores_b": b,
                    "label": label, "annotator_id": f"a{k % 5 + 1}"})
    return out


def candidates(rng, prompts=6, per_prompt=8):
    out = []
    for p in range(prompts):
        for c in range(per_prompt):
            out.append({"prompt_id": f"prompt{p}", "candidate_id": f"prompt{p}-c{c}",
                        "scores": [round(rng.uniform(1, 5), 3) for _ in DIMENSIONS]})
    return out


def main():
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20260101)
    quality, records, gold = annotations(rng)
    dump(out_dir / "annotations.jsonl", records)
    dump(out_dir / "gold.jsonl", gold)
    dump(out_dir / "logits.jsonl", logits(rng, quality))
    dump(out_dir / "pairs.jsonl", pairs(rng))
    dump(out_dir / "candidates.jsonl", candidates(rng))


if __name__ == "__main__":
    main()
