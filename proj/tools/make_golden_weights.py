#!/usr/bin/env python3
"""Writes the golden weight and observation fixtures used by the C++ tests.

Everything here is written from the file-format description alone (see
sflow_io.py): tensors are packed by hand, the CRC-32C trailer is computed bit
by bit, and the expected network outputs come from a plain numpy forward pass.

    python3 tools/make_golden_weights.py [--out tests/fixtures]
"""

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from sflow_io import crc32c, forward, pack_observation, pack_weights  # noqa: E402


def make_network(rng, width, d, heads, out_dim, kind):
    tensors = [("meta", np.array([width, heads, kind, 10.0, 0.6, 0, 0, 0], dtype=np.float32))]

    def linear(name, n_in, n_out):
        w = rng.uniform(-0.8, 0.8, size=(n_out, n_in)).astype(np.float32)
        b = rng.uniform(-0.3, 0.3, size=(n_out,)).astype(np.float32)
        tensors.append((name + ".weight", w))
        tensors.append((name + ".bias", b))

    for prefix, n_in in (("dyn", width), ("static", 5)):
        linear(prefix + ".vector_mlp.0", n_in, 6)
        linear(prefix + ".vector_mlp.1", 6, 6)
        linear(prefix + ".post_mlp.0", 6, d)
    for tag in "qkvo":
        w = rng.uniform(-0.8, 0.8, size=(d, d)).astype(np.float32)
        b = rng.uniform(-0.3, 0.3, size=(d,)).astype(np.float32)
        tensors.append(("mha.w_" + tag, w))
        tensors.append(("mha.b_" + tag, b))
    linear("decoder_mlp.0", d, 7)
    linear("decoder_mlp.1", 7, 5)
    linear("decoder_mlp.2", 5, out_dim)
    return tensors


def random_polylines(rng, count, rows, width):
    out = []
    for _ in range(count):
        p = rng.uniform(-3.0, 3.0, size=(rows, width))
        p[:, 4] = np.arange(1, rows + 1)
        if width == 6:
            p[:, 5] = rng.uniform(0.0, 90.0)
        out.append(p.astype(np.float32))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(20240917)
    expected = {"crc32c_check": crc32c(b"123456789")}

    for label, width, kind, out_dim, query in (("lower", 6, 0, 2, 0), ("adversary", 5, 1, 1, 2)):
        tensors = make_network(rng, width, 8, 2, out_dim, kind)
        dyn = random_polylines(rng, 3, 4, width)
        static = [rng.uniform(-3.0, 3.0, size=(3, 5)).astype(np.float32) for _ in range(2)]
        raw = forward(tensors, {"query": query, "dynamic": dyn, "static": static})
        with open(os.path.join(args.out, "golden_%s.svow" % label), "wb") as f:
            f.write(pack_weights(tensors))
        with open(os.path.join(args.out, "golden_%s_obs.svob" % label), "wb") as f:
            f.write(pack_observation(width, query, dyn, static))
        expected[label] = {"raw": [float(x) for x in raw]}
        if kind == 0:
            expected[label]["action"] = [5.0 * (1.0 + np.tanh(raw[0])), 0.6 * float(np.tanh(raw[1]))]
        else:
            expected[label]["svo"] = 45.0 + 45.0 * float(np.tanh(raw[0]))

    with open(os.path.join(args.out, "golden_expected.json"), "w") as f:
        json.dump(expected, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
