"""Write a trained toy model as scsim JSON and the evaluation subset as IDX."""
import argparse
import json
import struct

import numpy as np


def ints(a, n_bits):
    return [int(v) for v in np.rint(np.asarray(a).ravel() * 2 ** (n_bits - 1))]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("weights", help="npz produced by train_toy.py")
    ap.add_argument("--data", default="all.npz")
    ap.add_argument("--model-out", required=True)
    ap.add_argument("--idx-prefix", help="write <prefix>-images-idx3-ubyte and labels")
    ap.add_argument("--name", default="toy-mnist")
    ap.add_argument("--n-bits", type=int, default=8)
    a = ap.parse_args()

    m = np.load(a.weights)
    n = a.n_bits
    c = int(m["C"])
    pool = int(m["POOL"])
    shift = int(round(np.log2(float(m["G"]))))
    model = {
        "name": a.name,
        "n_bits": n,
        "input": {"channels": 1, "height": 28, "width": 28},
        "layers": [
            {"type": "conv", "out_channels": c, "kernel": [5, 5],
             "weights": ints(m["W1"], n), "weight_exp": 1 - n, "output_shift": shift},
            {"type": "relu"},
            {"type": "maxpool", "window": pool},
            {"type": "fc", "out_features": 10, "weights": ints(m["W2"], n), "weight_exp": 1 - n,
             "bias": ints(m["b2"], n), "bias_exp": 1 - n, "output_shift": 0},
        ],
    }
    with open(a.model_out, "w") as f:
        json.dump(model, f, separators=(",", ":"))

    if a.idx_prefix:
        d = np.load(a.data)
        ev = m["ev"]
        x = d["X"][ev].astype(np.uint8)
        y = d["Y"][ev].astype(np.uint8)
        with open(a.idx_prefix + "-images-idx3-ubyte", "wb") as f:
            f.write(struct.pack(">IIII", 0x803, len(x), 28, 28))
            f.write(x.tobytes())
        with open(a.idx_prefix + "-labels-idx1-ubyte", "wb") as f:
            f.write(struct.pack(">II", 0x801, len(y)))
            f.write(y.tobytes())


if __name__ == "__main__":
    main()
