"""Collect MNIST digits from the `mnist` npm package (1.1.0) into all.npz.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 prepare_mnist.py package/src/digits

The package ships each class as a JSON array of 784-float images in [0, 1].
Output: X uint8 (n, 784), Y uint8 (n,). train_toy.py holds out the last 100
images of every class; export_model.py --idx-prefix writes that subset.
"""
import argparse
import json
import os

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("--out", default="all.npz")
    a = ap.parse_args()

    imgs, labels = [], []
    for d in range(10):
        with open(os.path.join(a.digits_dir, f"{d}.json")) as f:
            px = np.array(json.load(f)["data"], dtype=np.float64).reshape(-1, 784)
        imgs.append(np.rint(px * 255).clip(0, 255).astype(np.uint8))
        labels.append(np.full(len(px), d, np.uint8))
    x = np.concatenate(imgs)
    y = np.concatenate(labels)
    np.savez(a.out, X=x, Y=y)
    print(x.shape, np.bincount(y))


if __name__ == "__main__":
    main()
