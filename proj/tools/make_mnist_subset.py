#!/usr/bin/env python3
"""Write a small MNIST subset in IDX format.

The source is the 5,000-image MNIST sample bundled in the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 784 pixel columns then the label).
Images are shuffled with a fixed seed and split into train/test files.

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 -m zipfile -e /tmp/mlx/mlxtend-*.whl /tmp/mlx
    python3 tools/make_mnist_subset.py /tmp/mlx/mlxtend/data/data/mnist_5k.csv.gz data/mnist-subset
"""
import argparse
import gzip
import pathlib
import struct

import numpy as np


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv_gz")
    ap.add_argument("out_dir")
    ap.add_argument("--train", type=int, default=2000)
    ap.add_argument("--test", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20170401)
    args = ap.parse_args()

    with gzip.open(args.csv_gz, "rt") as f:
        data = np.loadtxt(f, delimiter=",")
    pixels = data[:, :-1]
    labels = data[:, -1].astype(int)
    order = np.random.default_rng(args.seed).permutation(len(labels))
    pixels, labels = pixels[order], labels[order]

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_train, n_test = args.train, args.test
    write_images(out / "train-images-idx3-ubyte", pixels[:n_train])
    write_labels(out / "train-labels-idx1-ubyte", labels[:n_train])
    write_images(out / "t10k-images-idx3-ubyte", pixels[n_train:n_train + n_test])
    write_labels(out / "t10k-labels-idx1-ubyte", labels[n_train:n_train + n_test])


if __name__ == "__main__":
    main()
