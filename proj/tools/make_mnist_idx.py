#!/usr/bin/env python3
# Copyright 2026 The xbarprune Authors
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
"""Builds MNIST IDX files from package-bundled MNIST samples.

Sandboxes without access to the MNIST mirrors can still reach the package
registries. Two packages ship real MNIST digits:

  * mlxtend (PyPI): 5000 training digits, raw u8 pixels, CSV.
  * mnist (npm):    10000 digits, pixels/255 rounded to 3 decimals.

The first becomes train-*-idx*-ubyte, the second t10k-*-idx*-ubyte. Any
t10k image byte-identical to a train image is dropped so the splits stay
disjoint.
"""

import argparse
import gzip
import io
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile
import zipfile


def fetch(tmp: pathlib.Path) -> tuple[pathlib.Path, pathlib.Path]:
    subprocess.run(["pip", "download", "--no-deps", "-q", "-d", str(tmp),
                    "mlxtend==0.24.0"], check=True)
    subprocess.run(["npm", "pack", "-s", "mnist@1.1.0"], cwd=tmp, check=True)
    return next(tmp.glob("mlxtend-*.whl")), next(tmp.glob("mnist-*.tgz"))


def load_mlxtend(wheel: pathlib.Path):
    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))
    images, labels = [], []
    for line in raw.decode().splitlines():
        vals = [int(float(v)) for v in line.split(",")]
        images.append(bytes(vals[:784]))
        labels.append(vals[784])
    return images, labels


def load_npm(tgz: pathlib.Path):
    images, labels = [], []
    with tarfile.open(tgz) as t:
        for digit in range(10):
            f = t.extractfile(f"package/src/digits/{digit}.json")
            data = json.load(f)["data"]
            assert len(data) % 784 == 0
            for i in range(0, len(data), 784):
                images.append(bytes(round(v * 255) for v in data[i:i + 784]))
                labels.append(digit)
    return images, labels


def write_idx(out: pathlib.Path, prefix: str, images, labels):
    with open(out / f"{prefix}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(img)
    with open(out / f"{prefix}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/mnist")
    ap.add_argument("--mlxtend-wheel")
    ap.add_argument("--mnist-tgz")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as d:
        wheel, tgz = (pathlib.Path(args.mlxtend_wheel), pathlib.Path(args.mnist_tgz)) \
            if args.mlxtend_wheel and args.mnist_tgz else fetch(pathlib.Path(d))
        train_x, train_y = load_mlxtend(wheel)
        test_x, test_y = load_npm(tgz)

    seen = set(train_x)
    keep = [i for i, img in enumerate(test_x) if img not in seen]
    test_x = [test_x[i] for i in keep]
    test_y = [test_y[i] for i in keep]

    write_idx(out, "train", train_x, train_y)
    write_idx(out, "t10k", test_x, test_y)
    print(f"train: {len(train_x)}  t10k: {len(test_x)} -> {out}")


if __name__ == "__main__":
    main()
