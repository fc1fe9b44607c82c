#!/usr/bin/env python3
"""Build the 1000-image MNIST subset (100 images per digit, 28x28) as IDX files.

Source: the `mnist` npm package (https://www.npmjs.com/package/mnist), which
bundles normalized 28x28 MNIST digit images as JSON arrays. Run:

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_mnist_subset.py package/src/digits data/

Pixel values are re-quantized to unsigned bytes (round(v * 255)), so loading
the IDX files yields values in [0, 1] after the standard /255 scaling.
"""

import json
import os
import struct
import sys

PER_DIGIT = 100
ROWS = COLS = 28


def main(src_dir: str, out_dir: str) -> None:
    images = []
    labels = []
    for digit in range(10):
        with open(os.path.join(src_dir, f"{digit}.json")) as f:
            data = json.load(f)["data"]
        n = len(data) // (ROWS * COLS)
        if n < PER_DIGIT:
            raise SystemExit(f"digit {digit}: only {n} images available")
        for i in range(PER_DIGIT):
            px = data[i * ROWS * COLS : (i + 1) * ROWS * COLS]
            images.append(bytes(min(255, max(0, round(v * 255))) for v in px))
            labels.append(digit)

    os.makedirs(out_dir, exist_ok=True)
    img_path = os.path.join(out_dir, "mnist1000-images-idx3-ubyte")
    lab_path = os.path.join(out_dir, "mnist1000-labels-idx1-ubyte")
    with open(img_path, "wb") as f:
        f.write(struct.pack(">iiii", 0x803, len(images), ROWS, COLS))
        for img in images:
            f.write(img)
    with open(lab_path, "wb") as f:
        f.write(struct.pack(">ii", 0x801, len(labels)))
        f.write(bytes(labels))
    print(f"wrote {img_path} ({len(images)} images) and {lab_path}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    main(sys.argv[1], sys.argv[2])
