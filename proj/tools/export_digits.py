#!/usr/bin/env python3
"""Writes the scikit-learn 8x8 digits set as IDX files.

Pixel intensities 0..16 are rescaled to 0..255 bytes so the files load like
MNIST. Usage: export_digits.py OUT_DIR
"""
import struct
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits


def main() -> None:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    out.mkdir(parents=True, exist_ok=True)
    digits = load_digits()
    images = np.rint(digits.images * (255.0 / 16.0)).astype(np.uint8)
    labels = digits.target.astype(np.uint8)
    n = images.shape[0]
    with open(out / "digits8x8-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 2051, n, 8, 8))
        f.write(images.tobytes())
    with open(out / "digits8x8-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 2049, n))
        f.write(labels.tobytes())
    print(f"wrote {n} images to {out}")


if __name__ == "__main__":
    main()
