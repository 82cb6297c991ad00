"""Write a synthetic 8-bit grayscale test image (smooth shapes plus texture)."""

import argparse

import numpy as np

from secc.io import write_pgm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="test.pgm")
    args = ap.parse_args()
    n = args.size
    y, x = np.mgrid[0:n, 0:n] / n
    img = 90 + 60 * np.sin(6 * x) * np.cos(4 * y)
    img += 70 * ((x - 0.65) ** 2 + (y - 0.35) ** 2 < 0.03)
    img += 8 * np.random.default_rng(args.seed).standard_normal((n, n))
    img[: n // 8, : n // 8] = 128  # flat corner exercises the constant-patch path
    write_pgm(args.out, np.clip(img, 0, 255))


if __name__ == "__main__":
    main()
