"""Robustness ratio of a decoder that is told where the gross errors are.

With the gross-error positions known, the best linear estimate of the error
from the syndrome is Gaussian conditioning with the diagonal covariance
(1 + eps on the mask, eps elsewhere). No decoder that sees only the syndrome
can beat it on average, so its mean ratio bounds what AMP and l1 can reach.
"""

import argparse

import numpy as np

from secc import TwoGaussPrior
from secc.channel import corrupt, gaussian_signal, robustness_ratio
from secc.coding import encode, homogeneous_profile, make_code, pinv_decode
from secc.seeding import instance_seed, substreams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--rate", type=float, default=0.5)
    ap.add_argument("--rho", type=float, default=0.1)
    ap.add_argument("--eps", type=float, default=1e-6)
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    prior = TwoGaussPrior(args.rho, args.eps)
    M = int(round(args.N / args.rate))
    profile = homogeneous_profile((M - args.N) / M, M)
    ratios = []
    for i in range(args.instances):
        s_mat, s_sig, s_chan = substreams(instance_seed(args.seed, i), 3)
        pair = make_code(profile, s_mat)
        x = gaussian_signal(args.N, s_sig)
        draw = corrupt(encode(pair, x), prior, s_chan)
        D = np.where(draw.mask, 1 + args.eps, args.eps)
        F = pair.F
        h = F @ draw.y_tilde
        e_hat = D * (F.T @ np.linalg.solve((F * D) @ F.T, h))
        x_hat = pinv_decode(pair, draw.y_tilde - e_hat)
        ratios.append(robustness_ratio(x_hat, pinv_decode(pair, draw.y_ideal), x))
    ratios = np.array(ratios)
    print(f"known-support estimator: mean ratio {ratios.mean():.3f}, std {ratios.std():.3f}, "
          f"min {ratios.min():.3f} over {ratios.size} instances")


if __name__ == "__main__":
    main()
