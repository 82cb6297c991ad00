"""Success rate against coding rate for several signal sizes.

Homogeneous codes over a grid of rates and sizes, optionally followed by the
seeded profile at one larger size.
"""

import argparse
from pathlib import Path

import numpy as np

from secc.coding import SeedSpec
from secc.experiments import SWEEP_HEADER, ExperimentConfig, run_sweep
from secc.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="128,256,512,1024")
    ap.add_argument("--rates", default=",".join(f"{r:.2f}" for r in np.arange(0.60, 0.86, 0.02)))
    ap.add_argument("--instances", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seeded-N", type=int, default=0, help="also run the seeded profile at this size")
    ap.add_argument("--outdir", default="results/success_rates")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    sizes = tuple(int(s) for s in args.sizes.split(","))
    rates = tuple(float(r) for r in args.rates.split(","))

    cfg = ExperimentConfig(sizes=sizes, rates=rates, rho=0.1, eps=1e-6, instances=args.instances,
                           seed=args.seed, threads=args.threads)
    rows, records = run_sweep(cfg)
    write_csv(out / "homogeneous.csv", SWEEP_HEADER, rows, cfg.to_dict())
    write_csv(out / "homogeneous.records.csv", records[0].HEADER, [r.row() for r in records], cfg.to_dict())
    for row in rows:
        print(f"N={row[0]:5d} R={row[1]:.2f} success={row[5]:.3f} [{row[6]:.3f}, {row[7]:.3f}]")

    if args.seeded_N:
        spec = SeedSpec(L=10, W=3, J=0.2, alpha_seed=0.22, alpha_bulk=0.1830)
        scfg = ExperimentConfig(N=args.seeded_N, rates=rates, rho=0.1, eps=1e-6, instances=args.instances,
                                seed=args.seed, seed_spec=spec, threads=args.threads)
        srows, _ = run_sweep(scfg)
        write_csv(out / "seeded.csv", SWEEP_HEADER, srows, scfg.to_dict())
        for row in srows:
            print(f"seeded N={row[0]} R={row[1]:.2f} success={row[5]:.3f}")


if __name__ == "__main__":
    main()
