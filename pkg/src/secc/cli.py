"""Command-line entry point ``secc``.

Exit codes: 0 on success, 2 on configuration or input errors, 3 on a
numerical failure (decoder divergence) when ``--strict`` is given.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from secc import io
from secc.amp import AmpOptions, amp_decode
from secc.channel import corrupt, gaussian_signal
from secc.coding import SeedSpec, encode, homogeneous_profile, make_code, pinv_decode, seeded_profile
from secc.errors import BracketError, ConfigurationError, DivergenceError, RankError
from secc.experiments import (
    SWEEP_HEADER,
    ExperimentConfig,
    InstanceRecord,
    PatchRecord,
    run_histogram,
    run_image_demo,
    run_sweep,
    spec_from_mapping,
)
from secc.l1 import L1Options, l1_decode
from secc.prior import TwoGaussPrior
from secc.se import (
    coupling_from_profile,
    coupling_from_spec,
    phase_boundary,
    scalar_coupling,
    se_run_coupled,
)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULT_SEEDING = SeedSpec(L=10, W=3, J=0.2, alpha_seed=0.22, alpha_bulk=0.1830)


class StrictFailure(Exception):
    pass


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer: {v}")
    return v


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load_cfg(args):
    return io.read_config(args.config) if getattr(args, "config", None) else {}


def _emit_csv(args, header, rows, config=None):
    if args.out:
        io.write_csv(args.out, header, rows, config)
    else:
        io.write_csv(sys.stdout, header, rows, config)


def _prior(args, cfg):
    rho = args.rho if args.rho is not None else cfg.get("rho", 0.1)
    eps = args.eps if args.eps is not None else cfg.get("eps", 1e-6)
    return TwoGaussPrior(float(rho), float(eps))


def _profile(args, cfg):
    """Code profile from flags and config: seeded when the seeding keys are present."""
    spec = spec_from_mapping(cfg)
    M = args.M if args.M is not None else cfg.get("M")
    N = args.N if args.N is not None else cfg.get("N")
    rate = args.rate if args.rate is not None else cfg.get("rate")
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if M is None:
        if N is None:
            raise ConfigurationError("give M, or N together with a rate")
        r = rate if rate is not None else (1 - alpha if alpha is not None else (spec.rate if spec else None))
        if r is None:
            raise ConfigurationError("no coding rate: set rate, alpha or a seeding profile")
        M = int(round(int(N) / float(r)))
    M = int(M)
    if N is not None:
        rows = M - int(N)
    elif rate is not None:
        rows = M - int(round(float(rate) * M))
    elif alpha is not None:
        rows = int(round(float(alpha) * M))
    else:
        rows = None
    if spec is not None:
        if rows is not None:
            spec = spec.with_alpha(rows / M)
        return seeded_profile(spec, M, rows=rows)
    if rows is None:
        raise ConfigurationError("homogeneous code needs alpha, rate or N")
    return homogeneous_profile(rows / M, M)


# ---------------------------------------------------------------- plumbing

def cmd_codegen(args):
    cfg = _load_cfg(args)
    profile = _profile(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    pair = make_code(profile, seed)
    if not args.out:
        raise ConfigurationError("codegen needs --out")
    io.save_code(args.out, pair)
    print(json.dumps({"M": pair.M, "N": pair.N, "P": profile.P, "rate": pair.rate,
                      "alpha": profile.alpha, "L_r": profile.L_r, "L_c": profile.L_c, "seed": seed}))


def cmd_encode(args):
    pair = io.load_code(args.code)
    if args.input:
        x = io.load_vector(args.input)
    else:
        seed = args.seed if args.seed is not None else 0
        x = gaussian_signal(pair.N, seed)
        if args.signal_out:
            io.save_vector(args.signal_out, x)
    if not args.out:
        raise ConfigurationError("encode needs --out")
    io.save_vector(args.out, encode(pair, x))


def cmd_corrupt(args):
    cfg = _load_cfg(args)
    prior = _prior(args, cfg)
    y = io.load_vector(args.input)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    draw = corrupt(y, prior, seed)
    if not args.out:
        raise ConfigurationError("corrupt needs --out")
    io.save_vector(args.out, draw.y_tilde)
    if args.error_out:
        io.save_vector(args.error_out, draw.e)
    if args.ideal_out:
        io.save_vector(args.ideal_out, draw.y_ideal)


def _method_path(base, method, multi):
    if not multi:
        return base
    p = Path(base)
    return str(p.with_name(f"{p.stem}.{method}{p.suffix}"))


def cmd_decode(args):
    cfg = _load_cfg(args)
    prior = _prior(args, cfg)
    pair = io.load_code(args.code)
    y_tilde = io.load_vector(args.input)
    if y_tilde.shape != (pair.M,):
        raise ConfigurationError(f"received vector has length {y_tilde.size}, code expects {pair.M}")
    truth = io.load_vector(args.truth) if args.truth else None
    if truth is not None and truth.shape != (pair.N,):
        raise ConfigurationError(f"truth has length {truth.size}, code expects {pair.N}")
    ideal = io.load_vector(args.ideal) if args.ideal else None
    if ideal is not None and ideal.shape != (pair.M,):
        raise ConfigurationError(f"ideal codeword has length {ideal.size}, code expects {pair.M}")
    amp_opts = AmpOptions(max_iter=int(cfg.get("max_iter", 1000)), tol=float(cfg.get("tol", 1e-8)),
                          damping=float(cfg.get("damping", 0.0)))
    l1_opts = L1Options(max_iter=int(cfg.get("l1_max_iter", 5000)), tol=float(cfg.get("l1_tol", 1e-9)),
                        support_threshold=float(cfg.get("support_threshold", 1e-3)))
    methods = ("amp", "l1") if args.method == "both" else (args.method,)
    h = pair.F @ y_tilde
    failed = False
    for method in methods:
        record = {"method": method}
        try:
            if method == "amp":
                rep = amp_decode(pair.F, h, prior, amp_opts)
            else:
                rep = l1_decode(pair.F, h, l1_opts)
            x_hat = pinv_decode(pair, y_tilde - rep.e_hat)
            record.update(rep.summary())
            record["status"] = "ok"
        except DivergenceError as exc:
            failed = True
            x_hat = None
            record.update({"iterations": exc.iteration, "converged": False, "status": "diverged"})
        if x_hat is not None:
            if truth is not None:
                record["mse"] = float(np.mean((x_hat - truth) ** 2))
                if ideal is not None:
                    den = np.linalg.norm(pinv_decode(pair, ideal) - truth)
                    record["rho_ideal"] = float(np.linalg.norm(x_hat - truth) / den) if den > 0 else None
            if args.out:
                io.save_vector(_method_path(args.out, method, len(methods) > 1), x_hat)
        print(json.dumps(record))
    if failed and args.strict:
        raise StrictFailure("decoder diverged")


# ------------------------------------------------------------- experiments

def _experiment_config(args):
    cfg = _load_cfg(args)
    over = {
        "N": args.N, "rates": args.rates, "sizes": args.sizes, "rho": args.rho, "eps": args.eps,
        "instances": args.instances, "seed": args.seed, "method": args.method,
        "threads": args.threads,
    }
    if getattr(args, "fixed_matrix", False):
        over["fixed_matrix"] = True
    if getattr(args, "seeded", False) and spec_from_mapping(cfg) is None:
        cfg = {**cfg, **{k: getattr(DEFAULT_SEEDING, k) for k in ("L", "W", "J", "alpha_seed", "alpha_bulk")}}
    return ExperimentConfig.from_mapping(cfg, **over)


def _records_path(out):
    p = Path(out)
    return str(p.with_name(f"{p.stem}.records{p.suffix or '.csv'}"))


def _check_strict(args, records):
    if args.strict and any(r.status == "diverged" for r in records):
        raise StrictFailure("at least one instance diverged")


def cmd_sweep(args):
    cfg = _experiment_config(args)
    rows, records = run_sweep(cfg)
    meta = cfg.to_dict()
    _emit_csv(args, SWEEP_HEADER, rows, meta)
    if args.out:
        header = InstanceRecord.HEADER + (("wall_time",) if args.timing else ())
        io.write_csv(_records_path(args.out), header, [r.row(args.timing) for r in records], meta)
    _check_strict(args, records)


HIST_HEADER = ("kind", "decoder", "index", "instance_seed", "iterations", "converged", "mse", "rho_ideal", "status")


def cmd_histogram(args):
    cfg = _experiment_config(args)
    records, summary = run_histogram(cfg)
    rows = [("instance", r.decoder, r.index, r.instance_seed, r.iterations, r.converged, r.mse,
             r.rho_ideal, r.status) for r in records]
    for dec, (mean, std) in summary.items():
        rows.append(("mean", dec, "", "", "", "", "", mean, ""))
        rows.append(("std", dec, "", "", "", "", "", std, ""))
    _emit_csv(args, HIST_HEADER, rows, cfg.to_dict())
    for dec, (mean, std) in summary.items():
        print(f"{dec}: mean rho_ideal = {mean:.4g}, std = {std:.4g}", file=sys.stderr)
    _check_strict(args, records)


def cmd_se(args):
    cfg = _load_cfg(args)
    prior = _prior(args, cfg)
    spec = spec_from_mapping(cfg)
    if args.seeded and spec is None:
        spec = DEFAULT_SEEDING
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if spec is not None:
        if alpha is not None:
            spec = spec.with_alpha(float(alpha))
        coupling = coupling_from_spec(spec)
    elif cfg.get("M") is not None and alpha is None:
        coupling = coupling_from_profile(_profile(args, cfg))
    else:
        if alpha is None:
            raise ConfigurationError("se needs --alpha or a seeding profile")
        coupling = scalar_coupling(float(alpha))
    max_iter = args.max_iter or int(cfg.get("max_iter", 10_000 if spec is None else 100_000))
    res = se_run_coupled(coupling, prior, tol=float(cfg.get("tol", 1e-10)), max_iter=max_iter, record=True)
    L_c = coupling.col_frac.size
    header = ("t",) + tuple(f"E_{p + 1}" for p in range(L_c))
    rows = [(t,) + tuple(float(v) for v in E) for t, E in enumerate(res.trajectory)]
    meta = {"rho": prior.rho, "eps": prior.eps, "alpha": coupling.alpha,
            "seed_spec": None if spec is None else spec.__dict__, "converged": res.converged}
    _emit_csv(args, header, rows, meta)


def cmd_phase(args):
    cfg = _load_cfg(args)
    eps = args.eps if args.eps is not None else float(cfg.get("eps", 0.0))
    grid = args.rho_grid or list(np.atleast_1d(cfg.get("rho_grid", [0.05, 0.1, 0.15, 0.2, 0.25, 0.3])))
    L = int(cfg.get("L", 20))
    W = int(cfg.get("W", 3))
    J = float(cfg.get("J", 0.2))
    seed_boost = float(cfg.get("seed_boost", 1.2))
    tol = float(cfg.get("tol_alpha", 1e-3))
    rows = []
    for rho in grid:
        prior = TwoGaussPrior(float(rho), eps)
        try:
            a_amp = phase_boundary(prior, bracket=(rho * 1.0001, 0.999), tol_alpha=tol)
        except BracketError:
            a_amp = math.nan
        a_seed = math.nan
        if np.isfinite(a_amp):
            alpha_seed = min(seed_boost * a_amp, 0.999)
            spec = SeedSpec(L=L, W=W, J=J, alpha_seed=alpha_seed, alpha_bulk=0.5 * a_amp)
            lo = max(rho * 1.0001, alpha_seed / spec.L_c + 1e-6)
            try:
                a_seed = phase_boundary(prior, bracket=(lo, a_amp), tol_alpha=tol, seed_spec=spec)
            except (BracketError, ConfigurationError):
                a_seed = math.nan
        rows.append((float(rho), 1 - a_amp, 1 - rho, 1 - a_seed))
        print(f"rho={rho}: R_amp={1 - a_amp:.4f} R_opt={1 - rho:.4f} R_bayes_seeded={1 - a_seed:.4f}",
              file=sys.stderr)
    meta = {"eps": eps, "L": L, "W": W, "J": J, "seed_boost": seed_boost, "tol_alpha": tol,
            "R_bayes_seeded": "coupled recursion threshold at the given L, W, J"}
    _emit_csv(args, ("rho", "R_amp", "R_opt", "R_bayes_seeded"), rows, meta)


def cmd_image_demo(args):
    cfg_map = _load_cfg(args)
    if spec_from_mapping(cfg_map) is None and "rate" not in cfg_map and "rates" not in cfg_map \
            and args.rates is None:
        cfg_map = {**cfg_map, **{k: getattr(DEFAULT_SEEDING, k) for k in ("L", "W", "J", "alpha_seed", "alpha_bulk")}}
    cfg = ExperimentConfig.from_mapping(
        cfg_map, rates=args.rates, rho=args.rho, eps=args.eps, seed=args.seed,
        method=args.method if args.method != "both" else None, N=args.patch**2, instances=1,
    )
    try:
        image, maxval = io.read_pgm(args.image)
    except OSError as exc:
        raise ConfigurationError(f"cannot read image: {exc}") from exc
    res = run_image_demo(image, cfg, patch=args.patch, noiseless=args.noiseless)
    out = Path(args.out or "demo")
    io.write_pgm(str(out) + ".recon.pgm", res.reconstructed, maxval)
    io.write_pgm(str(out) + ".naive.pgm", res.naive, maxval)
    meta = {**cfg.to_dict(), "patch": args.patch, "noiseless": args.noiseless, "M": res.M,
            "realized_rate": res.rate,
            "preprocessing": "per-patch standardization; constant patches sent as their mean"}
    io.write_csv(str(out) + ".patches.csv", PatchRecord.HEADER, [r.as_row() for r in res.records], meta)
    mses = np.array([r.mse for r in res.records])
    print(json.dumps({"patches": len(res.records), "rate": res.rate, "M": res.M,
                      "median_mse": float(np.median(mses)), "frac_mse_le_1e-4": float(np.mean(mses <= 1e-4))}))
    _check_strict(args, res.records)


# ------------------------------------------------------------------ parser

def build_parser():
    parser = argparse.ArgumentParser(prog="secc", description="Real-valued error correction with AMP decoding.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method=True):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=_u64)
        p.add_argument("--out")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--strict", action="store_true", help="exit 3 if any decode diverges")
        if method:
            p.add_argument("--method", choices=("amp", "l1", "both"), default=None)

    def prior_flags(p):
        p.add_argument("--rho", type=float)
        p.add_argument("--eps", type=float)

    def size_flags(p):
        p.add_argument("--M", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--rate", type=float)
        p.add_argument("--alpha", type=float)

    p = sub.add_parser("codegen", help="sample F and build A with F A = 0")
    common(p, method=False)
    size_flags(p)
    p.set_defaults(func=cmd_codegen)

    p = sub.add_parser("encode", help="y = A x")
    common(p, method=False)
    p.add_argument("--code", required=True)
    p.add_argument("--in", dest="input", help="signal vector (default: Gaussian draw from --seed)")
    p.add_argument("--signal-out", help="where to save a drawn signal")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("corrupt", help="pass a codeword through the two-Gaussian channel")
    common(p, method=False)
    prior_flags(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--error-out")
    p.add_argument("--ideal-out", help="codeword with only the small noise added")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("decode", help="estimate the signal from a received codeword")
    common(p)
    prior_flags(p)
    p.add_argument("--code", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--truth", help="true signal, enables the MSE field")
    p.add_argument("--ideal", help="ideal received codeword, enables rho_ideal (needs --truth)")
    p.set_defaults(func=cmd_decode, method="amp")

    for name, func, helptext in (("sweep", cmd_sweep, "success rates over (N, R)"),
                                 ("histogram", cmd_histogram, "robustness ratio samples")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        prior_flags(p)
        p.add_argument("--N", type=int)
        p.add_argument("--sizes", type=_ints, help="comma-separated signal sizes")
        p.add_argument("--rates", type=_floats, help="comma-separated coding rates")
        p.add_argument("--instances", type=int)
        p.add_argument("--seeded", action="store_true", help="use the default seeding profile")
        p.add_argument("--fixed-matrix", action="store_true", help="one F for all instances")
        p.add_argument("--timing", action="store_true", help="add wall times to the records file")
        p.set_defaults(func=func)

    p = sub.add_parser("se", help="state-evolution trajectory")
    common(p, method=False)
    prior_flags(p)
    size_flags(p)
    p.add_argument("--seeded", action="store_true", help="use the default seeding profile")
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_se)

    p = sub.add_parser("phase", help="rate thresholds over a grid of rho")
    common(p, method=False)
    p.add_argument("--eps", type=float)
    p.add_argument("--rho-grid", type=_floats)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("image-demo", help="patch-wise transmission of a PGM image")
    common(p)
    prior_flags(p)
    p.add_argument("--image", required=True)
    p.add_argument("--patch", type=int, default=64)
    p.add_argument("--rates", type=_floats)
    p.add_argument("--noiseless", action="store_true")
    p.set_defaults(func=cmd_image_demo, method="amp")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        args.func(args)
    except StrictFailure as exc:
        print(f"secc: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, RankError, BracketError, OSError) as exc:
        print(f"secc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
