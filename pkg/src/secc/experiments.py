"""Monte-Carlo harness: success-rate sweeps, robustness histograms, image demo.

Every instance draws a fresh code, signal and channel realization from its
own seed, derived from the master seed and the instance index (see
:mod:`secc.seeding`). Instances with the same index share that seed across
sweep points, so neighbouring rates and sizes are compared on common draws.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from typing import Optional, Tuple

import numpy as np
from threadpoolctl import threadpool_limits

from secc.amp import AmpOptions, decode_signal
from secc.channel import corrupt, gaussian_signal, robustness_ratio
from secc.coding import SeedSpec, encode, homogeneous_profile, make_code, pinv_decode, seeded_profile
from secc.errors import ConfigurationError, DivergenceError
from secc.l1 import L1Options, l1_decode_signal
from secc.prior import TwoGaussPrior
from secc.seeding import SPLIT_RULE, instance_seed, substreams

METHODS = ("amp", "l1", "both")
_FIXED_MATRIX_TAG = 0xF1ED


@dataclass(frozen=True)
class ExperimentConfig:
    N: int = 256
    rates: Tuple[float, ...] = (0.5,)
    sizes: Tuple[int, ...] = ()
    rho: float = 0.1
    eps: float = 1e-6
    instances: int = 500
    seed: int = 0
    method: str = "amp"
    success_threshold: float = 1e-5
    seed_spec: Optional[SeedSpec] = None
    fixed_matrix: bool = False
    amp: AmpOptions = field(default_factory=AmpOptions)
    l1: L1Options = field(default_factory=L1Options)
    threads: int = 1

    def __post_init__(self):
        if self.instances < 1:
            raise ConfigurationError("instance count must be >= 1")
        if not self.success_threshold > 0:
            raise ConfigurationError("success threshold must be > 0")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")
        object.__setattr__(self, "rates", tuple(float(r) for r in np.atleast_1d(self.rates)))
        object.__setattr__(self, "sizes", tuple(int(n) for n in np.atleast_1d(self.sizes)) if len(np.atleast_1d(self.sizes)) else ())
        if not self.rates:
            raise ConfigurationError("at least one coding rate is required")
        self.prior  # validates rho, eps
        for N in self.size_list:
            for R in self.rates:
                self.profile(N, R)

    @property
    def prior(self):
        return TwoGaussPrior(self.rho, self.eps)

    @property
    def size_list(self):
        return self.sizes or (self.N,)

    @property
    def decoders(self):
        return ("amp", "l1") if self.method == "both" else (self.method,)

    def profile(self, N, rate):
        if not 0 < rate < 1:
            raise ConfigurationError(f"coding rate must lie in (0, 1), got {rate}")
        M = int(round(N / rate))
        if M <= N:
            raise ConfigurationError(f"N={N}, R={rate} leaves no redundancy")
        if self.seed_spec is None:
            return homogeneous_profile((M - N) / M, M)
        return seeded_profile(self.seed_spec.with_alpha((M - N) / M), M, rows=M - N)

    def to_dict(self):
        d = asdict(self)
        del d["threads"]  # output must not depend on parallelism
        d["split_rule"] = SPLIT_RULE
        return d

    @classmethod
    def from_mapping(cls, cfg, **overrides):
        """Build from a flat key-value mapping (as read by ``secc.io.read_config``)."""
        cfg = {**cfg, **{k: v for k, v in overrides.items() if v is not None}}
        known = {
            "N", "rates", "rate", "sizes", "rho", "eps", "instances", "seed", "method",
            "success_threshold", "fixed_matrix", "threads", "L", "W", "J", "alpha_seed",
            "alpha_bulk", "max_iter", "tol", "damping", "l1_max_iter", "l1_tol",
            "support_threshold", "alpha", "M", "patch",
        }
        unknown = set(cfg) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        for key in ("N", "rho", "eps", "instances", "seed", "method", "success_threshold",
                    "fixed_matrix", "threads"):
            if key in cfg:
                kw[key] = cfg[key]
        if "rates" in cfg or "rate" in cfg:
            kw["rates"] = tuple(np.atleast_1d(cfg.get("rates", cfg.get("rate"))))
        if "sizes" in cfg:
            kw["sizes"] = tuple(np.atleast_1d(cfg["sizes"]))
        spec = spec_from_mapping(cfg)
        if spec is not None:
            kw["seed_spec"] = spec
            if "rates" not in kw:
                kw["rates"] = (spec.rate,)
        kw["amp"] = AmpOptions(
            max_iter=int(cfg.get("max_iter", 1000)),
            tol=float(cfg.get("tol", 1e-8)),
            damping=float(cfg.get("damping", 0.0)),
        )
        kw["l1"] = L1Options(
            max_iter=int(cfg.get("l1_max_iter", 5000)),
            tol=float(cfg.get("l1_tol", 1e-9)),
            support_threshold=float(cfg.get("support_threshold", 1e-3)),
        )
        return cls(**kw)


def spec_from_mapping(cfg):
    keys = ("L", "W", "J", "alpha_seed", "alpha_bulk")
    present = [k for k in keys if k in cfg]
    if not present:
        return None
    if len(present) != len(keys):
        raise ConfigurationError(f"seeded profile needs all of {keys}; missing {sorted(set(keys) - set(present))}")
    return SeedSpec(int(cfg["L"]), int(cfg["W"]), float(cfg["J"]), float(cfg["alpha_seed"]), float(cfg["alpha_bulk"]))


@dataclass
class InstanceRecord:
    N: int
    rate: float
    M: int
    decoder: str
    index: int
    instance_seed: int
    iterations: int
    converged: bool
    mse: float
    rho_ideal: float
    status: str
    wall_time: float = 0.0

    HEADER = ("N", "rate", "M", "decoder", "index", "instance_seed", "iterations",
              "converged", "mse", "rho_ideal", "status")

    def row(self, timing=False):
        out = [getattr(self, k) for k in self.HEADER]
        return out + [self.wall_time] if timing else out


def _matrix_seed(cfg, iseed):
    if cfg.fixed_matrix:
        return np.random.SeedSequence(cfg.seed, spawn_key=(_FIXED_MATRIX_TAG,))
    return substreams(iseed, 3)[0]


def run_instance(cfg, N, rate, index):
    """Encode, corrupt and decode one instance with every selected decoder.

    All decoders see the same code, signal and channel draw.
    """
    iseed = instance_seed(cfg.seed, index)
    _, s_sig, s_chan = substreams(iseed, 3)
    profile = cfg.profile(N, rate)
    pair = make_code(profile, _matrix_seed(cfg, iseed))
    x = gaussian_signal(N, s_sig)
    draw = corrupt(encode(pair, x), cfg.prior, s_chan)
    x_ideal = pinv_decode(pair, draw.y_ideal)
    ideal_err = np.linalg.norm(x_ideal - x)

    records = []
    for dec in cfg.decoders:
        t0 = time.perf_counter()
        status = "ok"
        try:
            if dec == "amp":
                x_hat, rep = decode_signal(pair, draw.y_tilde, cfg.prior, cfg.amp)
            else:
                x_hat, rep = l1_decode_signal(pair, draw.y_tilde, cfg.l1)
            iters, conv = rep.iterations, rep.converged
            mse = float(np.mean((x_hat - x) ** 2))
            ratio = float(robustness_ratio(x_hat, x_ideal, x)) if ideal_err > 0 else math.nan
            if not np.isfinite(mse):
                status = "failed"
        except DivergenceError as exc:
            iters, conv, mse, ratio, status = exc.iteration, False, math.nan, math.nan, "diverged"
        records.append(InstanceRecord(N, rate, profile.M, dec, index, iseed, iters, conv, mse, ratio,
                                      status, time.perf_counter() - t0))
    return records


def _task(cfg, job):
    N, rate, index = job
    with threadpool_limits(1):
        return run_instance(cfg, N, rate, index)


def run_jobs(cfg, jobs):
    """Run ``(N, rate, index)`` jobs; output order never depends on ``threads``."""
    fn = partial(_task, cfg)
    if cfg.threads == 1:
        results = [fn(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * cfg.threads))))
    return [rec for recs in results for rec in recs]


def wilson_interval(successes, n, z=1.959963984540054):
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    # At k = 0 or k = n one bound is exactly 0 or 1; avoid rounding drift.
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


SWEEP_HEADER = ("N", "rate", "decoder", "instances", "successes", "success_rate", "wilson_lo", "wilson_hi")


def is_success(rec, threshold):
    return rec.status == "ok" and rec.mse < threshold


def summarize_sweep(cfg, records):
    rows = []
    for N in cfg.size_list:
        for R in cfg.rates:
            for dec in cfg.decoders:
                sel = [r for r in records if r.N == N and r.rate == R and r.decoder == dec]
                k = sum(is_success(r, cfg.success_threshold) for r in sel)
                lo, hi = wilson_interval(k, len(sel))
                rows.append((N, R, dec, len(sel), k, k / len(sel), lo, hi))
    return rows


def run_sweep(cfg):
    """Success rates per (N, R, decoder); returns ``(summary_rows, records)``."""
    jobs = [(N, R, i) for N in cfg.size_list for R in cfg.rates for i in range(cfg.instances)]
    records = run_jobs(cfg, jobs)
    return summarize_sweep(cfg, records), records


def run_histogram(cfg):
    """Robustness ratios for every instance and decoder at the first (N, R) point.

    Returns ``(records, summary)`` where ``summary`` maps decoder to
    ``(mean, std)`` of the finite ratios.
    """
    if cfg.eps <= 0:
        raise ConfigurationError(
            "the robustness ratio is undefined for eps = 0 (the ideal reconstruction is exact); "
            "use the sweep command and its MSE-based success rates instead"
        )
    N, R = cfg.size_list[0], cfg.rates[0]
    records = run_jobs(cfg, [(N, R, i) for i in range(cfg.instances)])
    summary = {}
    for dec in cfg.decoders:
        vals = np.array([r.rho_ideal for r in records if r.decoder == dec and r.status == "ok"])
        vals = vals[np.isfinite(vals)]
        summary[dec] = (float(vals.mean()), float(vals.std())) if vals.size else (math.nan, math.nan)
    return records, summary


@dataclass
class PatchRecord:
    index: int
    row: int
    col: int
    mean: float
    std: float
    mse: float
    naive_mse: float
    iterations: int
    converged: bool
    status: str

    HEADER = ("index", "row", "col", "mean", "std", "mse", "naive_mse", "iterations", "converged", "status")

    def as_row(self):
        return [getattr(self, k) for k in self.HEADER]


@dataclass
class ImageDemoResult:
    reconstructed: np.ndarray
    naive: np.ndarray
    records: list
    rate: float
    M: int


def run_image_demo(image, cfg, patch=64, noiseless=False):
    """Split ``image`` into ``patch x patch`` tiles and send each through the code.

    Tiles are standardized to zero mean and unit variance before encoding and
    mapped back afterwards; constant tiles skip the channel and are restored
    from their recorded mean. One code is shared by all tiles; each tile gets
    its own channel draw. MSE columns are in standardized units.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ConfigurationError("image must be a 2-d grayscale array")
    H, W = image.shape
    if H % patch or W % patch:
        raise ConfigurationError(f"image size {W}x{H} is not divisible by the patch side {patch}")
    if cfg.method == "both":
        raise ConfigurationError("image demo takes a single decoder (amp or l1)")
    N = patch * patch
    rate = cfg.rates[0]
    profile = cfg.profile(N, rate)
    with threadpool_limits(1):
        pair = make_code(profile, np.random.SeedSequence(cfg.seed, spawn_key=(_FIXED_MATRIX_TAG,)))
    recon = np.empty_like(image)
    naive = np.empty_like(image)
    records = []
    k = 0
    for r0 in range(0, H, patch):
        for c0 in range(0, W, patch):
            tile = image[r0:r0 + patch, c0:c0 + patch]
            mu, sd = float(tile.mean()), float(tile.std())
            if sd == 0:
                recon[r0:r0 + patch, c0:c0 + patch] = mu
                naive[r0:r0 + patch, c0:c0 + patch] = mu
                records.append(PatchRecord(k, r0, c0, mu, sd, 0.0, 0.0, 0, True, "constant"))
                k += 1
                continue
            x = (tile.ravel() - mu) / sd
            y = encode(pair, x)
            if noiseless:
                y_tilde = y
            else:
                y_tilde = corrupt(y, cfg.prior, instance_seed(cfg.seed, k)).y_tilde
            status = "ok"
            with threadpool_limits(1):
                try:
                    if cfg.method == "amp":
                        x_hat, rep = decode_signal(pair, y_tilde, cfg.prior, cfg.amp)
                    else:
                        x_hat, rep = l1_decode_signal(pair, y_tilde, cfg.l1)
                    iters, conv = rep.iterations, rep.converged
                except DivergenceError as exc:
                    x_hat, iters, conv, status = pinv_decode(pair, y_tilde), exc.iteration, False, "diverged"
            x_naive = pinv_decode(pair, y_tilde)
            recon[r0:r0 + patch, c0:c0 + patch] = (x_hat * sd + mu).reshape(patch, patch)
            naive[r0:r0 + patch, c0:c0 + patch] = (x_naive * sd + mu).reshape(patch, patch)
            records.append(PatchRecord(k, r0, c0, mu, sd, float(np.mean((x_hat - x) ** 2)),
                                       float(np.mean((x_naive - x) ** 2)), iters, conv, status))
            k += 1
    return ImageDemoResult(recon, naive, records, profile.rate, profile.M)


def with_overrides(cfg, **kw):
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
