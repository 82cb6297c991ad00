"""Measurement matrices, encoding matrices and the encode/decode pair.

The parity-like matrix ``F`` is sampled first (homogeneous or block
structured); the encoding matrix ``A`` is an orthonormal basis of its kernel,
so ``F @ A == 0`` and the pseudoinverse of ``A`` is ``A.T``.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg

from secc.errors import ConfigurationError, RankError
from secc.seeding import substreams

RANK_TOL = 1e-10


@dataclass(frozen=True)
class SeedSpec:
    """Seeding-matrix parameters: ``L`` column blocks, ``L + 1`` row blocks."""

    L: int
    W: int
    J: float
    alpha_seed: float
    alpha_bulk: float

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ConfigurationError(f"L must be a positive integer, got {self.L}")
        if int(self.W) != self.W or not 0 <= self.W < self.L:
            raise ConfigurationError(f"W must satisfy 0 <= W < L, got W={self.W}, L={self.L}")
        if self.J < 0:
            raise ConfigurationError(f"J must be >= 0, got {self.J}")
        if not self.alpha_seed > self.alpha_bulk > 0:
            raise ConfigurationError(
                f"need alpha_seed > alpha_bulk > 0, got {self.alpha_seed}, {self.alpha_bulk}"
            )
        if not self.alpha < 1:
            raise ConfigurationError(f"total measurement rate {self.alpha:.4g} must be < 1")

    @property
    def L_c(self):
        return self.L

    @property
    def L_r(self):
        return self.L + 1

    @property
    def alpha(self):
        return (self.alpha_seed + (self.L_r - 1) * self.alpha_bulk) / self.L_c

    @property
    def rate(self):
        return 1.0 - self.alpha

    def with_alpha(self, alpha):
        """Same seed block, bulk rate adjusted to hit total rate ``alpha``."""
        bulk = (self.L_c * alpha - self.alpha_seed) / (self.L_r - 1)
        return replace(self, alpha_bulk=bulk)

    def coupling(self):
        """Unit-free variance multipliers ``J[q, p]`` (0-indexed blocks)."""
        q = np.arange(self.L_r)[:, None]
        p = np.arange(self.L_c)[None, :]
        d = q - p
        table = np.where((d >= 0) & (d <= self.W), 1.0, 0.0)
        table = np.where(d == -1, float(self.J), table)
        return table


@dataclass(frozen=True)
class VarianceProfile:
    block_rows: np.ndarray
    block_cols: np.ndarray
    var: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.block_rows, dtype=np.int64)
        cols = np.asarray(self.block_cols, dtype=np.int64)
        var = np.asarray(self.var, dtype=float)
        object.__setattr__(self, "block_rows", rows)
        object.__setattr__(self, "block_cols", cols)
        object.__setattr__(self, "var", var)
        if var.shape != (rows.size, cols.size):
            raise ConfigurationError(
                f"variance table shape {var.shape} does not match {rows.size}x{cols.size} blocks"
            )
        if np.any(rows < 0) or np.any(cols < 1):
            raise ConfigurationError("block sizes must be positive (rows may be empty)")
        if np.any(var < 0):
            raise ConfigurationError("block variances must be >= 0")
        measured = ((var > 0) & (rows[:, None] > 0)).any(axis=0)
        if not measured.all():
            raise ConfigurationError(f"column blocks {np.flatnonzero(~measured).tolist()} are unmeasured")

    @property
    def M(self):
        return int(self.block_cols.sum())

    @property
    def P(self):
        return int(self.block_rows.sum())

    @property
    def N(self):
        return self.M - self.P

    @property
    def alpha(self):
        """Realized measurement rate ``P / M``."""
        return self.P / self.M

    @property
    def rate(self):
        return self.N / self.M

    @property
    def L_r(self):
        return self.block_rows.size

    @property
    def L_c(self):
        return self.block_cols.size

    @property
    def coupling(self):
        """Variances in units of ``1/M``."""
        return self.var * self.M

    def row_edges(self):
        return np.concatenate([[0], np.cumsum(self.block_rows)])

    def col_edges(self):
        return np.concatenate([[0], np.cumsum(self.block_cols)])


@dataclass(frozen=True)
class CodePair:
    F: np.ndarray
    A: np.ndarray
    profile: Optional[VarianceProfile] = None

    @property
    def M(self):
        return self.A.shape[0]

    @property
    def N(self):
        return self.A.shape[1]

    @property
    def rate(self):
        return self.N / self.M


def homogeneous_profile(alpha, M):
    if not 0 < alpha < 1:
        raise ConfigurationError(f"measurement rate must lie in (0, 1), got {alpha}")
    M = int(M)
    P = int(round(alpha * M))
    if P < 1 or P >= M:
        raise ConfigurationError(f"degenerate sizes: alpha={alpha}, M={M} gives {P} rows")
    return VarianceProfile([P], [M], [[1.0 / M]])


def split_evenly(total, parts):
    """``parts`` group sizes summing to ``total``; remainder goes to the first groups."""
    base, extra = divmod(int(total), int(parts))
    return np.array([base + (1 if k < extra else 0) for k in range(parts)], dtype=np.int64)


def seeded_profile(spec, M, rows=None):
    """Block profile of the seeding matrix for a codeword of length ``M``.

    ``rows`` fixes the total number of measurements (``M - N``); by default
    it is ``round(spec.alpha * M)``. The last row block absorbs rounding.
    """
    M = int(M)
    if M < spec.L_c:
        raise ConfigurationError(f"M={M} is smaller than the number of column blocks {spec.L_c}")
    cols = split_evenly(M, spec.L_c)
    P = int(round(spec.alpha * M)) if rows is None else int(rows)
    if not 0 < P < M:
        raise ConfigurationError(f"total row count {P} must lie in (0, {M})")
    m_seed = int(round(spec.alpha_seed * M / spec.L_c))
    m_bulk = int(round(spec.alpha_bulk * M / spec.L_c))
    block_rows = [m_seed] + [m_bulk] * (spec.L_r - 2)
    last = P - sum(block_rows)
    if last < 0:
        raise ConfigurationError(f"row blocks overflow the {P} available rows")
    block_rows.append(last)
    return VarianceProfile(block_rows, cols, spec.coupling() / M)


def sample_operator(profile, seed):
    """Draw ``F`` blockwise, each block from its own substream of ``seed``."""
    children = substreams(seed, profile.L_r * profile.L_c)
    F = np.zeros((profile.P, profile.M))
    re, ce = profile.row_edges(), profile.col_edges()
    for q in range(profile.L_r):
        for p in range(profile.L_c):
            v = profile.var[q, p]
            if v == 0 or re[q] == re[q + 1]:
                continue
            block = F[re[q]:re[q + 1], ce[p]:ce[p + 1]]
            rng = np.random.default_rng(children[q * profile.L_c + p])
            if block.flags.c_contiguous:
                rng.standard_normal(out=block)
            else:
                block[...] = rng.standard_normal(block.shape)
            block *= np.sqrt(v)
    return F


def null_space_code(F, profile=None):
    """Orthonormal kernel basis of ``F`` via pivoted QR of ``F.T``."""
    F = np.asarray(F, dtype=float)
    P, M = F.shape
    if P >= M:
        raise RankError(f"F has {P} rows for {M} columns; the kernel is trivial")
    Q, Rf, _ = scipy.linalg.qr(F.T, mode="full", pivoting=True)
    diag = np.abs(np.diag(Rf))
    if diag[0] == 0 or diag[-1] < RANK_TOL * diag[0]:
        raise RankError(f"F is rank deficient (|R_min|/|R_max| = {diag[-1] / max(diag[0], 1e-300):.2e})")
    A = np.ascontiguousarray(Q[:, P:])
    # Sign convention: the largest-magnitude entry of each column is positive.
    idx = np.argmax(np.abs(A), axis=0)
    A *= np.sign(A[idx, np.arange(A.shape[1])])
    return CodePair(F=F, A=A, profile=profile)


def make_code(profile, seed):
    return null_space_code(sample_operator(profile, seed), profile=profile)


def _check_len(v, n, what):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ConfigurationError(f"{what} must have shape ({n},), got {v.shape}")
    return v


def encode(pair, x):
    return pair.A @ _check_len(x, pair.N, "signal")


def pinv_decode(pair, y):
    return pair.A.T @ _check_len(y, pair.M, "codeword")
