"""l1 decoding baseline: basis pursuit by ADMM followed by least-squares reprojection.

The solve uses no knowledge of the channel statistics.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from secc.coding import pinv_decode
from secc.errors import ConfigurationError


@dataclass(frozen=True)
class L1Options:
    max_iter: int = 5000
    tol: float = 1e-9
    support_threshold: float = 1e-3
    penalty: float = 1.0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be > 0")
        if not 0 < self.support_threshold < 1:
            raise ConfigurationError("support_threshold must lie in (0, 1)")
        if not self.penalty > 0:
            raise ConfigurationError("penalty must be > 0")


@dataclass
class L1Report:
    e_hat: np.ndarray
    e_bp: np.ndarray
    iterations: int
    converged: bool
    reprojected: bool
    support: np.ndarray

    def summary(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "reprojected": self.reprojected,
            "support_size": int(self.support.size),
        }


def _soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def basis_pursuit(F, h, opts=L1Options()):
    """Solve ``min ||e||_1 s.t. F e = h``.

    Returns ``(e, iterations, converged)``; ``e`` is the projected iterate,
    so it is feasible up to the accuracy of the cached Cholesky solve.
    """
    P, M = F.shape
    chol = scipy.linalg.cho_factor(F @ F.T)

    def project(v):
        return v - F.T @ scipy.linalg.cho_solve(chol, F @ v - h)

    x = project(np.zeros(M))
    z = x.copy()
    u = np.zeros(M)
    lam = 1.0 / opts.penalty
    converged = False
    k = 0
    for k in range(1, opts.max_iter + 1):
        x = project(z - u)
        z_old = z
        z = _soft(x + u, lam)
        u += x - z
        r_pri = np.linalg.norm(x - z)
        r_dual = opts.penalty * np.linalg.norm(z - z_old)
        scale = max(np.linalg.norm(x), np.linalg.norm(z), 1e-300)
        if r_pri <= opts.tol * scale and r_dual <= opts.tol * max(opts.penalty * np.linalg.norm(u), 1e-300):
            converged = True
            break
    return x, k, converged


def reproject(F, h, e0, threshold):
    """Least-squares refit on the support of ``e0``.

    Returns ``(e, support, ok)``; ``ok`` is False when the restricted system
    is not full column rank, in which case ``e0`` is returned unchanged.
    """
    peak = np.max(np.abs(e0)) if e0.size else 0.0
    if peak == 0:
        return np.zeros_like(e0), np.array([], dtype=np.int64), True
    support = np.flatnonzero(np.abs(e0) > threshold * peak)
    F_S = F[:, support]
    if support.size > F.shape[0]:
        return e0, support, False
    coef, _, rank, _ = np.linalg.lstsq(F_S, h, rcond=None)
    if rank < support.size:
        return e0, support, False
    e = np.zeros_like(e0)
    e[support] = coef
    return e, support, True


def l1_decode(F, h, opts=L1Options()):
    F = np.asarray(F, dtype=float)
    h = np.asarray(h, dtype=float)
    if h.shape != (F.shape[0],):
        raise ConfigurationError(f"syndrome must have shape ({F.shape[0]},), got {h.shape}")
    if not np.any(h):
        z = np.zeros(F.shape[1])
        return L1Report(z, z.copy(), 0, True, False, np.array([], dtype=np.int64))
    e0, iters, converged = basis_pursuit(F, h, opts)
    e, support, ok = reproject(F, h, e0, opts.support_threshold)
    return L1Report(e_hat=e, e_bp=e0, iterations=iters, converged=converged, reprojected=ok, support=support)


def l1_decode_signal(pair, y_tilde, opts=L1Options()):
    y_tilde = np.asarray(y_tilde, dtype=float)
    report = l1_decode(pair.F, pair.F @ y_tilde, opts)
    return pinv_decode(pair, y_tilde - report.e_hat), report
