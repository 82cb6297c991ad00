"""Bayesian AMP decoder for the error vector.

Given the syndrome ``h = F @ y_tilde = F @ e``, the decoder iterates the
mean/variance message updates with the two-Gaussian denoiser until the
mean estimates stop moving, then subtracts the estimated error from the
received codeword and applies the pseudoinverse of ``A``.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from secc.coding import pinv_decode
from secc.errors import ConfigurationError, DivergenceError
from secc.prior import denoise


@dataclass(frozen=True)
class AmpOptions:
    max_iter: int = 1000
    tol: float = 1e-8
    damping: float = 0.0
    v_floor: float = 1e-12

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be > 0")
        if not 0 <= self.damping < 1:
            raise ConfigurationError("damping must lie in [0, 1)")


@dataclass
class AmpState:
    a: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    V: np.ndarray
    t: int = 0


@dataclass
class DecodeReport:
    e_hat: np.ndarray
    iterations: int
    converged: bool
    final_change: float
    mse: Optional[float] = None
    mse_history: List[float] = field(default_factory=list)

    def summary(self):
        out = {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_change": self.final_change,
        }
        if self.mse is not None:
            out["mse"] = self.mse
        return out


def amp_init(h, prior, M, F_sq=None):
    """Initial state: zero means, prior variances, ``omega = h``.

    ``V`` is seeded with ``F_sq @ v`` so the first Onsager term is ``0 / V``.
    Without ``F_sq`` it falls back to the homogeneous value ``rho + eps``.
    """
    h = np.asarray(h, dtype=float)
    v = np.full(M, prior.variance)
    V = F_sq @ v if F_sq is not None else np.full(h.shape, prior.variance)
    return AmpState(a=np.zeros(M), v=v, omega=h.copy(), V=V, t=0)


def amp_step(state, F, F_sq, h, prior, opts=AmpOptions()):
    """One sweep of the message updates; returns a new state."""
    floor = opts.v_floor
    V_old = np.maximum(state.V, floor)

    V = F_sq @ state.v
    omega = F @ state.a - (h - state.omega) / V_old * V
    V_use = np.maximum(V, floor)
    sigma2 = 1.0 / (F_sq.T @ (1.0 / V_use))
    sigma2 = np.maximum(sigma2, floor)
    r = state.a + sigma2 * (F.T @ ((h - omega) / V_use))

    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(sigma2))):
        raise DivergenceError(state.t + 1)
    a, v = denoise(prior, sigma2, r)
    if opts.damping:
        beta = opts.damping
        a = (1 - beta) * a + beta * state.a
        v = (1 - beta) * v + beta * state.v
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(v))):
        raise DivergenceError(state.t + 1)
    return AmpState(a=a, v=v, omega=omega, V=V, t=state.t + 1)


def amp_decode(F, h, prior, opts=AmpOptions(), truth=None, F_sq=None):
    """Iterate until the mean absolute change of ``a`` drops below ``opts.tol``.

    Non-convergence is reported, not raised. When ``truth`` is given the
    per-iteration MSE (starting at t=0) is recorded for diagnostics.
    """
    F = np.asarray(F, dtype=float)
    h = np.asarray(h, dtype=float)
    P, M = F.shape
    if h.shape != (P,):
        raise ConfigurationError(f"syndrome must have shape ({P},), got {h.shape}")
    if F_sq is None:
        F_sq = F * F
    state = amp_init(h, prior, M, F_sq)
    history = []
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        history.append(float(np.mean((state.a - truth) ** 2)))

    change = np.inf
    converged = False
    for _ in range(opts.max_iter):
        new = amp_step(state, F, F_sq, h, prior, opts)
        change = float(np.mean(np.abs(new.a - state.a)))
        state = new
        if truth is not None:
            history.append(float(np.mean((state.a - truth) ** 2)))
        if change < opts.tol:
            converged = True
            break

    mse = history[-1] if truth is not None else None
    return DecodeReport(
        e_hat=state.a,
        iterations=state.t,
        converged=converged,
        final_change=change,
        mse=mse,
        mse_history=history,
    )


def decode_signal(pair, y_tilde, prior, opts=AmpOptions(), e_truth=None):
    """Estimate the error with AMP, remove it and project back to the signal."""
    y_tilde = np.asarray(y_tilde, dtype=float)
    h = pair.F @ y_tilde
    report = amp_decode(pair.F, h, prior, opts, truth=e_truth)
    x_hat = pinv_decode(pair, y_tilde - report.e_hat)
    return x_hat, report
