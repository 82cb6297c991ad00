"""Test signals, the gross-plus-small-noise channel, and the robustness ratio."""

from dataclasses import dataclass

import numpy as np

from secc.errors import ConfigurationError, DomainError
from secc.seeding import rng


@dataclass(frozen=True)
class ChannelDraw:
    e: np.ndarray
    mask: np.ndarray
    n: np.ndarray
    y_tilde: np.ndarray
    y_ideal: np.ndarray


def gaussian_signal(N, seed):
    if N < 1:
        raise ConfigurationError(f"signal length must be >= 1, got {N}")
    return rng(seed).standard_normal(int(N))


def corrupt(y, prior, seed):
    """Pass codeword ``y`` through the mixture channel.

    The small-noise realization ``n`` is shared by the corrupted and the
    ideal codeword; gross errors are added on top of it on the mask.
    """
    y = np.asarray(y, dtype=float)
    g = rng(seed)
    M = y.shape[0]
    mask = g.random(M) < prior.rho
    gross = g.standard_normal(M)
    n = np.sqrt(prior.eps) * g.standard_normal(M)
    e = n + np.where(mask, gross, 0.0)
    return ChannelDraw(e=e, mask=mask, n=n, y_tilde=y + e, y_ideal=y + n)


def robustness_ratio(x_hat, x_hat_ideal, x):
    """``||x_hat - x|| / ||x_hat_ideal - x||`` (a ratio of norms, not of MSEs)."""
    x = np.asarray(x, dtype=float)
    den = np.linalg.norm(np.asarray(x_hat_ideal, dtype=float) - x)
    if den == 0:
        raise DomainError("ideal reconstruction is exact; the robustness ratio is undefined (use the MSE)")
    return float(np.linalg.norm(np.asarray(x_hat, dtype=float) - x) / den)
