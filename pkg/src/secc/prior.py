"""Two-Gaussian mixture channel prior and its scalar posterior denoisers.

A fraction ``rho`` of the error entries carries a gross error of variance
``1 + eps``; the remaining entries carry small noise of variance ``eps``.
The denoisers return posterior moments of a scalar drawn from that mixture
and observed as ``r = e + sqrt(sigma2) * z``.
"""

from dataclasses import dataclass

import numpy as np

from secc.errors import DomainError


@dataclass(frozen=True)
class TwoGaussPrior:
    rho: float
    eps: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (0, 1), got {self.rho}")
        if not self.eps >= 0.0:
            raise DomainError(f"eps must be non-negative, got {self.eps}")

    @property
    def w(self):
        return np.array([self.rho, 1.0 - self.rho])

    @property
    def sigma_sq(self):
        return np.array([1.0 + self.eps, self.eps])

    @property
    def variance(self):
        return self.rho + self.eps


def _check(sigma2):
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(~(sigma2 > 0)):
        raise DomainError("pre-estimate variance sigma2 must be > 0")
    return sigma2


def _moments(prior, sigma2, r):
    """Posterior mean, second moment and variance, all broadcast together."""
    sigma2 = _check(sigma2)
    r = np.asarray(r, dtype=float)
    sigma2, r = np.broadcast_arrays(sigma2, r)
    w = prior.w
    var_a = prior.sigma_sq

    s = sigma2[..., None] + var_a
    with np.errstate(divide="ignore"):
        log_p = np.log(w) - 0.5 * np.log(s) - 0.5 * r[..., None] ** 2 / s
    # Shifted exponents: the largest term becomes 1, so the normalizer is >= 1.
    log_p -= log_p.max(axis=-1, keepdims=True)
    p = np.exp(log_p)
    p /= p.sum(axis=-1, keepdims=True)

    mean_a = r[..., None] * var_a / s
    post_var_a = sigma2[..., None] * var_a / s

    mean = (p * mean_a).sum(axis=-1)
    second = (p * (post_var_a + mean_a**2)).sum(axis=-1)
    # Within-plus-between decomposition of the mixture variance; avoids the
    # cancellation in second - mean**2 when the posterior is very narrow.
    var = (p * (post_var_a + (mean_a - mean[..., None]) ** 2)).sum(axis=-1)
    return mean, second, var


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def f_a(prior, sigma2, r):
    """Posterior mean of the error entry given pre-estimate ``(sigma2, r)``."""
    return _out(_moments(prior, sigma2, r)[0])


def f_b(prior, sigma2, r):
    """Posterior second moment."""
    return _out(_moments(prior, sigma2, r)[1])


def f_c(prior, sigma2, r):
    """Posterior variance, ``f_b - f_a**2``."""
    return _out(_moments(prior, sigma2, r)[2])


def denoise(prior, sigma2, r):
    """Return ``(f_a, f_c)`` from a single pass over the mixture."""
    mean, _, var = _moments(prior, sigma2, r)
    return mean, var
