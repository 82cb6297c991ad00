"""Independent reference computations used by the test suite.

Nothing here imports the closed-form mixture algebra of ``secc.prior``;
posterior moments are obtained by direct numerical integration.
"""

import itertools
import math
import warnings

import numpy as np
from scipy import integrate

RHOS = (0.05, 0.1, 0.2, 0.5)
EPSS = (0.0, 1e-6, 1e-4)
SIGMA2S = (1e-3, 0.1, 1.0, 10.0)
RS = (-3.0, -1.0, 0.0, 0.5, 2.0)

GRID = list(itertools.product(RHOS, EPSS, SIGMA2S, RS))


def _normal_pdf(x, var):
    return math.exp(-0.5 * x * x / var) / math.sqrt(2 * math.pi * var)


def _component(w, var, sigma2, r):
    """Weighted joint density e -> w N(e; 0, var) N(r; e, sigma2) and its window.

    Gaussian components are integrated on +-40 posterior widths around the
    peak; the integrand is Gaussian in e, so the mass outside is negligible.
    A zero-variance component is a point mass at e = 0 and returns no window.
    """
    if var == 0:
        return None, w * _normal_pdf(r, sigma2)
    width = math.sqrt(var * sigma2 / (var + sigma2))
    peak = r * var / (var + sigma2)

    def dens(e):
        return w * _normal_pdf(e, var) * _normal_pdf(r - e, sigma2)

    return (peak - 40 * width, peak + 40 * width, peak), dens


def _expect(parts, g):
    total = 0.0
    for window, dens in parts:
        if window is None:
            total += dens * g(0.0)
            continue
        lo, hi, peak = window
        # A pure relative tolerance cannot be met when the exact value is 0
        # (odd moments at r = 0); quad then warns about roundoff.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            total += integrate.quad(lambda e: g(e) * dens(e), lo, hi, epsabs=0.0, epsrel=1e-12,
                                    limit=400, points=[peak])[0]
    return total


def posterior_moments(rho, eps, sigma2, r):
    """Posterior mean, second moment and variance by direct integration."""
    parts = [_component(rho, 1 + eps, sigma2, r), _component(1 - rho, eps, sigma2, r)]
    Z = _expect(parts, lambda e: 1.0)
    mean = _expect(parts, lambda e: e) / Z
    second = _expect(parts, lambda e: e * e) / Z
    var = _expect(parts, lambda e: (e - mean) ** 2) / Z
    return mean, second, var


def mc_se_step(rho, eps, alpha, E, n, seed, denoiser):
    """Monte-Carlo evaluation of one scalar state-evolution step.

    Draws e from the mixture and the pre-estimate r = e + sqrt(E/alpha) z,
    then averages the squared error of the supplied posterior-mean
    denoiser (the MSE of the posterior mean equals the mean posterior
    variance). Returns the estimate and its standard error.
    """
    rng = np.random.default_rng(seed)
    sigma2 = E / alpha
    out = 0.0
    out_sq = 0.0
    done = 0
    chunk = 1_000_000
    while done < n:
        k = min(chunk, n - done)
        gross = rng.random(k) < rho
        e = rng.standard_normal(k) * np.sqrt(eps) + gross * rng.standard_normal(k)
        r = e + np.sqrt(sigma2) * rng.standard_normal(k)
        err2 = (denoiser(sigma2, r) - e) ** 2
        out += err2.sum()
        out_sq += (err2**2).sum()
        done += k
    mean = out / n
    return mean, np.sqrt((out_sq / n - mean**2) / n)
