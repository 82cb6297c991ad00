"""State evolution for the AMP decoder, scalar and block coupled.

The scalar recursion tracks the MSE of a homogeneous decoder,

    E' = sum_a w_a * Int Dz f_c(1/m, z * sqrt(sigma_a^2 + 1/m)),   m = alpha / E,

and the coupled version gives every column block its own effective
precision ``m_p`` built from the MSEs of all blocks it shares rows with.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from secc.coding import SeedSpec
from secc.errors import BracketError, ConfigurationError
from secc.prior import denoise

DEFAULT_ORDER = 10
Z_MAX = 12.0


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``z >= 0`` and weights for ``Int Dz g(z)`` with ``g`` even.

    Weights already include the Gaussian density and the factor 2 from the
    mirrored half line.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        return np.sum(self.weights * values, axis=-1)


_LEGENDRE = {}


def _legendre(order):
    if order not in _LEGENDRE:
        x, w = np.polynomial.legendre.leggauss(order)
        _LEGENDRE[order] = ((x + 1) / 2, w / 2)
    return _LEGENDRE[order]


def _panel_edges(feature, n_fine=48, n_geo=20, step=0.5):
    feature = np.atleast_1d(np.asarray(feature, dtype=float))
    split = np.minimum(12.0 * feature, 0.5)
    fine = split[:, None] * np.linspace(0.0, 1.0, n_fine + 1)[None, :]
    u = np.linspace(0.0, 1.0, n_geo + 1)[1:]
    geo = split[:, None] ** (1.0 - u[None, :])  # split -> 1, geometric
    uni = np.arange(1.0 + step, Z_MAX + 0.5 * step, step)
    return np.hstack([fine, geo, np.broadcast_to(uni, (feature.size, uni.size))])


def gaussian_rule(feature=1.0, order=DEFAULT_ORDER):
    """Composite Gauss-Legendre rule for the standard Gaussian measure.

    ``feature`` is the length scale (in ``z``) of the narrowest structure of
    the integrand near the origin. Panels are uniform of width
    ``feature / 4`` out to ``12 * feature`` (at most 1/2), geometric from
    there to 1, and uniform of width 1/2 up to ``z = 12``.
    """
    nodes, weights = _rule_arrays(np.array([feature]), order)
    return QuadratureRule(nodes[0], weights[0])


def _rule_arrays(feature, order):
    if not np.all(feature > 0):
        raise ConfigurationError("feature scale must be > 0")
    edges = _panel_edges(feature)
    x, w = _legendre(order)
    lo, width = edges[:, :-1], np.diff(edges, axis=1)
    nodes = (lo[..., None] + width[..., None] * x).reshape(feature.size, -1)
    weights = (width[..., None] * w).reshape(feature.size, -1)
    weights = 2.0 * weights * np.exp(-0.5 * nodes**2) / np.sqrt(2 * np.pi)
    return nodes, weights


def mmse(prior, sigma2, order=DEFAULT_ORDER):
    """Average posterior variance at pre-estimate variance ``sigma2`` (array ok)."""
    sigma2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    total = np.zeros(sigma2.shape)
    small = np.sqrt(sigma2 + prior.eps)
    for w_a, var_a in zip(prior.w, prior.sigma_sq):
        scale = np.sqrt(var_a + sigma2)
        nodes, weights = _rule_arrays(small / scale, order)
        _, v = denoise(prior, sigma2[:, None], nodes * scale[:, None])
        total += w_a * np.sum(weights * v, axis=1)
    return total


def se_step_scalar(E, alpha, prior, order=DEFAULT_ORDER):
    if alpha < 0:
        raise ConfigurationError("alpha must be >= 0")
    if alpha == 0:
        return prior.variance
    if E < 1e-300:
        # Below double-precision range only the noiseless limit is reachable.
        if prior.eps == 0:
            return 0.0
        E = 1e-300
    return float(mmse(prior, E / alpha, order)[0])


@dataclass
class SEResult:
    E: object
    iterations: int
    converged: bool
    trajectory: List = field(default_factory=list)

    @property
    def worst(self):
        return float(np.max(self.E))


def se_run(alpha, prior, tol=1e-10, max_iter=10_000, order=DEFAULT_ORDER, record=False):
    """Iterate the scalar recursion from ``E = rho + eps``."""
    E = prior.variance
    traj = [E] if record else []
    for t in range(1, max_iter + 1):
        E_new = se_step_scalar(E, alpha, prior, order)
        if record:
            traj.append(E_new)
        done = abs(E_new - E) < tol * max(E, prior.eps, 1e-12)
        E = E_new
        if done:
            return SEResult(E, t, True, traj)
    return SEResult(E, max_iter, False, traj)


@dataclass(frozen=True)
class Coupling:
    """Block structure for the coupled recursion.

    ``J[r, p]`` are variance multipliers, ``row_frac[r] = m_r / M`` and
    ``col_frac[p] = n_p / M`` are the block sizes as fractions of ``M``.
    """

    J: np.ndarray
    row_frac: np.ndarray
    col_frac: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        rf = np.asarray(self.row_frac, dtype=float)
        cf = np.asarray(self.col_frac, dtype=float)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "row_frac", rf)
        object.__setattr__(self, "col_frac", cf)
        if J.shape != (rf.size, cf.size):
            raise ConfigurationError("coupling table does not match block counts")
        reach = ((J > 0) & (rf[:, None] > 0)).any(axis=0)
        if not reach.all():
            raise ConfigurationError(f"column blocks {np.flatnonzero(~reach).tolist()} receive no measurements")

    @property
    def alpha(self):
        return float(self.row_frac.sum())

    def precision(self, E):
        """Effective precision ``m_p`` of every column block."""
        active = (self.row_frac > 0) & (self.J.sum(axis=1) > 0)
        J = self.J[active]
        V = J @ (self.col_frac * E)
        return (self.row_frac[active] / V) @ J


def scalar_coupling(alpha):
    return Coupling(np.ones((1, 1)), np.array([alpha]), np.array([1.0]))


def coupling_from_spec(spec: SeedSpec):
    """Exact block rates of a seeding spec, with no rounding of block sizes."""
    rows = np.full(spec.L_r, spec.alpha_bulk / spec.L_c)
    rows[0] = spec.alpha_seed / spec.L_c
    return Coupling(spec.coupling(), rows, np.full(spec.L_c, 1.0 / spec.L_c))


def coupling_from_profile(profile):
    M = profile.M
    return Coupling(profile.coupling, profile.block_rows / M, profile.block_cols / M)


def se_step_coupled(E, coupling, prior, order=DEFAULT_ORDER):
    E = np.asarray(E, dtype=float)
    if np.any(E < 0):
        raise ConfigurationError("block MSEs must be >= 0")
    E = np.maximum(E, 1e-300)
    m_hat = coupling.precision(E)
    return mmse(prior, 1.0 / m_hat, order)


def se_run_coupled(coupling, prior, tol=1e-10, max_iter=100_000, order=DEFAULT_ORDER, record=False):
    """Iterate the block recursion from ``E_p = rho + eps`` in every block."""
    E = np.full(coupling.col_frac.size, prior.variance)
    traj = [E.copy()] if record else []
    for t in range(1, max_iter + 1):
        E_new = se_step_coupled(E, coupling, prior, order)
        if record:
            traj.append(E_new.copy())
        done = np.all(np.abs(E_new - E) < tol * np.maximum(np.maximum(E, prior.eps), 1e-12))
        E = E_new
        if done:
            return SEResult(E, t, True, traj)
    return SEResult(E, max_iter, False, traj)


def success_level(prior, factor=10.0):
    return max(factor * prior.eps, 1e-9)


def reaches(alpha, prior, seed_spec: Optional[SeedSpec] = None, factor=10.0, order=DEFAULT_ORDER,
            max_iter=None):
    """True when the fixed point at rate ``alpha`` lies below the success level."""
    level = success_level(prior, factor)
    if seed_spec is None:
        res = se_run(alpha, prior, order=order, max_iter=max_iter or 10_000)
    else:
        res = se_run_coupled(coupling_from_spec(seed_spec.with_alpha(alpha)), prior, order=order,
                             max_iter=max_iter or 100_000)
    return res.worst <= level


def phase_boundary(prior, bracket=(0.05, 0.95), tol_alpha=1e-4, seed_spec=None, factor=10.0,
                   order=DEFAULT_ORDER, max_iter=None):
    """Bisect the smallest measurement rate at which the recursion succeeds.

    With ``seed_spec`` the coupled recursion is used and the bulk rate is
    adjusted to each trial ``alpha`` (seed rate and geometry held fixed).
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise BracketError(f"invalid bracket {bracket}")

    def ok(alpha):
        return reaches(alpha, prior, seed_spec, factor, order, max_iter)

    if not ok(hi):
        raise BracketError(f"recursion fails at the upper end alpha={hi}")
    if ok(lo):
        raise BracketError(f"recursion already succeeds at the lower end alpha={lo}")
    while hi - lo > tol_alpha:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
