import itertools
import inspect

import numpy as np
import pytest

from secc import ConfigurationError, TwoGaussPrior
from secc.channel import corrupt
from secc.coding import encode, homogeneous_profile, make_code
from secc.l1 import L1Options, basis_pursuit, l1_decode, l1_decode_signal, reproject


def enumerate_l1(F, h):
    """Minimum-l1 solution of F e = h by visiting every basic solution.

    The optimum of the linear program is attained at a vertex, i.e. on a
    support of at most P columns with a non-singular restricted system.
    """
    P, M = F.shape
    best, best_norm = None, np.inf
    for k in range(P + 1):
        for S in itertools.combinations(range(M), k):
            S = list(S)
            if k == 0:
                if np.allclose(h, 0):
                    return np.zeros(M)
                continue
            F_S = F[:, S]
            if np.linalg.matrix_rank(F_S) < k:
                continue
            coef = np.linalg.lstsq(F_S, h, rcond=None)[0]
            if np.linalg.norm(F_S @ coef - h) > 1e-9 * np.linalg.norm(h):
                continue
            if np.abs(coef).sum() < best_norm - 1e-12:
                best = np.zeros(M)
                best[S] = coef
                best_norm = np.abs(coef).sum()
    return best


def sparse_instance(M, P, k, seed):
    g = np.random.default_rng(seed)
    F = g.standard_normal((P, M)) / np.sqrt(M)
    e = np.zeros(M)
    e[g.choice(M, size=k, replace=False)] = g.standard_normal(k)
    return F, e


ORACLE_CASES = [(M, M // 2, k, s) for M in (6, 8, 10, 12) for k in (1, 2, 3) for s in range(3)]


@pytest.mark.parametrize("M,P,k,seed", ORACLE_CASES)
def test_matches_enumeration_oracle(M, P, k, seed):
    F, e = sparse_instance(M, P, k, 1000 * M + 10 * k + seed)
    h = F @ e
    ref = enumerate_l1(F, h)
    opts = L1Options(max_iter=20000, tol=1e-12)
    rep = l1_decode(F, h, opts)
    scale = np.abs(ref).max()
    np.testing.assert_allclose(rep.e_bp, ref, atol=1e-4 * scale)
    # The refit keeps entries above the relative support threshold, so the
    # final estimate must equal the oracle solution after the same refit.
    ref_fit, ref_support, _ = reproject(F, h, ref, opts.support_threshold)
    np.testing.assert_array_equal(rep.support, ref_support)
    np.testing.assert_allclose(rep.e_hat, ref_fit, atol=1e-10 * scale)


def test_zero_syndrome():
    F, _ = sparse_instance(10, 5, 1, 0)
    rep = l1_decode(F, np.zeros(5))
    assert not np.any(rep.e_hat)


def test_exact_recovery_deep_in_success_region():
    pair = make_code(homogeneous_profile(0.5, 512), 0)
    e = corrupt(np.zeros(512), TwoGaussPrior(0.1, 0.0), 1).e
    rep = l1_decode(pair.F, pair.F @ e)
    assert np.max(np.abs(rep.e_hat - e)) <= 1e-8


def test_feasibility_and_reprojection_residual():
    pair = make_code(homogeneous_profile(0.5, 256), 2)
    e = corrupt(np.zeros(256), TwoGaussPrior(0.1, 1e-6), 3).e
    h = pair.F @ e
    opts = L1Options(max_iter=500)
    rep = l1_decode(pair.F, h, opts)
    assert np.linalg.norm(pair.F @ rep.e_bp - h) <= 1e-9 * np.linalg.norm(h)
    # Restricted to the detected support the refit is at least as good as
    # the basis-pursuit iterate truncated there.
    S = rep.support
    truncated = np.linalg.norm(pair.F[:, S] @ rep.e_bp[S] - h)
    assert np.linalg.norm(pair.F @ rep.e_hat - h) <= truncated + 1e-12 * np.linalg.norm(h)
    assert not np.any(rep.e_hat[np.setdiff1d(np.arange(256), S)])


def test_bp_reports_iterations():
    F, e = sparse_instance(12, 6, 2, 4)
    x, iters, converged = basis_pursuit(F, F @ e, L1Options(max_iter=3))
    assert iters == 3 and not converged
    assert np.linalg.norm(F @ x - F @ e) < 1e-12


def test_reproject_falls_back_on_large_support():
    F, _ = sparse_instance(8, 3, 1, 5)
    e0 = np.arange(1.0, 9.0)
    e, support, ok = reproject(F, F @ e0, e0, 1e-3)
    assert not ok and support.size == 8
    np.testing.assert_array_equal(e, e0)


def test_reproject_falls_back_on_rank_deficiency():
    F = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]])
    e0 = np.array([1.0, 1.0, 0.0])
    e, _, ok = reproject(F, F @ e0, e0, 1e-3)
    assert not ok
    np.testing.assert_array_equal(e, e0)


def test_solver_is_prior_free():
    params = set(inspect.signature(l1_decode).parameters)
    assert params == {"F", "h", "opts"}


def test_signal_pipeline():
    pair = make_code(homogeneous_profile(0.5, 256), 6)
    x = np.random.default_rng(7).standard_normal(pair.N)
    draw = corrupt(encode(pair, x), TwoGaussPrior(0.05, 0.0), 8)
    x_hat, rep = l1_decode_signal(pair, draw.y_tilde)
    assert rep.reprojected
    assert np.max(np.abs(x_hat - x)) <= 1e-8


@pytest.mark.parametrize("kw", [dict(max_iter=0), dict(tol=0.0), dict(support_threshold=1.0), dict(penalty=0.0)])
def test_option_validation(kw):
    with pytest.raises(ConfigurationError):
        L1Options(**kw)


def test_syndrome_shape_checked():
    F, _ = sparse_instance(8, 4, 1, 9)
    with pytest.raises(ConfigurationError):
        l1_decode(F, np.zeros(3))
