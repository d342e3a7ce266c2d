import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn, kv

from sosda import (DataError, DensePenalty, DiagonalPenalty, IdentityPenalty,
                   LowRankPenalty, MaternParams, build_matern_omega,
                   dense_matrix, lipschitz_bound, low_rank_truncate,
                   m_inverse_apply, matern_covariance, omega_matvec,
                   omega_quadform)


def random_spec(rng, p, kind):
    if kind == "identity":
        return IdentityPenalty()
    if kind == "diagonal":
        return DiagonalPenalty(rng.uniform(0.0, 3.0, p))
    if kind == "lowrank":
        r = int(rng.integers(1, p + 1))
        return LowRankPenalty(rng.standard_normal((p, r)))
    M = rng.standard_normal((p, p))
    return DensePenalty(M @ M.T)


KINDS = ("identity", "diagonal", "lowrank", "dense")


def test_matvec_examples():
    assert np.array_equal(omega_matvec(IdentityPenalty(), [3.0, -1.0]), [3.0, -1.0])
    assert np.array_equal(omega_matvec(DiagonalPenalty([1.0, 2.0]), [3.0, -1.0]),
                          [3.0, -2.0])
    assert np.array_equal(omega_matvec(LowRankPenalty([[1.0], [1.0]]), [1.0, 2.0]),
                          [3.0, 3.0])


def test_quadform_examples():
    assert omega_quadform(IdentityPenalty(), [3.0, 4.0]) == 25.0
    assert omega_quadform(DiagonalPenalty([2.0, 0.0]), [1.0, 5.0]) == 2.0
    assert omega_quadform(LowRankPenalty([[1.0], [1.0]]), [1.0, -1.0]) == 0.0


def test_quadform_matches_matvec_dot():
    rng = np.random.default_rng(0)
    for kind in KINDS:
        for p in (1, 3, 17):
            spec = random_spec(rng, p, kind)
            beta = rng.standard_normal(p)
            q = omega_quadform(spec, beta)
            ref = float(beta @ omega_matvec(spec, beta))
            assert q >= -1e-12 * max(1.0, abs(ref))
            assert q == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_lipschitz_bound_examples():
    # oracle: dense eigendecomposition of A = 2(X^T X + gamma*Omega)
    X = np.array([[1.0, 1.0]])
    spec = DiagonalPenalty([1.0, 2.0])
    bound = lipschitz_bound(spec, X, 1.0)
    assert bound == 8.0
    A = 2.0 * (X.T @ X + np.diag([1.0, 2.0]))
    assert np.linalg.eigvalsh(A).max() == pytest.approx(5 + math.sqrt(5))
    assert bound >= np.linalg.eigvalsh(A).max()

    assert lipschitz_bound(DiagonalPenalty([1.0, 2.0]), np.zeros((1, 2)), 0.0) == 0.0
    assert lipschitz_bound(IdentityPenalty(), np.zeros((3, 5)), 1.0) == 2.0


def test_lipschitz_bound_dominates_spectral_norm():
    rng = np.random.default_rng(1)
    for kind in KINDS:
        for _ in range(10):
            p = int(rng.integers(2, 40))
            n = int(rng.integers(1, 15))
            X = rng.standard_normal((n, p))
            gamma = float(rng.uniform(0, 2))
            spec = random_spec(rng, p, kind)
            A = 2.0 * (X.T @ X + gamma * dense_matrix(spec, p))
            assert lipschitz_bound(spec, X, gamma) >= np.linalg.eigvalsh(A).max() - 1e-9


def test_m_inverse_examples():
    out = m_inverse_apply(DiagonalPenalty([1.0, 3.0]), 2.0, 1.0, [4.0, 8.0])
    assert np.array_equal(out, [1.0, 1.0])
    for spec in (IdentityPenalty(), DiagonalPenalty([5.0, 7.0]),
                 LowRankPenalty([[1.0], [2.0]])):
        v = np.array([4.0, 6.0])
        assert np.allclose(m_inverse_apply(spec, 2.0, 0.0, v), v / 2.0)
    # low-rank route against a dense solve
    out = m_inverse_apply(LowRankPenalty([[1.0], [0.0]]), 1.0, 0.5, [2.0, 2.0])
    dense = np.linalg.solve(np.eye(2) + np.array([[1.0, 0.0], [0.0, 0.0]]),
                            [2.0, 2.0])
    assert np.allclose(out, dense)
    assert np.allclose(out, [1.0, 2.0])


def test_m_inverse_reconstruction_all_variants():
    rng = np.random.default_rng(2)
    for kind in KINDS:
        for _ in range(5):
            p = int(rng.integers(2, 60))
            spec = random_spec(rng, p, kind)
            mu = float(rng.uniform(0.1, 5.0))
            gamma = float(rng.uniform(0.0, 2.0))
            v = rng.standard_normal(p)
            x = m_inverse_apply(spec, mu, gamma, v)
            M = mu * np.eye(p) + 2.0 * gamma * dense_matrix(spec, p)
            assert np.allclose(M @ x, v, rtol=1e-8, atol=1e-8 * np.linalg.norm(v))


def test_m_inverse_matrix_rhs():
    rng = np.random.default_rng(3)
    spec = LowRankPenalty(rng.standard_normal((6, 2)))
    V = rng.standard_normal((6, 4))
    cols = np.column_stack([m_inverse_apply(spec, 1.5, 0.7, V[:, j])
                            for j in range(4)])
    assert np.allclose(m_inverse_apply(spec, 1.5, 0.7, V), cols)


def test_matern_closed_form_matches_bessel():
    params = MaternParams(sigma2=1.0, rho=1.0, nu=0.5)
    val = matern_covariance(np.array([2.0]), params)[0]
    assert val == pytest.approx(math.exp(-2.0), rel=1e-12)
    # the generic Bessel expression evaluated directly
    s = math.sqrt(2 * 0.5) * 2.0 / 1.0
    ref = 2.0 ** 0.5 / gamma_fn(0.5) * s ** 0.5 * kv(0.5, s)
    assert val == pytest.approx(float(ref), rel=1e-10)
    # non-half-integer smoothness goes through the Bessel branch
    params = MaternParams(sigma2=2.0, rho=1.5, nu=0.8)
    d = 1.3
    s = math.sqrt(2 * 0.8) * d / 1.5
    ref = 2.0 * 2.0 ** 0.2 / gamma_fn(0.8) * s ** 0.8 * kv(0.8, s)
    assert matern_covariance(np.array([d]), params)[0] == pytest.approx(float(ref))


def test_matern_zero_distance_and_scalar_layout():
    params = MaternParams(sigma2=3.0, rho=2.0, nu=1.5)
    assert matern_covariance(np.array([0.0]), params)[0] == 3.0
    spec = build_matern_omega([[0.0, 0.0, 0.0]], params)
    assert np.allclose(spec.omega, [[1.0 / (3.0 + params.jitter)]])


def test_matern_omega_is_inverse_covariance():
    rng = np.random.default_rng(4)
    pos = rng.uniform(0, 5, size=(12, 3))
    params = MaternParams(sigma2=1.2, rho=0.9, nu=0.5, jitter=1e-8)
    spec = build_matern_omega(pos, params)
    diff = pos[:, None, :] - pos[None, :, :]
    C = matern_covariance(np.sqrt((diff ** 2).sum(axis=2)), params)
    C[np.diag_indices(12)] = params.sigma2 + params.jitter
    assert np.allclose(spec.omega @ C, np.eye(12), atol=1e-6)
    assert np.allclose(spec.omega, spec.omega.T)


def test_matern_duplicate_positions_rejected():
    with pytest.raises(DataError, match="distinct"):
        build_matern_omega([[0.0], [0.0]], MaternParams())


def test_matern_singular_covariance_advises_jitter():
    # distance/rho below float epsilon: the covariance rounds to all-ones
    params = MaternParams(sigma2=1.0, rho=1e6, nu=0.5, jitter=0.0)
    with pytest.raises(DataError, match="jitter"):
        build_matern_omega([[0.0], [1e-11]], params)


def test_truncate_examples():
    spec = low_rank_truncate(DensePenalty(np.diag([4.0, 1.0])), 1)
    assert np.allclose(spec.R, [[2.0], [0.0]])
    assert np.allclose(spec.R @ spec.R.T, np.diag([4.0, 0.0]))

    omega = np.array([[2.0, 1.0], [1.0, 2.0]])
    spec = low_rank_truncate(DensePenalty(omega), 1)
    assert np.allclose(spec.R @ spec.R.T, 1.5 * np.ones((2, 2)))

    full = low_rank_truncate(DensePenalty(omega), 2)
    assert np.linalg.norm(full.R @ full.R.T - omega) <= 1e-8 * np.linalg.norm(omega)


def test_truncate_is_best_rank_r_approximation():
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = int(rng.integers(3, 30))
        M = rng.standard_normal((p, p))
        omega = M @ M.T
        lam = np.sort(np.linalg.eigvalsh(omega))[::-1]
        for r in (1, p // 2 or 1, p):
            spec = low_rank_truncate(DensePenalty(omega), r)
            err = np.linalg.norm(spec.R @ spec.R.T - omega)
            assert err == pytest.approx(np.sqrt(np.sum(lam[r:] ** 2)), abs=1e-8)


def test_truncate_rank_bounds():
    with pytest.raises(DataError):
        low_rank_truncate(DensePenalty(np.eye(3)), 4)


def test_spec_validation():
    with pytest.raises(DataError, match="nonnegative"):
        DiagonalPenalty([-1.0, 2.0])
    with pytest.raises(DataError, match="symmetric"):
        DensePenalty([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(DataError, match="semidefinite"):
        DensePenalty([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DataError):
        m_inverse_apply(DiagonalPenalty([1.0]), 0.0, 1.0, [1.0])
    with pytest.raises(DataError):
        omega_matvec(DiagonalPenalty([1.0, 2.0]), [1.0, 2.0, 3.0])
