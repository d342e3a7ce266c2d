"""Structure-aware quadratic regularizers exposed through matrix-free operations.

The regularizer Omega enters the solvers only through products Omega @ v,
quadratic forms v^T Omega v, bounds on ||2(X^T X + gamma*Omega)||, and solves
with M = mu*I + 2*gamma*Omega.  Each structural variant keeps its natural
representation so those operations cost O(p), O(r p), or O(p^2) instead of
always paying the dense price:

* IdentityPenalty      Omega = I
* DiagonalPenalty(u)   Omega = Diag(u), u >= 0 entrywise
* LowRankPenalty(R)    Omega = R R^T with R of shape (p, r)
* DensePenalty(M)      explicit symmetric PSD matrix

Factorizations needed by ``m_inverse_apply`` are cached on the spec keyed by
(mu, gamma); specs are immutable, so sharing one across concurrent solves is
safe once the cache is populated (or if callers warm it up front).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gamma as gamma_fn, kv

from .errors import DataError

_SYM_TOL = 1e-12
_PSD_TOL = 1e-10


class PenaltySpec:
    """Base class for the structural variants of the quadratic regularizer."""


@dataclass(eq=False)
class IdentityPenalty(PenaltySpec):
    """Omega = I (any dimension)."""


@dataclass(eq=False)
class DiagonalPenalty(PenaltySpec):
    u: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float).ravel()
        if (self.u < 0).any():
            raise DataError("diagonal penalty entries must be nonnegative")

    @property
    def is_positive_definite(self):
        return bool((self.u > 0).all())


@dataclass(eq=False)
class LowRankPenalty(PenaltySpec):
    """Omega = R R^T held in factored form, R of shape (p, r) with r <= p."""

    R: np.ndarray
    _m_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        if self.R.ndim != 2:
            raise DataError("low-rank factor must be a (p, r) matrix")
        p, r = self.R.shape
        if not 1 <= r <= p:
            raise DataError(f"rank {r} must lie in [1, p={p}]")


@dataclass(eq=False)
class DensePenalty(PenaltySpec):
    omega: np.ndarray
    _m_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.ndim != 2 or self.omega.shape[0] != self.omega.shape[1]:
            raise DataError("dense penalty must be a square matrix")
        scale = np.abs(self.omega).max()
        if scale > 0 and np.abs(self.omega - self.omega.T).max() > _SYM_TOL * scale:
            raise DataError("dense penalty must be symmetric")
        evals = scipy.linalg.eigvalsh(self.omega)
        norm = max(abs(evals[0]), abs(evals[-1]))
        if evals[0] < -_PSD_TOL * max(norm, 1.0):
            raise DataError("dense penalty must be positive semidefinite")


@dataclass
class MaternParams:
    """Stationary Matern covariance parameters; ``jitter`` defaults to 1e-8 * sigma2."""

    sigma2: float = 1.0
    rho: float = 1.0
    nu: float = 0.5
    jitter: float | None = None

    def __post_init__(self):
        if self.sigma2 <= 0 or self.rho <= 0 or self.nu <= 0:
            raise DataError("sigma2, rho, nu must be positive")
        if self.jitter is None:
            self.jitter = 1e-8 * self.sigma2
        if self.jitter < 0:
            raise DataError("jitter must be nonnegative")


def _check_dim(spec, p):
    if isinstance(spec, DiagonalPenalty) and spec.u.shape[0] != p:
        raise DataError(f"diagonal penalty has {spec.u.shape[0]} entries, vector has {p}")
    if isinstance(spec, LowRankPenalty) and spec.R.shape[0] != p:
        raise DataError(f"low-rank factor has {spec.R.shape[0]} rows, vector has {p}")
    if isinstance(spec, DensePenalty) and spec.omega.shape[0] != p:
        raise DataError(f"dense penalty is {spec.omega.shape[0]} x {spec.omega.shape[0]}, vector has {p}")


def omega_matvec(spec, beta):
    """Omega @ beta without materializing Omega (result may alias the input)."""
    beta = np.asarray(beta, dtype=float)
    _check_dim(spec, beta.shape[0])
    if isinstance(spec, IdentityPenalty):
        return beta
    if isinstance(spec, DiagonalPenalty):
        return spec.u * beta
    if isinstance(spec, LowRankPenalty):
        return spec.R @ (spec.R.T @ beta)
    if isinstance(spec, DensePenalty):
        return spec.omega @ beta
    raise TypeError(f"unknown penalty variant {type(spec).__name__}")


def omega_quadform(spec, beta):
    """beta^T Omega beta (nonnegative for every variant)."""
    beta = np.asarray(beta, dtype=float)
    _check_dim(spec, beta.shape[0])
    if isinstance(spec, LowRankPenalty):
        t = spec.R.T @ beta
        return float(t @ t)
    return float(beta @ omega_matvec(spec, beta))


def lipschitz_bound(spec, X, gamma):
    """Cheap upper bound on ||2(X^T X + gamma*Omega)||_2.

    Uses ||X^T X|| <= ||X||_F^2 plus a variant-specific bound on ||Omega||:
    max diagonal entry (identity/diagonal), ||R||_F^2 >= ||R R^T||_2
    (low rank), or the Frobenius norm (dense).
    """
    if gamma < 0:
        raise DataError("gamma must be nonnegative")
    X = np.asarray(X, dtype=float)
    data_term = 2.0 * float(np.sum(X * X))
    if isinstance(spec, IdentityPenalty):
        omega_norm = 1.0
    elif isinstance(spec, DiagonalPenalty):
        _check_dim(spec, X.shape[1])
        omega_norm = float(spec.u.max()) if spec.u.size else 0.0
    elif isinstance(spec, LowRankPenalty):
        _check_dim(spec, X.shape[1])
        omega_norm = float(np.sum(spec.R * spec.R))
    elif isinstance(spec, DensePenalty):
        _check_dim(spec, X.shape[1])
        omega_norm = float(np.sqrt(np.sum(spec.omega * spec.omega)))
    else:
        raise TypeError(f"unknown penalty variant {type(spec).__name__}")
    return 2.0 * gamma * omega_norm + data_term


def m_inverse_apply(spec, mu, gamma, v):
    """Solve (mu*I + 2*gamma*Omega) x = v.

    Accepts a vector or a (p, k) matrix of right-hand sides.  Diagonal
    variants solve entrywise; the low-rank variant uses
    M^{-1} = (1/mu) I - (2 gamma / mu^2) R (I + (2 gamma / mu) R^T R)^{-1} R^T;
    the dense variant solves with a cached Cholesky factor of M.
    Factorizations are cached per (mu, gamma).
    """
    if mu <= 0:
        raise DataError("mu must be positive")
    if gamma < 0:
        raise DataError("gamma must be nonnegative")
    v = np.asarray(v, dtype=float)
    _check_dim(spec, v.shape[0])
    if gamma == 0.0:
        return v / mu
    if isinstance(spec, IdentityPenalty):
        return v / (mu + 2.0 * gamma)
    if isinstance(spec, DiagonalPenalty):
        denom = mu + 2.0 * gamma * spec.u
        return v / denom if v.ndim == 1 else v / denom[:, None]
    if isinstance(spec, LowRankPenalty):
        key = (mu, gamma)
        cached = spec._m_cache.get(key)
        if cached is None:
            c = 2.0 * gamma / mu
            inner = np.eye(spec.R.shape[1]) + c * (spec.R.T @ spec.R)
            cached = scipy.linalg.cho_factor(inner)
            spec._m_cache[key] = cached
        t = scipy.linalg.cho_solve(cached, spec.R.T @ v)
        return v / mu - (2.0 * gamma / mu**2) * (spec.R @ t)
    if isinstance(spec, DensePenalty):
        key = (mu, gamma)
        cached = spec._m_cache.get(key)
        if cached is None:
            M = 2.0 * gamma * spec.omega + mu * np.eye(spec.omega.shape[0])
            cached = scipy.linalg.cho_factor(M)
            spec._m_cache[key] = cached
        return scipy.linalg.cho_solve(cached, v)
    raise TypeError(f"unknown penalty variant {type(spec).__name__}")


def matern_covariance(d, params):
    """Matern covariance at distances ``d``; the d=0 value is sigma2 by continuity.

    nu in {1/2, 3/2, 5/2} uses the closed forms, everything else the
    modified-Bessel expression sigma2 * 2^(1-nu)/Gamma(nu) * s^nu * K_nu(s),
    s = sqrt(2 nu) d / rho.
    """
    d = np.asarray(d, dtype=float)
    s2, rho, nu = params.sigma2, params.rho, params.nu
    t = d / rho
    if nu == 0.5:
        return s2 * np.exp(-t)
    if nu == 1.5:
        a = math.sqrt(3.0) * t
        return s2 * (1.0 + a) * np.exp(-a)
    if nu == 2.5:
        a = math.sqrt(5.0) * t
        return s2 * (1.0 + a + a * a / 3.0) * np.exp(-a)
    s = math.sqrt(2.0 * nu) * t
    out = np.full_like(s, s2, dtype=float)
    nz = s > 0
    out[nz] = s2 * (2.0 ** (1.0 - nu) / gamma_fn(nu)) * s[nz] ** nu * kv(nu, s[nz])
    return out


def build_matern_omega(positions, params):
    """Inverse Matern covariance over a point layout, as a DensePenalty.

    ``positions`` is a (p, dim) array of distinct coordinates (a length-p
    sequence of scalars is treated as a 1-D layout).  The covariance matrix
    gets ``params.jitter`` added to its diagonal before inversion; a
    numerically singular matrix raises with advice to raise the jitter.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim == 1:
        pos = pos[:, None]
    p = pos.shape[0]
    if p < 1:
        raise DataError("need at least one position")
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    if p > 1:
        off = dist + np.diag(np.full(p, np.inf))
        if off.min() <= 0:
            raise DataError("positions must be distinct")
    C = matern_covariance(dist, params)
    C[np.diag_indices(p)] = params.sigma2 + params.jitter
    try:
        cf = scipy.linalg.cho_factor(C)
        omega = scipy.linalg.cho_solve(cf, np.eye(p))
    except scipy.linalg.LinAlgError as exc:
        raise DataError(
            "Matern covariance is numerically singular; increase jitter") from exc
    return DensePenalty((omega + omega.T) / 2.0)


def low_rank_truncate(dense, r):
    """Best rank-r PSD approximation of a DensePenalty, in factored form.

    Keeps the r largest eigenpairs (eigenvalues clipped at zero, sorted
    descending, each eigenvector's first nonzero entry made positive) and
    returns R = U_r sqrt(diag(lambda)) so that R R^T approximates Omega.
    """
    if not isinstance(dense, DensePenalty):
        raise DataError("low_rank_truncate expects a DensePenalty")
    p = dense.omega.shape[0]
    if not 1 <= r <= p:
        raise DataError(f"rank {r} must lie in [1, p={p}]")
    evals, evecs = scipy.linalg.eigh(dense.omega)
    order = np.argsort(evals)[::-1][:r]
    lam = np.clip(evals[order], 0.0, None)
    U = evecs[:, order]
    for j in range(U.shape[1]):
        nz = np.flatnonzero(np.abs(U[:, j]) > 1e-12)
        if nz.size and U[nz[0], j] < 0:
            U[:, j] = -U[:, j]
    return LowRankPenalty(U * np.sqrt(lam))


def dense_matrix(spec, p):
    """Materialize Omega as a p x p array (tests and small-problem oracles)."""
    if isinstance(spec, IdentityPenalty):
        return np.eye(p)
    if isinstance(spec, DiagonalPenalty):
        _check_dim(spec, p)
        return np.diag(spec.u)
    if isinstance(spec, LowRankPenalty):
        _check_dim(spec, p)
        return spec.R @ spec.R.T
    if isinstance(spec, DensePenalty):
        _check_dim(spec, p)
        return spec.omega.copy()
    raise TypeError(f"unknown penalty variant {type(spec).__name__}")
