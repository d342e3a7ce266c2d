"""Block coordinate descent for sparse optimal scoring.

Each discriminant direction k solves

    min ||Y theta - X beta||^2 + gamma beta^T Omega beta + lam ||beta||_1
    s.t. theta^T D theta = 1,  theta D-conjugate to e and all prior thetas,

by alternating an exact, analytic theta-update with an inner elastic-net
solve for beta.  Directions are extracted sequentially; each fitted theta
joins the conjugacy constraints of the next.  The recorded objective
sequence is nonincreasing.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .core import Dataset, build_indicator, center_data
from .ennet import (SOLVER_IDS, SolverOptions, Subproblem, objective_F,
                    solve_subproblem)
from .errors import (ConvergenceError, DataError, DegenerateDirectionError,
                     SolverError, TrivialDirectionError)
from .penalty import IdentityPenalty, PenaltySpec, omega_matvec, omega_quadform


@dataclass(eq=False)
class ScoringState:
    """Constraint matrix Q_k = [e, theta_1, ..., theta_{k-1}] and D."""

    Qk: np.ndarray
    D: np.ndarray

    @classmethod
    def initial(cls, indicator):
        return cls(np.ones((indicator.K, 1)), indicator.D.astype(float))

    @property
    def k(self):
        return self.Qk.shape[1]

    def append(self, theta):
        return ScoringState(np.column_stack([self.Qk, theta]), self.D)


@dataclass
class SosFitConfig:
    """Everything ``fit_sos`` needs besides the data.

    ``q`` is the number of discriminant directions (at most K-1, checked at
    fit time).  ``theta_init`` is "fixed" (projection of (1, ..., K) onto
    the feasible set, deterministic) or "random" (projected standard
    normal, driven by ``seed``).
    """

    lam: float
    q: int = 1
    gamma: float = 1e-3
    omega: PenaltySpec = field(default_factory=IdentityPenalty)
    solver: str = "sdaap"
    inner: SolverOptions = field(default_factory=SolverOptions)
    max_outer: int = 250
    outer_tol: float = 1e-3
    theta_init: str = "fixed"
    seed: int | None = None
    scale: bool = False

    def __post_init__(self):
        if self.lam < 0 or self.gamma < 0:
            raise DataError("lam and gamma must be nonnegative")
        if self.q < 1:
            raise DataError("q must be at least 1")
        if self.max_outer < 1 or self.outer_tol <= 0:
            raise DataError("need max_outer >= 1 and outer_tol > 0")
        if self.solver not in SOLVER_IDS:
            raise DataError(f"unknown solver id {self.solver!r}")
        if self.theta_init not in ("fixed", "random"):
            raise DataError("theta_init must be 'fixed' or 'random'")


@dataclass(eq=False)
class SosModel:
    """Fitted discriminant matrix, scoring vectors, and centering statistics."""

    B: np.ndarray
    Theta: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray | None
    centroids: np.ndarray
    label_vocab: list
    config: SosFitConfig
    diagnostics: dict

    @property
    def p(self):
        return self.B.shape[0]

    @property
    def q(self):
        return self.B.shape[1]

    @property
    def K(self):
        return len(self.label_vocab)


def _d_norm2(D, v):
    return float(v @ (D * v))


def _fallback_theta(state):
    # D-orthonormalize the standard basis against Q_k (modified Gram-Schmidt
    # in the D-inner product) and keep the first surviving vector.
    K = state.Qk.shape[0]
    for j in range(K):
        v = np.zeros(K)
        v[j] = 1.0
        for col in range(state.Qk.shape[1]):
            q = state.Qk[:, col]
            v = v - q * float(q @ (state.D * v))
        nrm2 = _d_norm2(state.D, v)
        if nrm2 > 1e-12:
            return v / np.sqrt(nrm2)
    raise DegenerateDirectionError("no feasible scoring vector remains")


def update_theta(indicator, Xbeta, state):
    """Exact scoring update for a fixed discriminant vector.

    Computes w = (I - Q_k Q_k^T D) D^{-1} Y^T (X beta) and returns
    (w / sqrt(w^T D w), False); if w is numerically zero every feasible
    theta is optimal, so a deterministic feasible fallback is returned with
    the degenerate flag set.
    """
    t = indicator.Y.T @ np.asarray(Xbeta, dtype=float)
    w = t / state.D - state.Qk @ (state.Qk.T @ t)
    nrm2 = _d_norm2(state.D, w)
    eps = 1e-12 * indicator.n
    if nrm2 > eps * eps:
        return w / np.sqrt(nrm2), False
    return _fallback_theta(state), True


def _project_theta(state, v):
    w = v - state.Qk @ (state.Qk.T @ (state.D * v))
    nrm2 = _d_norm2(state.D, w)
    if nrm2 <= 1e-24:
        return _fallback_theta(state)
    return w / np.sqrt(nrm2)


def initial_theta(state, mode="fixed", rng=None):
    """Feasible starting scoring vector: projected (1, ..., K) or projected noise."""
    K = state.Qk.shape[0]
    if mode == "fixed":
        v = np.arange(1.0, K + 1.0)
    elif mode == "random":
        rng = rng if rng is not None else np.random.default_rng()
        v = rng.standard_normal(K)
    else:
        raise DataError("theta_init must be 'fixed' or 'random'")
    return _project_theta(state, v)


def compute_lambda_bar(sub):
    """Largest useful l1 weight, from the ridge solution A beta* = d.

    Solves the system by conjugate gradients on matrix-free A-products
    (relative tolerance 1e-8) and returns
    (beta*^T d - 0.5 beta*^T A beta*) / ||beta*||_1, falling back to
    ||d||_inf when that value is nonpositive or beta* vanishes.
    """
    d = sub.d
    d_inf = float(np.abs(d).max(initial=0.0))
    if d_inf == 0.0:
        raise SolverError("trivial subproblem: d = 0")

    def apply_A(v):
        out = 2.0 * (sub.X.T @ (sub.X @ v))
        if sub.gamma:
            out = out + 2.0 * sub.gamma * omega_matvec(sub.omega, v)
        return out

    op = LinearOperator((sub.p, sub.p), matvec=apply_A)
    beta_star, info = cg(op, d, rtol=1e-8, atol=0.0, maxiter=10 * sub.p)
    if info != 0:
        raise ConvergenceError(f"ridge solve did not converge (cg info={info})")
    l1 = float(np.abs(beta_star).sum())
    if l1 <= 0.0:
        return d_inf
    lam_bar = (float(beta_star @ d) - 0.5 * float(beta_star @ apply_A(beta_star))) / l1
    if not np.isfinite(lam_bar) or lam_bar <= 0.0:
        return d_inf
    return lam_bar


def sos_objective(X, Y, theta, beta, gamma, lam, omega):
    """||Y theta - X beta||^2 + gamma beta^T Omega beta + lam ||beta||_1."""
    r = Y @ theta - X @ beta
    val = float(r @ r) + lam * float(np.abs(beta).sum())
    if gamma:
        val += gamma * omega_quadform(omega, beta)
    return val


def fit_direction(Xc, indicator, state, config, rng=None):
    """One outer block-coordinate run: returns (theta, beta, diagnostics).

    Alternates the inner elastic-net solve (warm-started; the previous beta
    is kept if a non-monotone solver fails to improve its own start) with
    the exact theta-update, stopping on relative change of the full
    objective.  A final inner solve against the returned theta makes the
    pair mutually consistent.  Raises TrivialDirectionError when the solve
    returns an all-zero direction and DegenerateDirectionError when the
    scoring update collapses despite a nonzero beta.
    """
    theta = initial_theta(state, config.theta_init, rng)
    Y = indicator.Y
    sub = Subproblem(Xc, -2.0 * (Xc.T @ (Y @ theta)), config.gamma, config.lam,
                     config.omega)
    beta = np.zeros(sub.p)
    inner_opts = config.inner
    trace = [sos_objective(Xc, Y, theta, beta, config.gamma, config.lam, config.omega)]
    inner_iters = 0
    converged = False
    last = None

    def inner_solve(sub, beta):
        nonlocal inner_opts, inner_iters, last
        res = solve_subproblem(sub, inner_opts, beta0=beta, method=config.solver)
        inner_iters += res.iterations
        last = res
        if res.final_L is not None and res.final_L > inner_opts.L0:
            # carry the accepted curvature estimate into the next warm start
            inner_opts = replace(inner_opts, L0=res.final_L)
        # keep the incumbent when a non-monotone solver ends above its start
        kept = beta if objective_F(sub, res.beta) > objective_F(sub, beta) \
            else res.beta
        if not np.any(kept):
            raise TrivialDirectionError(
                "discriminant vector is all-zero; lam is too large")
        return kept

    outer = 0
    for outer in range(config.max_outer):
        beta = inner_solve(sub, beta)
        theta_new, degenerate = update_theta(indicator, Xc @ beta, state)
        if degenerate:
            raise DegenerateDirectionError(
                f"scoring update degenerated at outer iteration {outer + 1} "
                f"with ||beta||_1 = {np.abs(beta).sum():.3e}")
        theta = theta_new
        sub = sub.with_d(-2.0 * (Xc.T @ (Y @ theta)))
        F = sos_objective(Xc, Y, theta, beta, config.gamma, config.lam, config.omega)
        trace.append(F)
        if abs(trace[-2] - F) <= config.outer_tol * max(1.0, abs(trace[-2])):
            converged = True
            break
    # consistency solve: beta inner-converged for the theta being returned
    beta = inner_solve(sub, beta)
    trace.append(sos_objective(Xc, Y, theta, beta, config.gamma, config.lam,
                               config.omega))
    diagnostics = {
        "outer_iterations": outer + 1,
        "converged": converged,
        "objective_trace": np.asarray(trace),
        "final_objective": trace[-1],
        "inner_iterations": inner_iters,
        "inner_converged": bool(last.converged),
    }
    return theta, beta, diagnostics


def fit_sos(dataset, config):
    """Fit ``config.q`` discriminant directions on a labeled dataset.

    Orchestrates centering, sequential direction extraction, the
    sign-normalization that makes fitted models comparable (first nonzero
    entry of each beta positive, theta negated in tandem), and centroid
    computation in the projected space.
    """
    t0 = time.perf_counter()
    if not isinstance(dataset, Dataset):
        raise DataError("fit_sos expects a Dataset")
    if not 1 <= config.q <= dataset.K - 1:
        raise DataError(f"q must lie in [1, K-1] = [1, {dataset.K - 1}]")
    centered = center_data(dataset.features, scale=config.scale)
    indicator = build_indicator(dataset.labels, dataset.label_vocab)
    state = ScoringState.initial(indicator)
    rng = np.random.default_rng(config.seed)
    betas, thetas, per_direction = [], [], []
    for k in range(1, config.q + 1):
        try:
            theta, beta, diag = fit_direction(centered.X, indicator, state,
                                              config, rng)
        except SolverError as exc:
            raise type(exc)(f"direction {k}: {exc}") from exc
        nz = np.flatnonzero(beta)
        if nz.size and beta[nz[0]] < 0:
            beta = -beta
            theta = -theta
        betas.append(beta)
        thetas.append(theta)
        per_direction.append(diag)
        state = state.append(theta)
    B = np.column_stack(betas)
    Theta = np.column_stack(thetas)
    Z = centered.X @ B
    centroids = np.vstack([
        Z[indicator.Y[:, i] == 1].mean(axis=0) for i in range(indicator.K)])
    diagnostics = {
        "per_direction": per_direction,
        "fit_seconds": time.perf_counter() - t0,
        "outer_iterations": [d["outer_iterations"] for d in per_direction],
        "final_objectives": [d["final_objective"] for d in per_direction],
    }
    return SosModel(B, Theta, centered.column_means, centered.column_scales,
                    centroids, list(dataset.label_vocab), config, diagnostics)
