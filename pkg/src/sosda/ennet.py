"""Solvers for the l1-regularized quadratic ("generalized elastic net") subproblem.

The subproblem minimizes

    F(beta) = 0.5 * beta^T A beta + d^T beta + lam * ||beta||_1,
    A = 2 * (X^T X + gamma * Omega),

where A is never formed: every solver touches it only through X products and
penalty matvecs, so the per-iteration cost is O(n p) for identity/diagonal
regularizers and O((r + n) p) for rank-r factored ones.

Five entry points share this contract:

* ``solve_ista``      proximal gradient, constant step or backtracking
* ``solve_fista``     accelerated proximal gradient, constant step
* ``solve_fista_bt``  accelerated proximal gradient with backtracking
* ``solve_admm``      split x/y variables with an exact linear x-update
* ``solve_subproblem`` dispatch by solver id ("sdap", "sdapbt", "sdaap",
  "sdaapbt", "sdad")

A solver reports ``converged=True`` only when its stopping rule fires *and*
the first-order optimality residual satisfies
``kkt_residual(sub, beta) <= 100 * tol * (1 + ||d||_inf)``; hitting
``max_iter`` returns the last iterate with ``converged=False``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BacktrackingError, DataError, SolverError
from .penalty import (DiagonalPenalty, IdentityPenalty, LowRankPenalty,
                      PenaltySpec, dense_matrix, lipschitz_bound,
                      m_inverse_apply, omega_matvec, omega_quadform)

SOLVER_IDS = ("sdap", "sdapbt", "sdaap", "sdaapbt", "sdad")


class Subproblem:
    """One l1-regularized quadratic instance: (X, d, gamma, lam, Omega).

    ``with_d`` / ``with_lam`` return siblings sharing the cached ADMM
    factorization, which depends only on (X, gamma, Omega, mu).
    """

    def __init__(self, X, d, gamma, lam, omega=None):
        self.X = np.asarray(X, dtype=float)
        self.d = np.asarray(d, dtype=float)
        if self.X.ndim != 2:
            raise DataError("X must be an n x p matrix")
        self.n, self.p = self.X.shape
        if self.d.shape != (self.p,):
            raise DataError(f"d has shape {self.d.shape}, expected ({self.p},)")
        if gamma < 0 or lam < 0:
            raise DataError("gamma and lam must be nonnegative")
        self.gamma = float(gamma)
        self.lam = float(lam)
        self.omega = omega if omega is not None else IdentityPenalty()
        if not isinstance(self.omega, PenaltySpec):
            raise DataError("omega must be a PenaltySpec")
        self._admm_cache = {}

    def with_d(self, d):
        sub = Subproblem(self.X, d, self.gamma, self.lam, self.omega)
        sub._admm_cache = self._admm_cache
        return sub

    def with_lam(self, lam):
        sub = Subproblem(self.X, self.d, self.gamma, lam, self.omega)
        sub._admm_cache = self._admm_cache
        return sub

    def dense_A(self):
        """Materialize A = 2(X^T X + gamma*Omega); small-p oracles only."""
        return 2.0 * (self.X.T @ self.X + self.gamma * dense_matrix(self.omega, self.p))


@dataclass
class SolverOptions:
    """Iteration controls shared by all solvers.

    ``alpha`` is the constant step; None means 1 / lipschitz_bound(...).
    ``L0`` and ``eta`` drive the backtracking variants, ``mu`` is the ADMM
    augmented-Lagrangian weight.  The accelerated backtracking acceptance is
    the curvature test (beta-y)^T ((L/2) I - A)(beta-y) >= 0 by default;
    set ``fista_bt_rule="sufficient_decrease"`` for the classical
    descent-lemma test.
    """

    max_iter: int = 1000
    tol: float = 1e-5
    alpha: float | None = None
    L0: float = 0.25
    eta: float = 1.25
    mu: float = 2.5
    fista_bt_rule: str = "curvature"

    def __post_init__(self):
        if self.max_iter < 1:
            raise DataError("max_iter must be at least 1")
        if self.tol < 0:
            raise DataError("tol must be nonnegative")
        if self.alpha is not None and self.alpha <= 0:
            raise DataError("alpha must be positive")
        if self.L0 <= 0 or self.eta <= 1 or self.mu <= 0:
            raise DataError("need L0 > 0, eta > 1, mu > 0")
        if self.fista_bt_rule not in ("curvature", "sufficient_decrease"):
            raise DataError(f"unknown fista_bt_rule {self.fista_bt_rule!r}")


@dataclass
class SolverResult:
    beta: np.ndarray
    iterations: int
    objective_trace: np.ndarray
    converged: bool
    solver_id: str
    final_L: float | None = None


def soft_threshold(y, tau):
    """Entrywise shrinkage sign(y) * max(|y| - tau, 0).

    Computed as y - clip(y, -tau, tau): identical values in two array
    passes instead of five.
    """
    if tau < 0:
        raise DataError("threshold must be nonnegative")
    y = np.asarray(y, dtype=float)
    return y - np.clip(y, -tau, tau)


def grad_f(sub, beta):
    """Gradient of the smooth part: 2 X^T(X beta) + 2 gamma Omega beta + d."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (sub.p,):
        raise DataError(f"beta has shape {beta.shape}, expected ({sub.p},)")
    g = 2.0 * (sub.X.T @ (sub.X @ beta)) + sub.d
    if sub.gamma:
        g = g + 2.0 * sub.gamma * omega_matvec(sub.omega, beta)
    return g


def _f_smooth(sub, beta, Xb=None):
    if Xb is None:
        Xb = sub.X @ beta
    val = float(Xb @ Xb) + float(sub.d @ beta)
    if sub.gamma:
        val += sub.gamma * omega_quadform(sub.omega, beta)
    return val


def objective_F(sub, beta):
    """F(beta) = ||X beta||^2 + gamma beta^T Omega beta + d^T beta + lam ||beta||_1."""
    beta = np.asarray(beta, dtype=float)
    return _f_smooth(sub, beta) + sub.lam * float(np.abs(beta).sum())


def _F_from(sub, beta, Xb):
    # objective_F with the X @ beta product already in hand
    val = float(Xb @ Xb) + float(sub.d @ beta) + sub.lam * float(np.abs(beta).sum())
    if sub.gamma:
        val += sub.gamma * omega_quadform(sub.omega, beta)
    return val


def kkt_residual(sub, beta):
    """Distance of -grad_f(beta) from lam * subdifferential of ||.||_1, max over coords.

    Zero exactly at minimizers: |g_i + lam*sign(beta_i)| on the support,
    max(|g_i| - lam, 0) off it.
    """
    beta = np.asarray(beta, dtype=float)
    g = grad_f(sub, beta)
    on = beta != 0.0
    res = np.where(on, np.abs(g + sub.lam * np.sign(beta)),
                   np.maximum(np.abs(g) - sub.lam, 0.0))
    return float(res.max()) if res.size else 0.0


def _kkt_ok(sub, beta, tol):
    return kkt_residual(sub, beta) <= 100.0 * tol * (1.0 + np.abs(sub.d).max(initial=0.0))


def _default_alpha(sub, opts):
    if opts.alpha is not None:
        return opts.alpha
    L = lipschitz_bound(sub.omega, sub.X, sub.gamma)
    if L <= 0:
        raise SolverError("subproblem has zero curvature; supply an explicit step size")
    return 1.0 / L


def _check_finite(value, t):
    if not np.isfinite(value):
        raise SolverError(f"objective became non-finite at iteration {t}; "
                          "the supplied step size is too large")


def backtrack_step(sub, x, L_prev, eta):
    """One backtracked proximal step from ``x``.

    Tries L = eta^k * L_prev for k = 0, 1, ... and accepts the first
    proximal step x+ = S_{lam/L}(x - grad f(x)/L) satisfying
    f(x+) <= f(x) + grad f(x)^T (x+ - x) + (L/2) ||x+ - x||^2.
    Returns (x+, accepted L).
    """
    if L_prev <= 0 or eta <= 1:
        raise DataError("need L_prev > 0 and eta > 1")
    g = grad_f(sub, x)
    f_x = _f_smooth(sub, x)
    slack = 1e-12 * max(1.0, abs(f_x))
    for k in range(101):
        L = (eta ** k) * L_prev
        x_next = soft_threshold(x - g / L, sub.lam / L)
        delta = x_next - x
        quad = f_x + float(g @ delta) + 0.5 * L * float(delta @ delta)
        if _f_smooth(sub, x_next) <= quad + slack:
            return x_next, L
    raise BacktrackingError("backtracking failed after 100 step-size increases")


def solve_ista(sub, opts=None, beta0=None, backtracking=False):
    """Proximal gradient iteration beta <- S_{lam*alpha}(beta - alpha*grad f).

    Constant step alpha (default 1/L-bound) or, with ``backtracking=True``,
    the increasing line search of ``backtrack_step``.  Stops once
    ||beta+ - beta|| <= tol * max(1, ||beta||) and the KKT residual check
    passes.  The recorded objective trace is nonincreasing.
    """
    opts = opts or SolverOptions()
    beta = np.zeros(sub.p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    alpha = None if backtracking else _default_alpha(sub, opts)
    L = opts.L0
    X = sub.X
    Xb = X @ beta  # maintained so each iteration streams X only twice
    trace = [_F_from(sub, beta, Xb)]
    converged = False
    t = 0
    for t in range(opts.max_iter):
        if backtracking:
            beta_next, L = backtrack_step(sub, beta, L, opts.eta)
        else:
            g = 2.0 * (X.T @ Xb) + sub.d
            if sub.gamma:
                g += 2.0 * sub.gamma * omega_matvec(sub.omega, beta)
            beta_next = soft_threshold(beta - alpha * g, sub.lam * alpha)
        Xb_next = X @ beta_next
        F = _F_from(sub, beta_next, Xb_next)
        _check_finite(F, t)
        trace.append(F)
        step = float(np.linalg.norm(beta_next - beta))
        small = step <= opts.tol * max(1.0, float(np.linalg.norm(beta)))
        beta, Xb = beta_next, Xb_next
        if small and _kkt_ok(sub, beta, opts.tol):
            converged = True
            break
    return SolverResult(beta, t + 1, np.asarray(trace), converged,
                        "sdapbt" if backtracking else "sdap",
                        final_L=L if backtracking else None)


def solve_fista(sub, opts=None, beta0=None):
    """Accelerated proximal gradient with momentum weights t/(t+3).

    Same stopping rule as ``solve_ista``; the objective trace may be
    nonmonotone, which is why convergence is re-checked through the KKT
    residual.
    """
    opts = opts or SolverOptions()
    beta = np.zeros(sub.p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    beta_prev = beta
    alpha = _default_alpha(sub, opts)
    X = sub.X
    Xb_cur = X @ beta
    Xb_prev = Xb_cur
    trace = [_F_from(sub, beta, Xb_cur)]
    converged = False
    t = 0
    for t in range(opts.max_iter):
        w = t / (t + 3.0)
        y = beta + w * (beta - beta_prev)
        Xy = (1.0 + w) * Xb_cur - w * Xb_prev  # X @ y by linearity
        g = 2.0 * (X.T @ Xy) + sub.d
        if sub.gamma:
            g += 2.0 * sub.gamma * omega_matvec(sub.omega, y)
        beta_next = soft_threshold(y - alpha * g, sub.lam * alpha)
        Xb_next = X @ beta_next
        F = _F_from(sub, beta_next, Xb_next)
        _check_finite(F, t)
        trace.append(F)
        step = float(np.linalg.norm(beta_next - beta))
        small = step <= opts.tol * max(1.0, float(np.linalg.norm(beta)))
        beta_prev, beta = beta, beta_next
        Xb_prev, Xb_cur = Xb_cur, Xb_next
        if small and _kkt_ok(sub, beta, opts.tol):
            converged = True
            break
    return SolverResult(beta, t + 1, np.asarray(trace), converged, "sdaap")


def solve_fista_bt(sub, opts=None, beta0=None):
    """Accelerated proximal gradient with backtracked step sizes.

    The candidate L = eta^k * L_{t-1} is accepted once the curvature test
    (beta+ - y)^T ((L/2) I - A) (beta+ - y) >= 0 holds (or the classical
    sufficient-decrease test when configured); L never decreases within a
    run.
    """
    opts = opts or SolverOptions()
    beta = np.zeros(sub.p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    beta_prev = beta
    L = opts.L0
    X = sub.X
    Xb_cur = X @ beta
    Xb_prev = Xb_cur
    trace = [_F_from(sub, beta, Xb_cur)]
    converged = False
    t = 0
    for t in range(opts.max_iter):
        w = t / (t + 3.0)
        y = beta + w * (beta - beta_prev)
        Xy = (1.0 + w) * Xb_cur - w * Xb_prev
        g = 2.0 * (X.T @ Xy) + sub.d
        if sub.gamma:
            g += 2.0 * sub.gamma * omega_matvec(sub.omega, y)
        if opts.fista_bt_rule == "sufficient_decrease":
            f_y = float(Xy @ Xy) + float(sub.d @ y)
            if sub.gamma:
                f_y += sub.gamma * omega_quadform(sub.omega, y)
        accepted = None
        for k in range(101):
            L_try = (opts.eta ** k) * L
            beta_next = soft_threshold(y - g / L_try, sub.lam / L_try)
            Xb_next = X @ beta_next
            v = beta_next - y
            if opts.fista_bt_rule == "curvature":
                Xv = Xb_next - Xy
                vAv = 2.0 * float(Xv @ Xv)
                if sub.gamma:
                    vAv += 2.0 * sub.gamma * omega_quadform(sub.omega, v)
                ok = 0.5 * L_try * float(v @ v) - vAv >= -1e-12 * max(1.0, abs(vAv))
            else:
                f_next = float(Xb_next @ Xb_next) + float(sub.d @ beta_next)
                if sub.gamma:
                    f_next += sub.gamma * omega_quadform(sub.omega, beta_next)
                quad = f_y + float(g @ v) + 0.5 * L_try * float(v @ v)
                ok = f_next <= quad + 1e-12 * max(1.0, abs(f_y))
            if ok:
                accepted = (beta_next, Xb_next, L_try)
                break
        if accepted is None:
            raise BacktrackingError("backtracking failed after 100 step-size increases")
        beta_next, Xb_next, L = accepted
        F = _F_from(sub, beta_next, Xb_next)
        _check_finite(F, t)
        trace.append(F)
        step = float(np.linalg.norm(beta_next - beta))
        small = step <= opts.tol * max(1.0, float(np.linalg.norm(beta)))
        beta_prev, beta = beta, beta_next
        Xb_prev, Xb_cur = Xb_cur, Xb_next
        if small and _kkt_ok(sub, beta, opts.tol):
            converged = True
            break
    return SolverResult(beta, t + 1, np.asarray(trace), converged, "sdaapbt", final_L=L)


def _admm_bundle(sub, mu):
    """Solver for (mu*I + A) x = b, factorized once per (subproblem, mu)."""
    bundle = sub._admm_cache.get(mu)
    if bundle is not None:
        return bundle
    if isinstance(sub.omega, (IdentityPenalty, DiagonalPenalty, LowRankPenalty)):
        # Woodbury route: (M + 2 X^T X)^{-1} b
        #   = M^{-1} b - 2 M^{-1} X^T (I + 2 X M^{-1} X^T)^{-1} X M^{-1} b
        if isinstance(sub.omega, IdentityPenalty):
            recip = 1.0 / (mu + 2.0 * sub.gamma)
            Mi = lambda V: recip * V
        elif isinstance(sub.omega, DiagonalPenalty):
            recip = 1.0 / (mu + 2.0 * sub.gamma * sub.omega.u)
            Mi = lambda V: recip[:, None] * V if V.ndim == 2 else recip * V
        else:
            Mi = lambda V: m_inverse_apply(sub.omega, mu, sub.gamma, V)
        S = np.eye(sub.n) + 2.0 * (sub.X @ Mi(sub.X.T))
        cf = scipy.linalg.cho_factor(S)
        X = sub.X

        def solver(b):
            # M^{-1}X^T u applied as M^{-1}(X^T u): both streams touch the
            # same X, so the matrix stays cache-resident between them
            t1 = Mi(b)
            u = scipy.linalg.cho_solve(cf, X @ t1)
            return t1 - Mi(X.T @ (2.0 * u))
    else:
        M = mu * np.eye(sub.p) + sub.dense_A()
        cf = scipy.linalg.cho_factor(M)

        def solver(b):
            return scipy.linalg.cho_solve(cf, b)
    sub._admm_cache[mu] = solver
    return solver


def admm_x_update(sub, mu, b):
    """Solve (mu*I + A) x = b through the structure-matched route.

    Diagonal and factored regularizers go through the Woodbury identity with
    a cached n x n factorization; dense ones through a cached Cholesky of
    the full p x p matrix.
    """
    if mu <= 0:
        raise DataError("mu must be positive")
    b = np.asarray(b, dtype=float)
    if b.shape != (sub.p,):
        raise DataError(f"b has shape {b.shape}, expected ({sub.p},)")
    return _admm_bundle(sub, mu)(b)


def solve_admm(sub, opts=None, beta0=None):
    """Split-variable method: exact x-update, shrinkage y-update, dual ascent.

    Iterates
        (mu*I + A) x = -d + mu*y - z
        y = S_{lam/mu}(x + z/mu)
        z = z + mu*(x - y)
    and stops when both the primal residual ||x - y|| and the scaled dual
    residual mu*||y+ - y|| fall below tol (relative), with the same KKT
    confirmation as the proximal solvers.  Returns the sparse iterate y;
    the objective trace is recorded on y.
    """
    opts = opts or SolverOptions()
    mu = opts.mu
    x = np.zeros(sub.p) if beta0 is None else np.asarray(beta0, dtype=float).copy()
    y = x.copy()
    z = np.zeros(sub.p)
    solver = _admm_bundle(sub, mu)
    trace = [objective_F(sub, y)]
    converged = False
    t = 0
    for t in range(opts.max_iter):
        x = solver(-sub.d + mu * y - z)
        y_next = soft_threshold(x + z / mu, sub.lam / mu)
        z = z + mu * (x - y_next)
        F = objective_F(sub, y_next)
        _check_finite(F, t)
        trace.append(F)
        primal = float(np.linalg.norm(x - y_next))
        dual = mu * float(np.linalg.norm(y_next - y))
        y = y_next
        primal_ok = primal <= opts.tol * max(1.0, float(np.linalg.norm(x)),
                                             float(np.linalg.norm(y)))
        dual_ok = dual <= opts.tol * max(1.0, float(np.linalg.norm(z)))
        if primal_ok and dual_ok and _kkt_ok(sub, y, opts.tol):
            converged = True
            break
    return SolverResult(y, t + 1, np.asarray(trace), converged, "sdad")


def solve_subproblem(sub, opts=None, beta0=None, method="sdaap"):
    """Dispatch one subproblem solve by solver id."""
    if method == "sdap":
        return solve_ista(sub, opts, beta0)
    if method == "sdapbt":
        return solve_ista(sub, opts, beta0, backtracking=True)
    if method == "sdaap":
        return solve_fista(sub, opts, beta0)
    if method == "sdaapbt":
        return solve_fista_bt(sub, opts, beta0)
    if method == "sdad":
        return solve_admm(sub, opts, beta0)
    raise DataError(f"unknown solver id {method!r}; expected one of {SOLVER_IDS}")
