"""Five solvers, one subproblem.

Builds a small l1-regularized quadratic instance

    F(beta) = ||X beta||^2 + gamma beta^T beta + d^T beta + lam ||beta||_1

and solves it with plain proximal gradient (sdap), its backtracking variant
(sdapbt), the accelerated versions (sdaap / sdaapbt), and the split-variable
method (sdad).  With a strictly convex quadratic the minimizer is unique, so
all five must land on the same vector.
"""

import numpy as np

from sosda import (IdentityPenalty, SolverOptions, Subproblem, kkt_residual,
                   objective_F, solve_subproblem)

rng = np.random.default_rng(0)
n, p = 8, 12
X = rng.standard_normal((n, p)) / np.sqrt(n * p)
X -= X.mean(axis=0)
d = rng.standard_normal(p)
lam = 0.15 * np.abs(d).max()
sub = Subproblem(X, d, gamma=1e-2, lam=lam, omega=IdentityPenalty())

print(f"subproblem: n={n}, p={p}, lam={lam:.4f}, gamma=1e-2\n")
print(f"{'solver':>8} {'iters':>6} {'F(beta)':>12} {'kkt residual':>13} "
      f"{'nonzeros':>9}")

opts = SolverOptions(max_iter=100000, tol=1e-9)
betas = {}
for method in ("sdap", "sdapbt", "sdaap", "sdaapbt", "sdad"):
    res = solve_subproblem(sub, opts, method=method)
    betas[method] = res.beta
    print(f"{method:>8} {res.iterations:>6} {objective_F(sub, res.beta):>12.8f} "
          f"{kkt_residual(sub, res.beta):>13.2e} "
          f"{int(np.sum(res.beta != 0)):>9}")

print("\npairwise max distance between solutions:",
      f"{max(np.linalg.norm(a - b) for a in betas.values() for b in betas.values()):.2e}")

# the accelerated trace is allowed to wiggle; the plain one never does
ista = solve_subproblem(sub, SolverOptions(max_iter=200, tol=0.0), method="sdap")
fista = solve_subproblem(sub, SolverOptions(max_iter=200, tol=0.0), method="sdaap")
print("plain    trace monotone:", bool((np.diff(ista.objective_trace) <= 1e-14).all()))
print("momentum trace monotone:", bool((np.diff(fista.objective_trace) <= 1e-14).all()),
      "(expected: not necessarily)")
print("momentum reaches 1e-6 suboptimality after",
      int(np.argmax(fista.objective_trace - ista.objective_trace[-1] < 1e-6)),
      "iterations vs", int(np.argmax(ista.objective_trace - ista.objective_trace[-1] < 1e-6)),
      "for plain")
