"""Reproducible Gaussian benchmark generators.

Two covariance designs over K classes whose mean vectors occupy disjoint
blocks of ``block`` coordinates (value 0.7, rest 0):

* type 1: equicorrelation, Sigma_ij = r for i != j, Sigma_ii = 1
* type 2: block-diagonal AR(1), Sigma_ij = r^{|i-j|} within each
  ``block``-wide block, 0 across blocks

Both samplers are exact and O(p) per draw: type 1 superposes an i.i.d.
field with one shared factor per observation, type 2 runs a stationary
AR(1) recursion per block.  A single seeded generator produces the train
classes 1..K and then the test classes 1..K, in that order; within a class
the noise matrix is drawn first (one rng call), then, for type 1, the
shared factors (a second call).
"""

from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import DataError


@dataclass
class SynthSpec:
    kind: str
    p: int
    K: int
    r: float
    n_train_per_class: int = 25
    n_test_per_class: int = 250
    block: int = 100
    mean_value: float = 0.7
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("type1", "type2"):
            raise DataError("kind must be 'type1' or 'type2'")
        if not 0.0 <= self.r < 1.0:
            raise DataError("r must lie in [0, 1)")
        if self.K < 2 or self.p < 1 or self.block < 1:
            raise DataError("need K >= 2, p >= 1, block >= 1")
        if self.n_train_per_class < 1 or self.n_test_per_class < 1:
            raise DataError("per-class sample sizes must be positive")
        if self.p < self.block * self.K:
            raise DataError(
                f"mean design needs p >= block*K = {self.block * self.K}, got p={self.p}")
        if self.kind == "type2" and self.p % self.block != 0:
            raise DataError(f"type 2 needs p divisible by block={self.block}")


def class_mean(spec, i):
    """Mean vector of class i (1-based): one ``block``-wide slab of 0.7."""
    if not 1 <= i <= spec.K:
        raise DataError(f"class index {i} out of range 1..{spec.K}")
    mu = np.zeros(spec.p)
    mu[spec.block * (i - 1):spec.block * i] = spec.mean_value
    return mu


def equicorrelated_rows(rng, m, p, r):
    """m rows from N(0, Sigma), Sigma = (1-r) I + r 11^T."""
    z = rng.standard_normal((m, p))
    if r == 0.0:
        return z
    g = rng.standard_normal((m, 1))
    return np.sqrt(1.0 - r) * z + np.sqrt(r) * g


def ar1_block_rows(rng, m, p, r, block):
    """m rows with stationary AR(1) covariance inside each block, independent across."""
    if p % block != 0:
        raise DataError(f"p={p} is not a multiple of block={block}")
    z = rng.standard_normal((m, p))
    if r == 0.0:
        return z
    x = np.empty_like(z)
    c = np.sqrt(1.0 - r * r)
    for j0 in range(0, p, block):
        x[:, j0] = z[:, j0]
        for j in range(j0 + 1, j0 + block):
            x[:, j] = r * x[:, j - 1] + c * z[:, j]
    return x


def _sample(spec, rng, per_class):
    rows, labels = [], []
    for i in range(1, spec.K + 1):
        if spec.kind == "type1":
            noise = equicorrelated_rows(rng, per_class, spec.p, spec.r)
        else:
            noise = ar1_block_rows(rng, per_class, spec.p, spec.r, spec.block)
        rows.append(class_mean(spec, i) + noise)
        labels.extend([i] * per_class)
    return Dataset(np.vstack(rows), labels, list(range(1, spec.K + 1)))


def sample_type1(spec):
    """Seeded (train, test) pair under the equicorrelation design."""
    if spec.kind != "type1":
        raise DataError("spec.kind is not 'type1'")
    rng = np.random.default_rng(spec.seed)
    return _sample(spec, rng, spec.n_train_per_class), \
        _sample(spec, rng, spec.n_test_per_class)


def sample_type2(spec):
    """Seeded (train, test) pair under the block AR(1) design."""
    if spec.kind != "type2":
        raise DataError("spec.kind is not 'type2'")
    rng = np.random.default_rng(spec.seed)
    return _sample(spec, rng, spec.n_train_per_class), \
        _sample(spec, rng, spec.n_test_per_class)


def sample(spec):
    """Dispatch on spec.kind."""
    return sample_type1(spec) if spec.kind == "type1" else sample_type2(spec)
