"""Deterministic, splittable random streams and correlated-feature sampling.

Each replication gets its own counter-based (Philox) stream keyed on
(master_seed, replication_index), so datasets are identical no matter how
replications are scheduled across threads. Normal variates come from
numpy's ziggurat sampler, fixed project-wide so golden values stay stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite

_CHOLESKY_PIVOT_FLOOR = 1e-12


@dataclass(frozen=True)
class SeedSpec:
    """Key for one replication's random stream."""

    master_seed: int
    replication_index: int

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if self.replication_index < 0:
            raise ValueError("replication_index must be non-negative")


@dataclass(frozen=True)
class CovarianceSpec:
    """Geometric-decay correlation: Sigma[k, j] = c ** |j - k|."""

    p: int
    c: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be positive")

    def matrix(self) -> np.ndarray:
        idx = np.arange(self.p)
        return self.c ** np.abs(idx[:, None] - idx[None, :])


def derive_stream(seed_spec: SeedSpec) -> np.random.Generator:
    """Pure function of (master_seed, replication_index) -> independent stream."""
    key = np.array(
        [seed_spec.master_seed, seed_spec.replication_index], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def sample_standard_normal(stream: np.random.Generator, count: int) -> np.ndarray:
    if count < 1:
        raise ValueError("count must be >= 1")
    return stream.standard_normal(count)


def cholesky_factor(cov: CovarianceSpec) -> np.ndarray:
    """Lower-triangular L with L @ L.T == Sigma.

    Raises NotPositiveDefinite when |c| >= 1 (or any pivot collapses).
    """
    if not abs(cov.c) < 1:
        raise NotPositiveDefinite(f"|c| must be < 1, got c={cov.c}")
    try:
        factor = np.linalg.cholesky(cov.matrix())
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    if np.min(np.diag(factor)) ** 2 <= _CHOLESKY_PIVOT_FLOOR:
        raise NotPositiveDefinite("pivot below tolerance")
    return factor


def sample_mvn_rows(
    stream: np.random.Generator, cov: CovarianceSpec, n: int
) -> np.ndarray:
    """n independent rows from N(0, Sigma), via z @ L.T."""
    if n < 1:
        raise ValueError("n must be >= 1")
    factor = cholesky_factor(cov)
    z = stream.standard_normal((n, cov.p))
    return z @ factor.T
