"""Seeded random matrix ensembles used by the verification suites.

All generators take an explicit ``numpy.random.Generator`` or integer seed;
there is no global RNG state. Suites split seeds as ``seed + trial_index``
so results are identical regardless of execution order.
"""

import numpy as np

from .operators import PositiveOperator


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rng, rows: int, cols: int) -> np.ndarray:
    """Complex Ginibre matrix: i.i.d. standard complex Gaussian entries."""
    rng = as_rng(rng)
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_isometry(rng, rows: int, cols: int) -> np.ndarray:
    """Haar-distributed isometry via QR of a Ginibre matrix.

    The R-diagonal phases are folded back into Q, which is what makes the
    distribution Haar rather than merely orthonormal.
    """
    if rows < cols:
        raise ValueError(f"isometry needs rows >= cols, got {rows} < {cols}")
    z = ginibre(rng, rows, cols)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(np.where(np.abs(d) > 0, d, 1.0)), 1.0)
    return q * phases


def haar_unitary(rng, dim: int) -> np.ndarray:
    return haar_isometry(rng, dim, dim)


def random_state(rng, dim: int, rank: int | None = None) -> PositiveOperator:
    """Unit-trace positive operator from the Ginibre ensemble (full rank by
    default)."""
    rng = as_rng(rng)
    rank = dim if rank is None else rank
    g = ginibre(rng, dim, rank)
    w = g @ g.conj().T
    return PositiveOperator(w / np.trace(w).real)


def random_positive(
    rng, dim: int, trace_low: float = 0.5, trace_high: float = 2.0
) -> PositiveOperator:
    """Full-rank positive operator with trace drawn uniformly from a range."""
    rng = as_rng(rng)
    t = rng.uniform(trace_low, trace_high)
    return PositiveOperator(t * random_state(rng, dim).matrix)
