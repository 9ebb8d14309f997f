"""Dense Hermitian and positive-semidefinite matrix machinery.

Everything downstream (divergences, channels, ladders) is built on the four
wrapper types defined here. The wrappers validate their invariants once at
construction, freeze their arrays, and are safe to share between threads.

Spectral conventions, fixed for reproducibility:

* eigenvalues are reported in descending order;
* inside a degenerate eigenspace the eigenvectors are re-orthonormalized
  against the canonical basis by Gram-Schmidt in index order, and each
  eigenvector's largest-magnitude entry is phased to be real positive, so
  different LAPACK backends agree up to the unavoidable phase freedom
  (downstream code works with projectors, never raw vectors);
* eigenvalues of a positive operator that land in the small negative band
  produced by roundoff are clamped to zero at construction.
"""

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatch,
    NonHermitianInput,
    NonPositiveWeight,
    NotPositiveSemidefinite,
)
from .extreal import ExtendedNonNegative

#: relative tolerance for the hermiticity invariant
HERMITICITY_RTOL = 1e-12
#: relative width of the negative eigenvalue band clamped to zero
PSD_CLAMP_RTOL = 1e-10
#: projector idempotence tolerance (operator norm)
PROJECTOR_TOL = 1e-10
#: isometry defect tolerance (operator norm)
ISOMETRY_TOL = 1e-10
#: factor for the default support rank tolerance, 1e-9 * max(lambda_max, 1)
DEFAULT_RANK_TOL_FACTOR = 1e-9
#: relative gap below which eigenvalues are treated as degenerate
DEGENERACY_RTOL = 1e-8


def _as_complex_array(entries, dim_hint: int | None = None) -> np.ndarray:
    a = np.array(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if dim_hint is not None and a.shape[0] != dim_hint:
        raise DimensionMismatch(f"expected dimension {dim_hint}, got {a.shape[0]}")
    return a


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(a), ord=2))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.norm(np.asarray(a), ord="nuc"))


def matrix_of(x) -> np.ndarray:
    """The raw complex array behind any wrapper type, or the array itself."""
    return x.matrix if hasattr(x, "matrix") else np.asarray(x, dtype=complex)


def _canonical_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """eigh with descending eigenvalues and deterministic eigenvectors.

    Degeneracy is judged relative to the eigenvalues' own magnitudes, so
    distinct eigenvalues many decades below the top of the spectrum are
    never lumped together; exact ties (gap zero) always cluster.
    """
    w, v = np.linalg.eigh(a)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    dim = a.shape[0]

    def _near(x: float, y: float) -> bool:
        return abs(x - y) <= DEGENERACY_RTOL * max(abs(x), abs(y))

    i = 0
    while i < dim:
        j = i + 1
        while j < dim and _near(w[j - 1], w[j]):
            j += 1
        if j - i > 1:
            v[:, i:j] = _canonical_subspace_basis(v[:, i:j])
        else:
            v[:, i] = _fix_phase(v[:, i])
        i = j
    return w, v


def _canonical_subspace_basis(block: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(block) via Gram-Schmidt
    over the projected canonical basis vectors, in index order."""
    dim, k = block.shape
    proj = block @ block.conj().T
    basis: list[np.ndarray] = []
    for idx in range(dim):
        if len(basis) == k:
            break
        cand = proj[:, idx].copy()
        for u in basis:
            cand -= u * (u.conj() @ cand)
        norm = np.linalg.norm(cand)
        if norm > 1e-6:
            basis.append(cand / norm)
    if len(basis) < k:
        # projected canonical vectors did not span; keep the backend vectors
        return np.column_stack([_fix_phase(block[:, c]) for c in range(k)])
    return np.column_stack([_fix_phase(u) for u in basis])


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(vec)))
    entry = vec[pivot]
    if abs(entry) == 0.0:
        return vec
    return vec * (entry.conjugate() / abs(entry))


@dataclass(frozen=True)
class HermitianMatrix:
    """A square complex matrix equal to its conjugate transpose.

    The hermiticity defect must not exceed ``HERMITICITY_RTOL`` relative to
    the largest entry magnitude; the stored matrix is symmetrized exactly.
    """

    matrix: np.ndarray

    def __init__(self, entries):
        a = _as_complex_array(entries)
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        if defect > HERMITICITY_RTOL * scale:
            raise NonHermitianInput(
                f"hermiticity invariant violated: max deviation {defect:.3e} "
                f"exceeds {HERMITICITY_RTOL:.0e} * {scale:.3e}"
            )
        object.__setattr__(self, "matrix", _freeze((a + a.conj().T) / 2.0))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class PositiveOperator:
    """A positive semidefinite matrix with finite trace.

    Eigenvalues in the negative roundoff band ``[-eps_psd, 0)`` are clamped
    to zero at construction; anything below the band raises. The spectral
    decomposition is computed once and cached on the instance.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    trace: float

    def __init__(self, entries):
        herm = entries if isinstance(entries, HermitianMatrix) else HermitianMatrix(entries)
        a = herm.matrix
        w, v = _canonical_eigh(a)
        scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        eps = PSD_CLAMP_RTOL * scale
        low = float(w.min()) if w.size else 0.0
        if low < -eps:
            raise NotPositiveSemidefinite(
                f"positivity invariant violated: eigenvalue {low:.3e} below "
                f"-eps_psd = {-eps:.3e}"
            )
        clamped = w.copy()
        negatives = clamped < 0.0
        if negatives.any():
            clamped[negatives] = 0.0
            a = v @ np.diag(clamped) @ v.conj().T
            a = (a + a.conj().T) / 2.0
        object.__setattr__(self, "matrix", _freeze(a.copy() if a.flags.writeable else a))
        object.__setattr__(self, "eigenvalues", _freeze(clamped))
        object.__setattr__(self, "eigenvectors", _freeze(v))
        object.__setattr__(self, "trace", float(clamped.sum()))

    @classmethod
    def diagonal(cls, values: Iterable[float]) -> "PositiveOperator":
        return cls(np.diag(np.asarray(list(values), dtype=float)).astype(complex))

    @classmethod
    def pure(cls, vector) -> "PositiveOperator":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot form a pure state from the zero vector")
        v = v / n
        return cls(np.outer(v, v.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_zero(self) -> bool:
        return self.trace == 0.0

    def hermitian(self) -> HermitianMatrix:
        return HermitianMatrix(self.matrix)

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class Projector:
    """An orthogonal projector: Hermitian, idempotent, integer trace."""

    matrix: np.ndarray
    rank: int

    def __init__(self, entries):
        herm = entries if isinstance(entries, HermitianMatrix) else HermitianMatrix(entries)
        a = herm.matrix
        defect = operator_norm(a @ a - a)
        if defect > PROJECTOR_TOL:
            raise NotPositiveSemidefinite(
                f"projector invariant violated: ||P^2 - P|| = {defect:.3e} > {PROJECTOR_TOL:.0e}"
            )
        tr = float(np.trace(a).real)
        rank = int(round(tr))
        if abs(tr - rank) > 1e-8:
            raise NotPositiveSemidefinite(
                f"projector invariant violated: trace {tr!r} is not within 1e-8 of an integer"
            )
        object.__setattr__(self, "matrix", _freeze(a))
        object.__setattr__(self, "rank", rank)

    @classmethod
    def from_columns(cls, columns: np.ndarray) -> "Projector":
        cols = np.asarray(columns, dtype=complex)
        if cols.ndim == 1:
            cols = cols[:, None]
        return cls(cols @ cols.conj().T)

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def zero(cls, dim: int) -> "Projector":
        return cls(np.zeros((dim, dim), dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "Projector":
        return Projector(np.eye(self.dim, dtype=complex) - self.matrix)

    def compress(self, rho: PositiveOperator) -> PositiveOperator:
        """P rho P as a positive operator."""
        return PositiveOperator(self.matrix @ matrix_of(rho) @ self.matrix)

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class IsometryMatrix:
    """A rows x cols matrix V with V* V = identity on the column space."""

    matrix: np.ndarray

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] < a.shape[1]:
            raise DimensionMismatch(
                f"isometry requires rows >= cols, got shape {a.shape}"
            )
        defect = operator_norm(a.conj().T @ a - np.eye(a.shape[1]))
        if defect > ISOMETRY_TOL:
            raise NonHermitianInput(
                f"isometry invariant violated: ||V*V - I|| = {defect:.3e} > {ISOMETRY_TOL:.0e}"
            )
        object.__setattr__(self, "matrix", _freeze(a))

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def apply(self, rho: PositiveOperator) -> PositiveOperator:
        """V rho V* on the larger space."""
        return PositiveOperator(self.matrix @ matrix_of(rho) @ self.matrix.conj().T)

    def __array__(self, dtype=None):
        return np.asarray(self.matrix, dtype=dtype)


def spectral_decompose(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvector columns of a
    Hermitian matrix, with the deterministic tie-breaking described in the
    module docstring.
    """
    if isinstance(a, PositiveOperator):
        return a.eigenvalues.copy(), a.eigenvectors.copy()
    herm = a if isinstance(a, HermitianMatrix) else HermitianMatrix(a)
    return _canonical_eigh(herm.matrix)


def default_rank_tol(rho: PositiveOperator | HermitianMatrix | np.ndarray) -> float:
    """1e-9 * max(largest eigenvalue magnitude, 1).

    This is the single most consequential numerical knob in the toolkit: it
    decides which eigenvalues count as support and therefore whether a
    divergence is finite. Every operation that consumes it accepts an
    override.
    """
    if isinstance(rho, PositiveOperator):
        top = float(rho.eigenvalues[0]) if rho.dim else 0.0
    else:
        m = matrix_of(rho)
        top = float(np.max(np.abs(np.linalg.eigvalsh(m)))) if m.size else 0.0
    return DEFAULT_RANK_TOL_FACTOR * max(top, 1.0)


def support_projector(rho: PositiveOperator, rank_tol: float | None = None) -> Projector:
    """Projector onto the span of eigenvectors with eigenvalue > rank_tol.

    The zero operator yields the rank-0 projector.
    """
    if not isinstance(rho, PositiveOperator):
        rho = PositiveOperator(rho)
    if rank_tol is None:
        rank_tol = default_rank_tol(rho)
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    keep = rho.eigenvalues > rank_tol
    if not keep.any():
        return Projector.zero(rho.dim)
    return Projector.from_columns(rho.eigenvectors[:, keep])


def tensor_product(a: PositiveOperator, b: PositiveOperator) -> PositiveOperator:
    """Kronecker product; traces multiply, positivity is preserved."""
    return PositiveOperator(np.kron(matrix_of(a), matrix_of(b)))


def partial_trace_env(x, dim_sys: int, dim_env: int) -> PositiveOperator:
    """Trace out the trailing environment factor of an operator on sys (x) env.

    Index convention: row index = s * dim_env + e, matching ``np.kron``.
    """
    m = matrix_of(x)
    if m.shape[0] != dim_sys * dim_env:
        raise DimensionMismatch(
            f"operator has dimension {m.shape[0]}, expected {dim_sys} * {dim_env}"
        )
    four = m.reshape(dim_sys, dim_env, dim_sys, dim_env)
    return PositiveOperator(np.trace(four, axis1=1, axis2=3))


def trace_product(weight, rho: PositiveOperator) -> ExtendedNonNegative:
    """Tr(H rho) for a positive semidefinite weight H, evaluated spectrally.

    The defining rule for unbounded weights carries an infinite branch for
    states supported outside the closure of the weight's domain. At finite
    dimension the domain is the whole space, so that branch is unreachable
    and the result is always finite; it is kept in the contract (and the
    return type) for interface completeness only.
    """
    h, vh = spectral_decompose(weight)
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    eps = PSD_CLAMP_RTOL * scale
    if h.size and float(h.min()) < -eps:
        raise NonPositiveWeight(
            f"weight has eigenvalue {float(h.min()):.3e} below -eps_psd = {-eps:.3e}"
        )
    h = np.where(h < 0.0, 0.0, h)
    m = matrix_of(rho)
    overlaps = np.einsum("ij,jk,ki->i", vh.conj().T, m, vh).real
    return ExtendedNonNegative.finite(float(h @ overlaps))


def conjugate(u, rho: PositiveOperator) -> PositiveOperator:
    """U rho U* for a unitary U."""
    um = matrix_of(u)
    return PositiveOperator(um @ matrix_of(rho) @ um.conj().T)


def trace_distance(a, b) -> float:
    """Trace-norm distance between two operators."""
    return trace_norm(matrix_of(a) - matrix_of(b))


def psd_order_defect(a, b) -> float:
    """How far b - a is from being positive semidefinite (0 when a <= b)."""
    gap = np.linalg.eigvalsh(matrix_of(b) - matrix_of(a))
    low = float(gap.min()) if gap.size else 0.0
    return max(0.0, -low)


def identity_operator(dim: int) -> PositiveOperator:
    return PositiveOperator(np.eye(dim, dtype=complex))


def zero_operator(dim: int) -> PositiveOperator:
    return PositiveOperator(np.zeros((dim, dim), dtype=complex))
