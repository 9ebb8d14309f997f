"""Quantum operations and channels in Kraus form.

A quantum operation is a completely positive trace-non-increasing linear map
rho -> sum_i K_i rho K_i*; a channel is the trace-preserving case. This
module provides validation, application, the dual map, dilation to an
isometry into system (x) environment, the trace-preserving extension of an
operation onto one extra output coordinate, pinching maps, and seeded random
ensembles of channels and operations.
"""

import enum
import re
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidQuantumMap
from .operators import (
    HermitianMatrix,
    IsometryMatrix,
    PositiveOperator,
    Projector,
    matrix_of,
    operator_norm,
    partial_trace_env,
)
from .sampling import as_rng, haar_isometry

#: defect below which the Kraus gram matrix counts as the identity
CHANNEL_TOL = 1e-9
#: eigenvalues of I - sum K*K above this bound still count as PSD
OPERATION_PSD_TOL = 1e-10


class MapKind(enum.Enum):
    CHANNEL = "channel"
    OPERATION = "operation"
    INVALID = "invalid"


@dataclass(frozen=True)
class Validation:
    kind: MapKind
    #: most negative eigenvalue of I - sum K*K (0 when none are negative)
    defect: float


@dataclass(frozen=True)
class KrausOperation:
    """A CP map given by a finite Kraus family of dim_out x dim_in matrices.

    Construction is lenient: families that fail the trace-non-increasing
    bound are representable so that ``validate`` can classify them.
    """

    dim_in: int
    dim_out: int
    kraus: tuple

    def __init__(self, kraus):
        ops = tuple(np.array(k, dtype=complex) for k in kraus)
        if not ops:
            raise ValueError("a Kraus family needs at least one operator")
        rows, cols = ops[0].shape
        for k in ops:
            if k.shape != (rows, cols):
                raise DimensionMismatch(
                    f"inconsistent Kraus shapes: {k.shape} vs {(rows, cols)}"
                )
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "dim_in", cols)
        object.__setattr__(self, "dim_out", rows)
        object.__setattr__(self, "kraus", ops)

    @property
    def kraus_rank(self) -> int:
        return len(self.kraus)

    def gram(self) -> np.ndarray:
        """sum_i K_i* K_i on the input space."""
        g = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for k in self.kraus:
            g += k.conj().T @ k
        return g

    def validate(self) -> Validation:
        """Classify by the spectrum of I - sum K_i* K_i."""
        slack = np.eye(self.dim_in) - self.gram()
        slack = (slack + slack.conj().T) / 2.0
        eigs = np.linalg.eigvalsh(slack)
        low = float(eigs.min())
        if operator_norm(slack) <= CHANNEL_TOL:
            return Validation(MapKind.CHANNEL, defect=min(low, 0.0))
        if low >= -OPERATION_PSD_TOL:
            return Validation(MapKind.OPERATION, defect=min(low, 0.0))
        return Validation(MapKind.INVALID, defect=low)

    @property
    def is_channel(self) -> bool:
        return self.validate().kind is MapKind.CHANNEL

    def apply(self, rho: PositiveOperator) -> PositiveOperator:
        """sum_i K_i rho K_i*."""
        m = matrix_of(rho)
        if m.shape[0] != self.dim_in:
            raise DimensionMismatch(
                f"state dimension {m.shape[0]} does not match dim_in {self.dim_in}"
            )
        out = np.zeros((self.dim_out, self.dim_out), dtype=complex)
        for k in self.kraus:
            out += k @ m @ k.conj().T
        return PositiveOperator(out)

    def apply_dual(self, b) -> HermitianMatrix:
        """The dual map sum_i K_i* B K_i, adjoint for the trace pairing."""
        bm = matrix_of(b)
        if bm.shape[0] != self.dim_out:
            raise DimensionMismatch(
                f"observable dimension {bm.shape[0]} does not match dim_out {self.dim_out}"
            )
        out = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for k in self.kraus:
            out += k.conj().T @ bm @ k
        return HermitianMatrix(out)


@dataclass(frozen=True)
class StinespringDilation:
    """Dilation V of a CP map into output (x) environment.

    For a channel V is an isometry and apply(rho) = Tr_env V rho V*; for a
    trace-non-increasing operation V*V = sum K*K <= I instead, so use
    ``isometry`` only after checking ``is_isometric``.
    """

    v: np.ndarray
    dim_out: int
    dim_env: int
    is_isometric: bool

    @property
    def isometry(self) -> IsometryMatrix:
        if not self.is_isometric:
            raise InvalidQuantumMap("the dilated map is not trace preserving")
        return IsometryMatrix(self.v)

    def dilate(self, rho: PositiveOperator) -> PositiveOperator:
        """V rho V* on the output (x) environment space."""
        return PositiveOperator(self.v @ matrix_of(rho) @ self.v.conj().T)

    def reduce(self, dilated: PositiveOperator) -> PositiveOperator:
        """Trace out the environment factor."""
        return partial_trace_env(dilated, self.dim_out, self.dim_env)


def stinespring(op: KrausOperation) -> StinespringDilation:
    """Stack the Kraus blocks against an orthonormal environment basis.

    Layout: row index = b * dim_env + e, so V = sum_e K_e (x) |e>, and the
    environment is the trailing tensor factor as expected by
    ``partial_trace_env``.
    """
    verdict = op.validate()
    if verdict.kind is MapKind.INVALID:
        raise InvalidQuantumMap(
            f"cannot dilate an invalid map (defect {verdict.defect:.3e})"
        )
    k = op.kraus_rank
    v = np.zeros((op.dim_out * k, op.dim_in), dtype=complex)
    for e, kr in enumerate(op.kraus):
        v[e::k, :] = kr
    return StinespringDilation(
        v=v,
        dim_out=op.dim_out,
        dim_env=k,
        is_isometric=verdict.kind is MapKind.CHANNEL,
    )


def extend_to_channel(op: KrausOperation) -> KrausOperation:
    """Trace-preserving extension onto one appended output coordinate.

    The extension sends rho to apply(rho) (+) [Tr (I - dual(I)) rho] in the
    last diagonal slot, so the appended entry records the trace deficit and
    the restriction to the first dim_out coordinates is the original map.
    Output ordering is fixed: original coordinates first, appended last.
    """
    verdict = op.validate()
    if verdict.kind is MapKind.INVALID:
        raise InvalidQuantumMap(
            f"cannot extend an invalid map (defect {verdict.defect:.3e})"
        )
    embedded = []
    pad = np.zeros((1, op.dim_in), dtype=complex)
    for k in op.kraus:
        embedded.append(np.vstack([k, pad]))
    if verdict.kind is MapKind.OPERATION:
        deficit = np.eye(op.dim_in) - op.gram()
        deficit = (deficit + deficit.conj().T) / 2.0
        w, vecs = np.linalg.eigh(deficit)
        for lam, col in zip(w, vecs.T):
            if lam > 1e-12:
                row = np.zeros((op.dim_out + 1, op.dim_in), dtype=complex)
                row[-1, :] = np.sqrt(lam) * col.conj()
                embedded.append(row)
    return KrausOperation(embedded)


def pinching_channel(p: Projector) -> KrausOperation:
    """The channel rho -> P rho P + (I-P) rho (I-P)."""
    return KrausOperation([p.matrix, p.complement().matrix])


def reflection_unitary(p: Projector) -> HermitianMatrix:
    """U = 2P - I, the self-adjoint unitary reflecting about range(P)."""
    return HermitianMatrix(2.0 * p.matrix - np.eye(p.dim, dtype=complex))


def identity_channel(dim: int) -> KrausOperation:
    return KrausOperation([np.eye(dim, dtype=complex)])


def dephasing_channel(dim: int) -> KrausOperation:
    """Full dephasing in the computational basis: K_i = |i><i|."""
    ops = []
    for i in range(dim):
        k = np.zeros((dim, dim), dtype=complex)
        k[i, i] = 1.0
        ops.append(k)
    return KrausOperation(ops)


def depolarizing_channel(dim: int) -> KrausOperation:
    """Completely depolarizing channel rho -> Tr(rho) I / dim.

    Kraus family |i><j| / sqrt(dim); for a qubit this is the familiar
    four-operator family up to Kraus-gauge equivalence.
    """
    ops = []
    s = 1.0 / np.sqrt(dim)
    for i in range(dim):
        for j in range(dim):
            k = np.zeros((dim, dim), dtype=complex)
            k[i, j] = s
            ops.append(k)
    return KrausOperation(ops)


def amplitude_damping_channel(gamma: float) -> KrausOperation:
    """Qubit amplitude damping with decay probability gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping probability must lie in [0, 1], got {gamma!r}")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausOperation([k0, k1])


def random_channel(dim_in: int, dim_out: int, kraus_rank: int, seed) -> KrausOperation:
    """Haar-random channel: a Haar isometry V from the input space into
    output (x) environment, read out as Kraus blocks K_e = (<e| (x) I) V.

    Deterministic in the seed. Requires dim_out * kraus_rank >= dim_in.
    """
    if kraus_rank < 1:
        raise ValueError("kraus_rank must be at least 1")
    rows = dim_out * kraus_rank
    if rows < dim_in:
        raise ValueError(
            f"no channel with dim_out * kraus_rank = {rows} < dim_in = {dim_in}"
        )
    v = haar_isometry(as_rng(seed), rows, dim_in)
    return KrausOperation([v[e::kraus_rank, :] for e in range(kraus_rank)])


def random_operation(dim_in: int, dim_out: int, kraus_rank: int, seed) -> KrausOperation:
    """Random trace-non-increasing operation: a random channel scaled by
    sqrt(t) with t uniform in [0.3, 1], so the trace deficit is known."""
    rng = as_rng(seed)
    base = random_channel(dim_in, dim_out, kraus_rank, rng)
    t = rng.uniform(0.3, 1.0)
    return KrausOperation([np.sqrt(t) * k for k in base.kraus])


_AMPLITUDE_RE = re.compile(r"^amplitude-damping\(([^)]+)\)$")


def named_channel(name: str, dim: int | None = None) -> KrausOperation:
    """Resolve a built-in channel id.

    Known ids: ``identity``, ``dephasing``, ``depolarizing`` (all need the
    dimension from context) and ``amplitude-damping(gamma)`` (qubit only).
    ``pinching(...)`` ids are resolved by the file loader since they carry a
    projector file reference.
    """
    name = name.strip()
    m = _AMPLITUDE_RE.match(name)
    if m:
        return amplitude_damping_channel(float(m.group(1)))
    if name in ("identity", "dephasing", "depolarizing"):
        if dim is None:
            raise ValueError(f"channel id {name!r} needs a dimension from context")
        factory = {
            "identity": identity_channel,
            "dephasing": dephasing_channel,
            "depolarizing": depolarizing_channel,
        }[name]
        return factory(dim)
    raise ValueError(f"unknown channel id {name!r}")
