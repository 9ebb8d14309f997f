"""Converging operator sequences with known limits, and projector ladders.

Discontinuity jumps of the divergence only appear along sequences whose
supports degenerate in the limit, so this module constructs such sequences
in closed form instead of sampling static pairs. The canonical example is
the diagonal jump family

    rho_n   = diag(1 - 1/n, 1/n, 0, ...),
    sigma_n = diag(1 - q_n, q_n, 0, ...),   q_n = exp(-c n) / n,

whose members converge to the common limit diag(1, 0, ...) while
D(rho_n || sigma_n) converges to c, giving an exact jump of c. The family is
diagonal by design: every input-side divergence reduces to a closed-form
scalar (exposed as ``input_divergence``), so channels supply the only
nontrivial numerics. The scalar form is also the only faithful evaluation at
very deep n, where q_n falls below what a float64 matrix can carry.

A projector ladder is a double family P[n][m] of finite-rank projectors
attached to a converging sequence {sigma_n} (index n = 0 denotes the limit).
The consistency conditions it must satisfy are checked by ``verify_ladder``,
with finite-grid proxies spelled out in the report: covering and rank are
judged at the ladder's own resolution (its finest threshold), and the
norm-convergence condition over the infinite tail is replaced by smallness
at n_max plus a non-increasing trend over the last decade of n.
"""

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    FamilyEvaluationError,
    LadderConstructionFailure,
    ThresholdCollision,
)
from .extreal import ExtendedNonNegative
from .operators import (
    PositiveOperator,
    Projector,
    default_rank_tol,
    operator_norm,
    psd_order_defect,
    spectral_decompose,
    support_projector,
)
from .sampling import as_rng, random_state

#: relative clearance every threshold must keep from every eigenvalue
THRESHOLD_MARGIN = 1e-6

Pair = tuple[PositiveOperator, PositiveOperator]


@dataclass(frozen=True)
class StateSequenceFamily:
    """A closed-form map n -> (rho_n, sigma_n) with a known limit pair.

    ``analytic_jump`` is the exact discontinuity jump of the divergence when
    known. ``input_divergence`` is an optional closed form for
    D(rho_n || sigma_n) (n = 0 meaning the limit pair), used where matrix
    arithmetic cannot represent the members faithfully.
    """

    dim: int
    description: str
    limit: Pair
    analytic_jump: ExtendedNonNegative | None = None
    input_divergence: Callable[[int], float] | None = None
    descriptor: dict | None = None
    _eval: Callable[[int], Pair] = None  # type: ignore[assignment]

    def pair(self, n: int) -> Pair:
        if n < 1:
            raise FamilyEvaluationError(f"family members are indexed from 1, got {n}")
        return self._eval(n)

    def pair_or_limit(self, n: int) -> Pair:
        return self.limit if n == 0 else self.pair(n)

    def rho(self, n: int) -> PositiveOperator:
        return self.pair_or_limit(n)[0]

    def sigma(self, n: int) -> PositiveOperator:
        return self.pair_or_limit(n)[1]


def jump_family(c: float, dim: int = 2) -> StateSequenceFamily:
    """The diagonal family with exact divergence jump c > 0 (see module
    docstring). Defined from n = 1; the first member degenerates to a pure
    state on the second coordinate, which deliberately exercises the
    zero-eigenvalue code paths."""
    c = float(c)
    if c <= 0.0:
        raise ValueError(f"jump size must be positive, got {c!r}")
    if dim < 2:
        raise ValueError("the jump family needs dimension at least 2")

    def member(n: int) -> Pair:
        q = math.exp(-c * n) / n
        rho = np.zeros(dim)
        sigma = np.zeros(dim)
        rho[0], rho[1] = 1.0 - 1.0 / n, 1.0 / n
        sigma[0], sigma[1] = 1.0 - q, q
        return PositiveOperator.diagonal(rho), PositiveOperator.diagonal(sigma)

    def closed_form(n: int) -> float:
        if n == 0:
            return 0.0
        q = math.exp(-c * n) / n
        p1 = 1.0 - 1.0 / n
        head = p1 * (math.log(p1) - math.log1p(-q)) if p1 > 0.0 else 0.0
        # the tail term (1/n) ln((1/n)/q_n) collapses to c in log space,
        # which stays finite long after q_n itself underflows
        return head + c

    limit_vec = np.zeros(dim)
    limit_vec[0] = 1.0
    limit = (PositiveOperator.diagonal(limit_vec), PositiveOperator.diagonal(limit_vec))
    return StateSequenceFamily(
        dim=dim,
        description=f"diagonal jump family, c={c!r}",
        limit=limit,
        analytic_jump=ExtendedNonNegative.finite(c),
        input_divergence=closed_form,
        descriptor={"kind": "jump", "c": c, "dim": dim},
        _eval=member,
    )


def jump_weight(c: float, n: int) -> float:
    """The decaying sigma eigenvalue q_n = exp(-c n) / n of the jump family."""
    return math.exp(-float(c) * n) / n


def continuous_family(dim: int, seed) -> StateSequenceFamily:
    """Zero-jump control family: full-rank random limits approached along
    mixtures with the maximally mixed state, so the divergence is continuous
    and the estimated jump must vanish."""
    if dim < 2:
        raise ValueError("the continuous family needs dimension at least 2")
    rng = as_rng(seed)
    rho0 = random_state(rng, dim)
    sigma0 = random_state(rng, dim)
    mixed = np.eye(dim, dtype=complex) / dim

    def member(n: int) -> Pair:
        t = 1.0 / n
        rho = PositiveOperator((1.0 - t) * rho0.matrix + t * mixed)
        sigma = PositiveOperator((1.0 - t) * sigma0.matrix + t * mixed)
        return rho, sigma

    return StateSequenceFamily(
        dim=dim,
        description=f"full-rank continuous family, dim={dim}",
        limit=(rho0, sigma0),
        analytic_jump=ExtendedNonNegative.finite(0.0),
        input_divergence=None,
        descriptor={"kind": "continuous", "dim": dim, "seed": _seed_repr(seed)},
        _eval=member,
    )


def _seed_repr(seed):
    return int(seed) if isinstance(seed, (int, np.integer)) else None


def tabulated_family(
    dim: int,
    members: Mapping[int, Pair],
    limit: Pair,
    analytic_jump: ExtendedNonNegative | None = None,
    description: str = "tabulated family",
) -> StateSequenceFamily:
    """A family given by explicit members at finitely many indices plus the
    limit pair. Evaluation outside the table raises."""
    table = dict(members)

    def member(n: int) -> Pair:
        try:
            return table[n]
        except KeyError:
            raise FamilyEvaluationError(
                f"tabulated family has no member n={n}; available: {sorted(table)}"
            ) from None

    return StateSequenceFamily(
        dim=dim,
        description=description,
        limit=limit,
        analytic_jump=analytic_jump,
        input_divergence=None,
        descriptor={"kind": "table", "dim": dim, "indices": sorted(table)},
        _eval=member,
    )


@dataclass
class ProjectorLadder:
    """Lazily materialized double family of projectors P[n][m].

    ``projector(n, m)`` is memoized; building is a pure function of (n, m),
    so results are independent of evaluation order and safe to share. When
    the ladder was built from thresholds they are kept for resolution-aware
    verification (rank cutoffs and the covering support tolerance).
    """

    m0: int
    m_max: int
    build: Callable[[int, int], Projector]
    thresholds: tuple[float, ...] | None = None
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def projector(self, n: int, m: int) -> Projector:
        if n < 0:
            raise ValueError("sequence index must be >= 0 (0 denotes the limit)")
        if not self.m0 <= m <= self.m_max:
            raise ValueError(f"ladder index m={m} outside [{self.m0}, {self.m_max}]")
        key = (n, m)
        found = self._cache.get(key)
        if found is None:
            built = self.build(n, m)
            with self._lock:
                found = self._cache.setdefault(key, built)
        return found

    def threshold_for(self, m: int) -> float | None:
        if self.thresholds is None:
            return None
        return self.thresholds[m - self.m0]

    @property
    def finest_threshold(self) -> float | None:
        if self.thresholds is None:
            return None
        return min(self.thresholds)

    def m_values(self) -> list[int]:
        return list(range(self.m0, self.m_max + 1))


def threshold_ladder(
    sigma_of: Callable[[int], PositiveOperator] | StateSequenceFamily,
    thresholds: Sequence[float],
    m0: int = 1,
    margin: float = THRESHOLD_MARGIN,
    description: str = "threshold ladder",
) -> ProjectorLadder:
    """Spectral-threshold ladder: P[n][m] projects onto the eigenvectors of
    sigma_n with eigenvalue above thresholds[m - m0].

    Thresholds must be strictly decreasing and positive, and every threshold
    must clear every eigenvalue it is compared against by the relative
    ``margin``; a violation raises ``ThresholdCollision`` at build time (the
    rank condition is discontinuous in the threshold, so near-collisions are
    refused rather than resolved silently).
    """
    if isinstance(sigma_of, StateSequenceFamily):
        family = sigma_of
        sigma_of = family.sigma
    deltas = [float(d) for d in thresholds]
    if not deltas:
        raise ValueError("at least one threshold is required")
    if any(d <= 0.0 for d in deltas):
        raise ValueError("thresholds must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("thresholds must be strictly decreasing")

    spectral_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    lock = threading.Lock()

    def spectra(n: int):
        found = spectral_cache.get(n)
        if found is None:
            computed = spectral_decompose(sigma_of(n))
            with lock:
                found = spectral_cache.setdefault(n, computed)
        return found

    def build(n: int, m: int) -> Projector:
        delta = deltas[m - m0]
        eigs, vecs = spectra(n)
        clearance = np.abs(eigs - delta) / np.maximum(np.maximum(np.abs(eigs), delta), 1e-300)
        if clearance.size and float(clearance.min()) < margin:
            bad = float(eigs[int(np.argmin(clearance))])
            raise ThresholdCollision(
                f"threshold {delta!r} (m={m}) is within relative margin "
                f"{margin} of eigenvalue {bad!r} of member n={n}"
            )
        keep = eigs > delta
        if not keep.any():
            return Projector.zero(vecs.shape[0])
        return Projector.from_columns(vecs[:, keep])

    return ProjectorLadder(
        m0=m0,
        m_max=m0 + len(deltas) - 1,
        build=build,
        thresholds=tuple(deltas),
        description=description,
    )


def geometric_midpoint_thresholds(
    smallest_positive: Sequence[float],
    m_max: int,
    shrink: float = 0.5,
    floor: float = 0.0,
) -> list[float]:
    """Descending thresholds aligned with a decaying spectral branch.

    ``smallest_positive[k]`` is the smallest relevant eigenvalue of member
    k + 1. Each threshold sits at the geometric midpoint of consecutive
    branch values, so member n is resolved by level m exactly when n <= m;
    where the branch plateaus the thresholds halve instead. Needs
    ``m_max + 1`` branch values.
    """
    vals = [float(v) for v in smallest_positive]
    if len(vals) < m_max + 1:
        raise LadderConstructionFailure(
            f"need {m_max + 1} branch values for {m_max} thresholds, got {len(vals)}"
        )
    if any(v <= 0.0 for v in vals[: m_max + 1]):
        raise LadderConstructionFailure("branch values must be positive")
    out: list[float] = []
    prev: float | None = None
    for m in range(1, m_max + 1):
        a, b = vals[m - 1], vals[m]
        cand = math.sqrt(a * b) if b < a * (1.0 - 1e-3) else a * shrink
        if prev is not None:
            cand = min(cand, prev * (1.0 - 1e-3))
        if cand <= floor:
            raise LadderConstructionFailure(
                f"threshold {m} would fall to {cand!r}, at or below the noise floor "
                f"{floor!r}; reduce m_max or supply thresholds explicitly"
            )
        out.append(cand)
        prev = cand
    return out


def jump_family_thresholds(c: float, m_max: int) -> list[float]:
    """Canonical thresholds for the diagonal jump family: geometric midpoints
    of consecutive decaying weights, giving P[n][m] = full support for
    n <= m and the rank-one head projector for n > m."""
    branch = [jump_weight(c, n) for n in range(1, m_max + 2)]
    return geometric_midpoint_thresholds(branch, m_max)


@dataclass(frozen=True)
class ConditionReport:
    name: str
    passed: bool
    worst: float
    detail: str


@dataclass(frozen=True)
class LadderReport:
    passed: bool
    conditions: dict
    n_max: int
    m_values: tuple

    def condition(self, name: str) -> ConditionReport:
        return self.conditions[name]

    def failing(self) -> list[str]:
        return [k for k, v in self.conditions.items() if not v.passed]


#: fixed tolerances of the five ladder conditions (norm-convergence gets
#: its bound from the caller because it is a trend proxy, not an identity)
MONOTONE_TOL = 1e-10
COVERING_TOL = 1e-9
COMMUTATION_TOL = 1e-9
#: factor relating the last-decade index to n_max in trend checks
TREND_DECADE = 10


def verify_ladder(
    ladder: ProjectorLadder,
    family: StateSequenceFamily,
    n_max: int,
    tol: float = 1e-6,
    support_tol: float | None = None,
    rank_cutoff: float | None = None,
    n_grid: Sequence[int] | None = None,
) -> LadderReport:
    """Check the five consistency conditions of a ladder on a finite grid.

    Finite-grid semantics, also recorded in each condition's detail string:

    * monotone, commutation: checked at every evaluated (n, m) against the
      fixed tolerances above;
    * covering: the join over the evaluated m-range must dominate the
      support of sigma_n measured at ``support_tol``, which defaults to the
      ladder's finest threshold (the ladder cannot be expected to resolve
      below its own resolution); without thresholds the operator default
      applies;
    * rank: rank(P sigma_n) is counted at the per-level threshold when
      available, else at ``rank_cutoff``;
    * norm convergence: ||P[n][m] - P[0][m]|| must be below ``tol`` at
      n = n_max and must not exceed its value one decade earlier.
    """
    ns = list(n_grid) if n_grid is not None else list(range(0, n_max + 1))
    if 0 not in ns:
        ns = [0] + ns
    ms = ladder.m_values()
    if support_tol is None:
        support_tol = ladder.finest_threshold
    sigma_cache = {n: family.sigma(n) for n in ns}

    monotone_worst = 0.0
    commutation_worst = 0.0
    covering_worst = 0.0
    rank_worst = 0
    rank_where = ""
    for n in ns:
        sigma = sigma_cache[n]
        projs = {m: ladder.projector(n, m) for m in ms}
        for m in ms[:-1]:
            monotone_worst = max(
                monotone_worst,
                psd_order_defect(projs[m].matrix, projs[m + 1].matrix),
            )
        for m in ms:
            p = projs[m].matrix
            commutation_worst = max(
                commutation_worst, operator_norm(p @ sigma.matrix - sigma.matrix @ p)
            )
            cutoff = ladder.threshold_for(m)
            if cutoff is None:
                cutoff = rank_cutoff if rank_cutoff is not None else support_tol
            if cutoff is None:
                cutoff = default_rank_tol(sigma)
            sv = np.linalg.svd(p @ sigma.matrix, compute_uv=False)
            measured = int(np.sum(sv > cutoff))
            gap = abs(measured - projs[m].rank)
            if gap > rank_worst:
                rank_worst = gap
                rank_where = f"n={n}, m={m}: rank(P sigma)={measured}, rank(P)={projs[m].rank}"
        join_sum = sum(projs[m].matrix for m in ms)
        join = support_projector(PositiveOperator(join_sum / len(ms)), rank_tol=1e-8)
        q_n = support_projector(sigma, rank_tol=support_tol)
        covering_worst = max(covering_worst, psd_order_defect(q_n.matrix, join.matrix))

    conv_worst = 0.0
    conv_trend_bad = 0.0
    n_dec = max(1, n_max // TREND_DECADE)
    for m in ms:
        p_limit = ladder.projector(0, m).matrix
        r_end = operator_norm(ladder.projector(n_max, m).matrix - p_limit)
        r_dec = operator_norm(ladder.projector(n_dec, m).matrix - p_limit)
        conv_worst = max(conv_worst, r_end)
        conv_trend_bad = max(conv_trend_bad, r_end - r_dec)

    conditions = {
        "monotone": ConditionReport(
            "monotone",
            monotone_worst <= MONOTONE_TOL,
            monotone_worst,
            f"max PSD-order defect of P[n][m] <= P[n][m+1]; tol {MONOTONE_TOL}",
        ),
        "covering": ConditionReport(
            "covering",
            covering_worst <= COVERING_TOL,
            covering_worst,
            "join over evaluated m-range must dominate supp(sigma_n) at "
            f"support_tol={support_tol!r}; tol {COVERING_TOL}",
        ),
        "commutation": ConditionReport(
            "commutation",
            commutation_worst <= COMMUTATION_TOL,
            commutation_worst,
            f"max ||P sigma - sigma P||; tol {COMMUTATION_TOL}",
        ),
        "rank": ConditionReport(
            "rank",
            rank_worst == 0,
            float(rank_worst),
            rank_where or "rank(P sigma_n) = rank(P) at every evaluated (n, m)",
        ),
        "convergence": ConditionReport(
            "convergence",
            conv_worst <= tol and conv_trend_bad <= 1e-9,
            conv_worst,
            f"||P[n][m] - P[0][m]|| at n={n_max} (tol {tol}), non-increasing "
            f"since n={n_dec}; finite-n proxy for the norm limit",
        ),
    }
    return LadderReport(
        passed=all(c.passed for c in conditions.values()),
        conditions=conditions,
        n_max=n_max,
        m_values=tuple(ms),
    )
