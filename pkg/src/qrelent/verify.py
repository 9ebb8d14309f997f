"""Jump estimation and the numerical verification battery.

The discontinuity jump of the divergence along a converging pair of operator
sequences is ``limsup_n D(rho_n || sigma_n) - D(rho_0 || sigma_0)``. A finite
run can only see a windowed surrogate, so ``estimate_jump`` reports the sup
over a trailing window together with the window geometry, and every
acceptance bound in this package is stated about that surrogate plus the
constructed family's known convergence rate, never about the unreachable
limit.

The headline check is ``check_jump_monotonicity``: the estimated jump after
a quantum operation must not exceed the jump before it (plus estimator
slack). ``compression_trace`` replays the chain of quantities behind that
fact: divergences are lifted through the Stinespring dilation, compressed by
a projector ladder consistent with the image sequence, and the resulting
double array is fed through the strengthened Dini bound, the complement
tail bound, and the pinching and Donald decompositions.
"""

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .channels import (
    KrausOperation,
    MapKind,
    extend_to_channel,
    reflection_unitary,
    stinespring,
)
from .divergence import relative_entropy, symmetrized_divergence
from .errors import (
    HypothesisViolation,
    IndeterminateIdentity,
    InfiniteLimitDivergence,
    InvalidQuantumMap,
    LadderConstructionFailure,
    LadderInconsistent,
    NonCommutingSigma,
    SymmetryViolation,
)
from .operators import (
    PositiveOperator,
    Projector,
    conjugate,
    default_rank_tol,
    matrix_of,
    operator_norm,
    partial_trace_env,
    trace_distance,
)
from .sequences import (
    ProjectorLadder,
    StateSequenceFamily,
    geometric_midpoint_thresholds,
    threshold_ladder,
)

#: default estimator slack, calibrated to the jump family's O(1/n)
#: convergence at n_max = 1000; always report slack and n_max together
DEFAULT_SLACK = 5e-3
#: identity-level tolerance for residuals that vanish in exact arithmetic
IDENTITY_TOL = 1e-8
#: decade factor used by every "non-increasing over the last decade" proxy
TREND_DECADE = 10


@dataclass(frozen=True)
class JumpEstimate:
    """Windowed surrogate for the divergence jump along a family.

    ``limsup_tail`` is the sup of the divergence over
    n in [n_max - window + 1, n_max]; ``estimate`` subtracts the divergence
    at the limit pair. ``infinite`` is set when any window value is +inf, in
    which case the estimate is +inf and must fail ordering checks loudly.
    ``source`` records whether values came from the family's closed form or
    from matrix arithmetic.
    """

    limsup_tail: float
    limit_value: float
    estimate: float
    n_max: int
    window: int
    infinite: bool
    source: str
    tail_values: tuple

    def to_dict(self) -> dict:
        return {
            "limsup_tail": self.limsup_tail,
            "limit_value": self.limit_value,
            "estimate": self.estimate,
            "n_max": self.n_max,
            "window": self.window,
            "infinite": self.infinite,
            "source": self.source,
        }


def divergence_sampler(
    family: StateSequenceFamily,
    phi: KrausOperation | None,
    rank_tol: float | None,
) -> tuple[Callable[[int], float], str]:
    """Return (n -> D at index n, source tag); n = 0 means the limit pair."""
    if phi is None and family.input_divergence is not None:
        return family.input_divergence, "analytic"

    def sample(n: int) -> float:
        rho, sigma = family.pair_or_limit(n)
        if phi is not None:
            rho, sigma = phi.apply(rho), phi.apply(sigma)
        return relative_entropy(rho, sigma, rank_tol).value

    return sample, "matrix"


def estimate_jump(
    family: StateSequenceFamily,
    phi: KrausOperation | None = None,
    n_max: int = 1000,
    window: int = 50,
    rank_tol: float | None = None,
) -> JumpEstimate:
    """Estimate the divergence jump, optionally after applying a map to both
    sequence members and the limits.

    The family's closed-form divergence is used when available and no map is
    given; this is the only faithful route at indices where the decaying
    eigenvalues fall below float range. Raises ``InfiniteLimitDivergence``
    when the (transformed) limit pair has infinite divergence, since the
    jump is undefined there.
    """
    if window < 1 or n_max < window:
        raise ValueError(f"need 1 <= window <= n_max, got window={window}, n_max={n_max}")
    sample, source = divergence_sampler(family, phi, rank_tol)
    limit_value = sample(0)
    if math.isinf(limit_value):
        raise InfiniteLimitDivergence(
            "divergence at the (transformed) limit pair is infinite"
        )
    ns = range(n_max - window + 1, n_max + 1)
    tail = tuple(sample(n) for n in ns)
    limsup_tail = max(tail)
    return JumpEstimate(
        limsup_tail=limsup_tail,
        limit_value=limit_value,
        estimate=limsup_tail - limit_value,
        n_max=n_max,
        window=window,
        infinite=any(math.isinf(v) for v in tail),
        source=source,
        tail_values=tail,
    )


@dataclass(frozen=True)
class JumpComparison:
    """Input-side jump vs output-side estimate for one map."""

    input_jump: float
    input_source: str
    output: JumpEstimate
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "input_jump": self.input_jump,
            "input_source": self.input_source,
            "output": self.output.to_dict(),
            "slack": self.slack,
            "pass": self.passed,
        }


def check_jump_monotonicity(
    family: StateSequenceFamily,
    phi: KrausOperation,
    n_max: int = 1000,
    window: int = 50,
    slack: float = DEFAULT_SLACK,
    rank_tol: float | None = None,
    input_estimate: float | None = None,
) -> JumpComparison:
    """Check that the output-side jump estimate does not exceed the
    input-side jump plus estimator slack.

    The input side uses, in order of preference: an explicit value, the
    family's analytic jump, or a windowed estimate at the same geometry. An
    infinite output window fails the comparison loudly unless the input jump
    is itself infinite.
    """
    if input_estimate is not None:
        input_jump, input_source = float(input_estimate), "explicit"
    elif family.analytic_jump is not None:
        input_jump, input_source = family.analytic_jump.value, "analytic"
    else:
        input_jump = estimate_jump(family, None, n_max, window, rank_tol).estimate
        input_source = "estimated"
    output = estimate_jump(family, phi, n_max, window, rank_tol)
    if output.infinite:
        passed = math.isinf(input_jump)
    else:
        passed = output.estimate <= input_jump + slack
    return JumpComparison(
        input_jump=input_jump,
        input_source=input_source,
        output=output,
        slack=slack,
        passed=passed,
    )


@dataclass(frozen=True)
class OperationReduction:
    """Jump estimate via an operation vs via its channel extension."""

    direct: JumpEstimate
    extended: JumpEstimate
    margin: float
    passed: bool


def check_operation_reduction(
    family: StateSequenceFamily,
    operation: KrausOperation,
    n_max: int = 20,
    window: int = 10,
    rank_tol: float | None = None,
    tol: float = 1e-6,
) -> OperationReduction:
    """The jump estimate through a trace-non-increasing operation is bounded
    by the estimate through its trace-preserving one-coordinate extension,
    because the appended coordinate only adds a nonnegative scalar
    divergence that vanishes at the limit."""
    direct = estimate_jump(family, operation, n_max, window, rank_tol)
    extended = estimate_jump(family, extend_to_channel(operation), n_max, window, rank_tol)
    margin = extended.estimate - direct.estimate
    return OperationReduction(
        direct=direct,
        extended=extended,
        margin=margin,
        passed=direct.estimate <= extended.estimate + tol,
    )


@dataclass(frozen=True)
class DiniCheck:
    """Outcome of the strengthened two-index limit bound."""

    measured_sup: float
    delta: float
    tol: float
    sups_by_m: dict
    passed: bool


def check_dini(
    a: Sequence[float],
    a_grid: Mapping[int, Sequence[float]],
    delta: float,
    tol: float = DEFAULT_SLACK,
    hyp_tol: float = IDENTITY_TOL,
) -> DiniCheck:
    """Check sup_n |a_n - a[m]_n| <= delta + tol at the largest m.

    ``a`` is indexed by sequence position with position 0 the limit member;
    ``a_grid`` maps each level m to a same-length array. The hypotheses of
    the underlying bound are verified first through their falsifiable
    finite-grid consequences: levels must be non-decreasing in m, dominated
    by ``a``, and each level's trailing values must not undercut its limit
    entry. (The per-n convergence of levels to ``a`` is a statement about
    the infinite level index and cannot be decided on a grid; monotone plus
    dominated is its testable part.) Violations raise ``HypothesisViolation``
    naming the failed condition.
    """
    a_arr = np.asarray(a, dtype=float)
    ms = sorted(a_grid)
    if not ms:
        raise ValueError("a_grid must contain at least one level")
    grid = {m: np.asarray(a_grid[m], dtype=float) for m in ms}
    for m in ms:
        if grid[m].shape != a_arr.shape:
            raise ValueError(f"level m={m} has shape {grid[m].shape}, expected {a_arr.shape}")

    for prev, nxt in zip(ms, ms[1:]):
        worst = float(np.max(grid[prev] - grid[nxt]))
        if worst > hyp_tol:
            raise HypothesisViolation(
                f"levels are not non-decreasing in m: a[{prev}] exceeds a[{nxt}] by {worst:.3e}"
            )
    for m in ms:
        worst = float(np.max(grid[m] - a_arr))
        if worst > hyp_tol:
            raise HypothesisViolation(
                f"level m={m} exceeds the target sequence by {worst:.3e}"
            )
    tail = max(1, (len(a_arr) - 1) // TREND_DECADE)
    for m in ms:
        trailing = float(np.min(grid[m][-tail:]))
        if trailing < grid[m][0] - hyp_tol - tol:
            raise HypothesisViolation(
                f"trailing values of level m={m} undercut its limit entry: "
                f"{trailing:.6g} < {float(grid[m][0]):.6g}"
            )

    sups = {m: float(np.max(np.abs(a_arr - grid[m]))) for m in ms}
    measured = sups[ms[-1]]
    decade_anchor = next((m for m in ms if m >= ms[-1] / TREND_DECADE), ms[0])
    trend_ok = measured <= sups[decade_anchor] + 1e-12
    return DiniCheck(
        measured_sup=measured,
        delta=float(delta),
        tol=tol,
        sups_by_m=sups,
        passed=measured <= float(delta) + tol and trend_ok,
    )


def _finite_value(x, label: str) -> float:
    v = x.value if hasattr(x, "value") else float(x)
    if math.isinf(v):
        raise IndeterminateIdentity(f"{label} is infinite")
    return v


def _pinching_sides(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    p: Projector,
    rank_tol: float | None,
) -> tuple[float, float]:
    pbar = p.complement()
    lhs = _finite_value(
        relative_entropy(p.compress(rho), p.compress(sigma), rank_tol),
        "compressed divergence",
    ) + _finite_value(
        relative_entropy(pbar.compress(rho), pbar.compress(sigma), rank_tol),
        "complement-compressed divergence",
    )
    u = reflection_unitary(p)
    averaged = PositiveOperator(0.5 * (rho.matrix + matrix_of(conjugate(u, rho))))
    rhs = _finite_value(
        relative_entropy(averaged, sigma, rank_tol), "pinched divergence"
    )
    return lhs, rhs


def check_pinching_identity(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    p: Projector,
    rank_tol: float | None = None,
) -> float:
    """Signed residual of the pinching identity

        D(PrP || PsP) + D(P'rP' || P's P') = D((r + UrU*)/2 || s),

    where P' = I - P and U = 2P - I. Requires P to commute with sigma
    (raises ``NonCommutingSigma`` otherwise) and every term finite (raises
    ``IndeterminateIdentity`` otherwise).
    """
    comm = operator_norm(p.matrix @ sigma.matrix - sigma.matrix @ p.matrix)
    if comm > 1e-9 * max(1.0, operator_norm(sigma.matrix)):
        raise NonCommutingSigma(
            f"projector does not commute with the reference: ||[P, sigma]|| = {comm:.3e}"
        )
    lhs, rhs = _pinching_sides(rho, sigma, p, rank_tol)
    return lhs - rhs


@dataclass(frozen=True)
class DonaldSplit:
    """Three-term decomposition of D(rho||sigma) under a symmetry of sigma."""

    lhs: float
    outer_term: float
    corrections: tuple[float, float]
    residual: float


def check_donald_split(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    u,
    rank_tol: float | None = None,
) -> DonaldSplit:
    """Verify D(r||s) = D(m||s) + D(r||m)/2 + D(UrU*||m)/2 for a unitary U
    fixing sigma, with m the even mixture of r and UrU*.

    This is the even-weight instance of Donald's identity combined with
    unitary invariance; both correction terms are nonnegative, which is what
    makes the pinched divergence a lower bound."""
    um = matrix_of(u)
    unit_defect = operator_norm(um.conj().T @ um - np.eye(um.shape[0]))
    if unit_defect > 1e-9:
        raise SymmetryViolation(f"U is not unitary: ||U*U - I|| = {unit_defect:.3e}")
    sym = operator_norm(um @ sigma.matrix @ um.conj().T - sigma.matrix)
    if sym > 1e-9 * max(1.0, operator_norm(sigma.matrix)):
        raise SymmetryViolation(
            f"U does not fix the reference: ||U sigma U* - sigma|| = {sym:.3e}"
        )
    rotated = conjugate(um, rho)
    mix = PositiveOperator(0.5 * (rho.matrix + rotated.matrix))
    lhs = _finite_value(relative_entropy(rho, sigma, rank_tol), "D(rho||sigma)")
    outer = _finite_value(relative_entropy(mix, sigma, rank_tol), "D(mix||sigma)")
    c1 = 0.5 * _finite_value(relative_entropy(rho, mix, rank_tol), "D(rho||mix)")
    c2 = 0.5 * _finite_value(relative_entropy(rotated, mix, rank_tol), "D(UrU*||mix)")
    return DonaldSplit(
        lhs=lhs,
        outer_term=outer,
        corrections=(c1, c2),
        residual=lhs - outer - c1 - c2,
    )


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    worst: float
    detail: str = ""


@dataclass(frozen=True)
class CompressionTrace:
    """Per-level slice of the dilation-compression replay.

    ``a`` holds the dilated divergences (index 0 is the limit member),
    ``a_m`` their compressions through projector level m, ``tail`` the
    complement compressions, and ``pinched`` the image-side pinched
    divergences.
    """

    m: int
    n_grid: tuple
    a: tuple
    a_m: tuple
    tail: tuple
    pinched: tuple
    sup_gap: float
    checks: dict


@dataclass(frozen=True)
class TraceReport:
    m_values: tuple
    traces: tuple
    delta: float
    slack: float
    checks: dict
    passed: bool

    def trace_for(self, m: int) -> CompressionTrace:
        for t in self.traces:
            if t.m == m:
                return t
        raise KeyError(f"no trace for m={m}")


def _auto_image_thresholds(
    sigma_img: Callable[[int], PositiveOperator], m_max: int
) -> list[float]:
    """Thresholds for the image-sequence ladder, read off the decaying
    branch of the first m_max + 1 image spectra."""
    branch = []
    top = 0.0
    for n in range(1, m_max + 2):
        eigs = sigma_img(n).eigenvalues
        top = max(top, float(eigs[0]) if eigs.size else 0.0)
        floor = 100.0 * np.finfo(float).eps * max(float(eigs[0]) if eigs.size else 0.0, 1e-300)
        positive = eigs[eigs > floor]
        if positive.size == 0:
            raise LadderConstructionFailure(
                f"image member n={n} has no eigenvalue above its noise floor"
            )
        branch.append(float(positive.min()))
    noise = 100.0 * np.finfo(float).eps * max(top, 1e-300)
    return geometric_midpoint_thresholds(branch, m_max, floor=noise)


def compression_trace(
    family: StateSequenceFamily,
    phi: KrausOperation,
    m_list: Sequence[int],
    n_max: int,
    rank_tol: float | None = None,
    slack: float = DEFAULT_SLACK,
    delta: float | None = None,
    thresholds: Sequence[float] | None = None,
) -> TraceReport:
    """Replay the compression chain for a channel applied to a family.

    For each level m of a threshold ladder consistent with the image
    sequence {phi(sigma_n)} this computes, on n = 0..n_max,

    * a_n, the divergence of the dilated pair V rho_n V* || V sigma_n V*
      (equal to the input divergence because V is an isometry);
    * a[m]_n, the same after compressing by (P[n][m] (x) I_env);
    * the complement compression (the tail), which must not exceed
      a_n - a[m]_n;
    * the image-side pinched divergence and the residual of the pinching
      identity;
    * the residual of exchanging the environment trace with the complement
      compression.

    The aggregated checks are: levels non-decreasing in m, levels dominated
    by a_n, the tail bound, sup_n(a_n - a[m]_n) <= delta + slack at the
    largest m, the pinching identity, the trace-exchange identity, and
    agreement of a_n with the input-side divergence.
    """
    verdict = phi.validate()
    if verdict.kind is not MapKind.CHANNEL:
        raise InvalidQuantumMap(
            "compression traces need a trace-preserving map; extend the "
            f"operation first (classification: {verdict.kind.value})"
        )
    ms = sorted(set(int(m) for m in m_list))
    if not ms or ms[0] < 1:
        raise ValueError("m_list must contain positive levels")
    m_max = ms[-1]
    if n_max < m_max + 1:
        raise ValueError("n_max must exceed the largest ladder level")

    dil = stinespring(phi)
    env_eye = np.eye(dil.dim_env, dtype=complex)

    pair_cache: dict[int, tuple[PositiveOperator, PositiveOperator]] = {}

    def member(n: int):
        if n not in pair_cache:
            pair_cache[n] = family.pair_or_limit(n)
        return pair_cache[n]

    img_cache: dict[int, tuple[PositiveOperator, PositiveOperator]] = {}

    def images(n: int):
        if n not in img_cache:
            rho, sigma = member(n)
            img_cache[n] = (phi.apply(rho), phi.apply(sigma))
        return img_cache[n]

    if thresholds is None:
        thresholds = _auto_image_thresholds(lambda n: images(n)[1], m_max)
    ladder = threshold_ladder(
        lambda n: images(n)[1], thresholds, description="image threshold ladder"
    )

    n_grid = tuple(range(0, n_max + 1))
    dilated = {}
    a_vals = []
    base_vals = []
    base_sampler, _ = divergence_sampler(family, None, rank_tol)
    for n in n_grid:
        rho, sigma = member(n)
        w_rho, w_sigma = dil.dilate(rho), dil.dilate(sigma)
        dilated[n] = (w_rho, w_sigma)
        a_vals.append(relative_entropy(w_rho, w_sigma, rank_tol).value)
        base_vals.append(base_sampler(n))
    a_arr = np.asarray(a_vals)

    if delta is None:
        if family.analytic_jump is not None and family.analytic_jump.is_finite:
            delta = family.analytic_jump.value
        else:
            tail = max(1, n_max // 4)
            delta = float(np.max(a_arr[-tail:]) - a_arr[0])

    traces = []
    per_m_levels = {}
    worst = {
        "a_m_dominated": 0.0,
        "tail_bound": 0.0,
        "pinching_identity": 0.0,
        "partial_trace_exchange": 0.0,
    }
    for m in ms:
        am_vals, tail_vals, pinched_vals = [], [], []
        pinch_worst = 0.0
        exch_worst = 0.0
        for n in n_grid:
            p = ladder.projector(n, m)
            pbar = p.complement()
            pd = np.kron(p.matrix, env_eye)
            pbar_d = np.kron(pbar.matrix, env_eye)
            w_rho, w_sigma = dilated[n]
            head_rho = PositiveOperator(pd @ w_rho.matrix @ pd)
            head_sigma = PositiveOperator(pd @ w_sigma.matrix @ pd)
            tail_rho = PositiveOperator(pbar_d @ w_rho.matrix @ pbar_d)
            tail_sigma = PositiveOperator(pbar_d @ w_sigma.matrix @ pbar_d)
            am_vals.append(relative_entropy(head_rho, head_sigma, rank_tol).value)
            tail_vals.append(relative_entropy(tail_rho, tail_sigma, rank_tol).value)

            rho_img, sigma_img = images(n)
            exch_worst = max(
                exch_worst,
                trace_distance(
                    partial_trace_env(tail_rho, dil.dim_out, dil.dim_env),
                    pbar.compress(rho_img),
                ),
                trace_distance(
                    partial_trace_env(tail_sigma, dil.dim_out, dil.dim_env),
                    pbar.compress(sigma_img),
                ),
            )
            lhs, rhs = _pinching_sides(rho_img, sigma_img, p, rank_tol)
            pinched_vals.append(rhs)
            pinch_worst = max(pinch_worst, abs(lhs - rhs))

        am_arr = np.asarray(am_vals)
        per_m_levels[m] = am_arr
        with np.errstate(invalid="ignore"):
            # inf - inf turns to nan here; nan fails every bound loudly
            sup_gap = float(np.max(a_arr - am_arr))
            dominated = float(np.max(am_arr - a_arr))
            tail_slack = float(np.max(np.asarray(tail_vals) - (a_arr - am_arr)))
        worst["a_m_dominated"] = max(worst["a_m_dominated"], dominated)
        worst["tail_bound"] = max(worst["tail_bound"], tail_slack)
        worst["pinching_identity"] = max(worst["pinching_identity"], pinch_worst)
        worst["partial_trace_exchange"] = max(worst["partial_trace_exchange"], exch_worst)
        traces.append(
            CompressionTrace(
                m=m,
                n_grid=n_grid,
                a=tuple(a_vals),
                a_m=tuple(am_vals),
                tail=tuple(tail_vals),
                pinched=tuple(pinched_vals),
                sup_gap=sup_gap,
                checks={
                    "a_m_dominated": CheckResult(dominated <= IDENTITY_TOL, dominated),
                    "tail_bound": CheckResult(tail_slack <= IDENTITY_TOL, tail_slack),
                    "pinching_identity": CheckResult(pinch_worst <= IDENTITY_TOL, pinch_worst),
                    "partial_trace_exchange": CheckResult(exch_worst <= 1e-10, exch_worst),
                },
            )
        )

    mono_worst = 0.0
    with np.errstate(invalid="ignore"):
        for prev, nxt in zip(ms, ms[1:]):
            gap = float(np.max(per_m_levels[prev] - per_m_levels[nxt]))
            mono_worst = gap if math.isnan(gap) else max(mono_worst, gap)
    iso_worst = float(np.max(np.abs(a_arr - np.asarray(base_vals))))
    dini_gap = traces[-1].sup_gap

    checks = {
        "a_m_monotone": CheckResult(
            mono_worst <= IDENTITY_TOL,
            mono_worst,
            "compressed levels non-decreasing in m",
        ),
        "a_m_dominated": CheckResult(
            worst["a_m_dominated"] <= IDENTITY_TOL,
            worst["a_m_dominated"],
            "compressed levels never exceed the dilated divergence",
        ),
        "tail_bound": CheckResult(
            worst["tail_bound"] <= IDENTITY_TOL,
            worst["tail_bound"],
            "complement compression bounded by a_n - a[m]_n",
        ),
        "dini_gap": CheckResult(
            dini_gap <= delta + slack,
            dini_gap,
            f"sup_n(a_n - a[m]_n) at m={m_max} vs delta={delta!r} + slack={slack!r}",
        ),
        "pinching_identity": CheckResult(
            worst["pinching_identity"] <= IDENTITY_TOL,
            worst["pinching_identity"],
            "split vs pinched divergence on the image pair",
        ),
        "partial_trace_exchange": CheckResult(
            worst["partial_trace_exchange"] <= 1e-10,
            worst["partial_trace_exchange"],
            "environment trace commutes with the complement compression",
        ),
        "isometric_invariance": CheckResult(
            iso_worst <= IDENTITY_TOL,
            iso_worst,
            "dilated divergence equals the input-side divergence",
        ),
    }
    return TraceReport(
        m_values=tuple(ms),
        traces=tuple(traces),
        delta=float(delta),
        slack=slack,
        checks=checks,
        passed=all(c.passed for c in checks.values()),
    )


@dataclass(frozen=True)
class ContinuityCheck:
    """Convergence of a scalar functional of the pair along the family."""

    limit_value: float
    end_value: float
    end_deviation: float
    decade_deviation: float
    n_max: int
    passed: bool
    values: dict


def log_spaced_indices(n_max: int, points: int = 25) -> list[int]:
    """Deduplicated integer grid, geometrically spaced in [1, n_max]."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    raw = np.unique(
        np.rint(np.geomspace(1, n_max, num=min(points, n_max))).astype(int)
    )
    return [int(v) for v in raw]


def _ladder_consistent_at(
    ladder: ProjectorLadder,
    sigma: PositiveOperator,
    n: int,
    m: int,
) -> None:
    p = ladder.projector(n, m)
    comm = operator_norm(p.matrix @ sigma.matrix - sigma.matrix @ p.matrix)
    if comm > 1e-9 * max(1.0, operator_norm(sigma.matrix)):
        raise LadderInconsistent(
            f"ladder projector (n={n}, m={m}) does not commute with sigma_n"
        )
    cutoff = ladder.threshold_for(m)
    if cutoff is None:
        cutoff = default_rank_tol(sigma)
    sv = np.linalg.svd(p.matrix @ sigma.matrix, compute_uv=False)
    measured = int(np.sum(sv > cutoff))
    if measured != p.rank:
        raise LadderInconsistent(
            f"rank condition violated at (n={n}, m={m}): rank(P sigma)={measured}, "
            f"rank(P)={p.rank}"
        )


def check_compressed_continuity(
    family: StateSequenceFamily,
    ladder: ProjectorLadder,
    m: int,
    n_max: int,
    tol: float = 1e-4,
    rank_tol: float | None = None,
) -> ContinuityCheck:
    """The divergence of the level-m compressions converges to its value at
    the compressed limit pair, which must be finite.

    Checked as: deviation at n_max below ``tol`` and not larger than one
    decade earlier. Raises ``LadderInconsistent`` when the ladder fails
    commutation or the rank condition at an evaluated point.
    """
    grid = [0] + log_spaced_indices(n_max)

    def value(n: int) -> float:
        rho, sigma = family.pair_or_limit(n)
        _ladder_consistent_at(ladder, sigma, n, m)
        p = ladder.projector(n, m)
        return _finite_value(
            relative_entropy(p.compress(rho), p.compress(sigma), rank_tol),
            f"compressed divergence at n={n}",
        )

    values = {n: value(n) for n in grid}
    limit_value = values[0]
    end_dev = abs(values[n_max] - limit_value)
    n_dec = max(1, n_max // TREND_DECADE)
    closest_dec = min((n for n in grid if n >= n_dec), default=grid[-1])
    dec_dev = abs(values[closest_dec] - limit_value)
    return ContinuityCheck(
        limit_value=limit_value,
        end_value=values[n_max],
        end_deviation=end_dev,
        decade_deviation=dec_dev,
        n_max=n_max,
        passed=end_dev <= tol and end_dev <= dec_dev + 1e-9,
        values=values,
    )


def check_symmetrized_continuity(
    family: StateSequenceFamily,
    n_max: int,
    tol: float = 1e-3,
    rank_tol: float | None = None,
) -> ContinuityCheck:
    """The symmetrized divergence D(r||m) + D(s||m), m the even mixture, is
    continuous in the pair, so along any family it must settle at its limit
    value even where the plain divergence jumps. Always finite because each
    argument is dominated by twice the mixture."""
    grid = [0] + log_spaced_indices(n_max)
    values = {}
    for n in grid:
        rho, sigma = family.pair_or_limit(n)
        values[n] = symmetrized_divergence(rho, sigma, rank_tol)
    limit_value = values[0]
    end_dev = abs(values[n_max] - limit_value)
    n_dec = max(1, n_max // TREND_DECADE)
    closest_dec = min((n for n in grid if n >= n_dec), default=grid[-1])
    dec_dev = abs(values[closest_dec] - limit_value)
    return ContinuityCheck(
        limit_value=limit_value,
        end_value=values[n_max],
        end_deviation=end_dev,
        decade_deviation=dec_dev,
        n_max=n_max,
        passed=end_dev <= tol and end_dev <= dec_dev + 1e-9,
        values=values,
    )
