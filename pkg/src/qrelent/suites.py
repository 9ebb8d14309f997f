"""Named verification suites behind the ``verify`` CLI command.

Every suite takes an explicit seed and derives per-trial generators as
``default_rng(seed + trial_index)``, so reports are reproducible and
independent of execution order. Each suite returns a report dict with the
schema {check, params, seed, residuals, trials, pass, runtime_ms}.
"""

import math
import time

import numpy as np

from .channels import (
    identity_channel,
    pinching_channel,
    random_channel,
    reflection_unitary,
)
from .divergence import (
    donald_identity,
    relative_entropy,
    relative_entropy_via_entropy,
    scaling_residuals,
    sum_decomposition_check,
    symmetrized_divergence,
)
from .operators import PositiveOperator, Projector, conjugate, trace_distance
from .sampling import as_rng, random_positive, random_state
from .sequences import (
    ProjectorLadder,
    continuous_family,
    jump_family,
    jump_family_thresholds,
    threshold_ladder,
    verify_ladder,
)
from .verify import (
    check_compressed_continuity,
    check_dini,
    check_donald_split,
    check_pinching_identity,
    check_symmetrized_continuity,
    compression_trace,
)

LN2 = math.log(2)

#: per-trial violation bound for the data processing inequality
DPI_TOL = 1e-8
#: residual bound for exact identities checked at scale
IDENTITY_RESIDUAL_TOL = 1e-9


def _dims_range(dims):
    lo, hi = dims
    if lo < 2 or hi < lo:
        raise ValueError(f"bad dimension range {dims!r}")
    return lo, hi


def _report(check, params, seed, residuals, trials, passed, t0):
    return {
        "check": check,
        "params": params,
        "seed": seed,
        "residuals": residuals,
        "trials": trials,
        "pass": bool(passed),
        "runtime_ms": round((time.perf_counter() - t0) * 1000.0, 3),
    }


def dpi_suite(seed: int, trials: int = 1000, dims=(2, 6)) -> dict:
    """D(phi rho || phi sigma) <= D(rho || sigma) over random triples."""
    t0 = time.perf_counter()
    lo, hi = _dims_range(dims)
    rows = []
    worst = -math.inf
    for i in range(trials):
        rng = as_rng(seed + i)
        dim_in = int(rng.integers(lo, hi + 1))
        dim_out = int(rng.integers(lo, hi + 1))
        kraus = int(rng.integers(1, 4))
        kraus = max(kraus, -(-dim_in // dim_out))
        rho = random_state(rng, dim_in)
        sigma = random_state(rng, dim_in)
        phi = random_channel(dim_in, dim_out, kraus, rng)
        before = relative_entropy(rho, sigma).value
        after = relative_entropy(phi.apply(rho), phi.apply(sigma)).value
        violation = after - before
        worst = max(worst, violation)
        rows.append(
            {
                "trial": i,
                "dim_in": dim_in,
                "dim_out": dim_out,
                "kraus_rank": kraus,
                "violation": violation,
            }
        )
    passed = worst <= DPI_TOL
    return _report(
        "dpi",
        {"trials": trials, "dims": list(dims), "tol": DPI_TOL},
        seed,
        {"max_violation": worst},
        rows,
        passed,
        t0,
    )


def donald_suite(seed: int, trials: int = 200, dims=(2, 6)) -> dict:
    """Donald's identity residual over random positive-operator triples."""
    t0 = time.perf_counter()
    lo, hi = _dims_range(dims)
    rows = []
    worst = 0.0
    passed = True
    for i in range(trials):
        rng = as_rng(seed + i)
        dim = int(rng.integers(lo, hi + 1))
        rho = random_positive(rng, dim)
        sigma = random_positive(rng, dim)
        omega = random_positive(rng, dim)
        p = float(rng.uniform(0.0, 1.0))
        dec = donald_identity(rho, sigma, omega, p)
        bound = IDENTITY_RESIDUAL_TOL * max(1.0, dec.lhs)
        ok = abs(dec.residual) <= bound
        passed = passed and ok
        worst = max(worst, abs(dec.residual))
        rows.append({"trial": i, "dim": dim, "p": p, "residual": dec.residual, "lhs": dec.lhs})
    return _report(
        "donald",
        {"trials": trials, "dims": list(dims), "tol": IDENTITY_RESIDUAL_TOL},
        seed,
        {"max_abs_residual": worst},
        rows,
        passed,
        t0,
    )


def _embedded_block(rng, total: int, offset: int, dim: int) -> PositiveOperator:
    block = random_positive(rng, dim).matrix
    full = np.zeros((total, total), dtype=complex)
    full[offset : offset + dim, offset : offset + dim] = block
    return PositiveOperator(full)


def sums_suite(seed: int, trials: int = 500, dims=(2, 4)) -> dict:
    """Subadditivity gap nonnegativity, and exact additivity on
    orthogonally supported quartets."""
    t0 = time.perf_counter()
    lo, hi = _dims_range(dims)
    rows = []
    min_gap = math.inf
    worst_exact = 0.0
    passed = True
    for i in range(trials):
        rng = as_rng(seed + i)
        if i % 2 == 0:
            dim = int(rng.integers(lo, hi + 1))
            quartet = [random_positive(rng, dim) for _ in range(4)]
            res = sum_decomposition_check(*quartet)
            ok = (not res.indeterminate) and res.gap is not None and res.gap.value >= -1e-9
            if res.gap is not None and res.gap.is_finite:
                min_gap = min(min_gap, res.gap.value)
            rows.append(
                {"trial": i, "case": "random", "dim": dim,
                 "gap": res.gap.value if res.gap is not None else "indeterminate"}
            )
        else:
            d1 = int(rng.integers(lo, hi + 1))
            d2 = int(rng.integers(lo, hi + 1))
            total = d1 + d2
            rho = _embedded_block(rng, total, 0, d1)
            omega = _embedded_block(rng, total, 0, d1)
            sigma = _embedded_block(rng, total, d1, d2)
            theta = _embedded_block(rng, total, d1, d2)
            res = sum_decomposition_check(rho, sigma, omega, theta)
            gap = res.gap.value if res.gap is not None else math.inf
            ok = res.exact and abs(gap) <= IDENTITY_RESIDUAL_TOL
            worst_exact = max(worst_exact, abs(gap))
            rows.append({"trial": i, "case": "orthogonal", "dims": [d1, d2], "gap": gap})
        passed = passed and ok
    return _report(
        "sums",
        {"trials": trials, "dims": list(dims), "tol": IDENTITY_RESIDUAL_TOL},
        seed,
        {"min_random_gap": min_gap, "max_orthogonal_residual": worst_exact},
        rows,
        passed,
        t0,
    )


def scaling_suite(seed: int, trials: int = 500, dims=(2, 6)) -> dict:
    """Both scaling identities over random pairs and log-uniform scales."""
    t0 = time.perf_counter()
    lo, hi = _dims_range(dims)
    rows = []
    worst = 0.0
    for i in range(trials):
        rng = as_rng(seed + i)
        dim = int(rng.integers(lo, hi + 1))
        rho = random_positive(rng, dim)
        sigma = random_positive(rng, dim)
        c = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
        r1, r2 = scaling_residuals(rho, sigma, c)
        worst = max(worst, abs(r1), abs(r2))
        rows.append({"trial": i, "dim": dim, "c": c, "r1": r1, "r2": r2})
    passed = worst <= IDENTITY_RESIDUAL_TOL
    return _report(
        "scaling",
        {"trials": trials, "dims": list(dims), "tol": IDENTITY_RESIDUAL_TOL},
        seed,
        {"max_abs_residual": worst},
        rows,
        passed,
        t0,
    )


def pinching_suite(seed: int, trials: int = 200, dims=(2, 5)) -> dict:
    """Pinching identity, the reflection Donald split, and the structural
    pinching properties on spectral projectors of random references."""
    t0 = time.perf_counter()
    lo, hi = _dims_range(dims)
    rows = []
    worst_identity = 0.0
    worst_structural = 0.0
    passed = True
    for i in range(trials):
        rng = as_rng(seed + i)
        dim = int(rng.integers(lo, hi + 1))
        sigma = random_state(rng, dim)
        rho = random_state(rng, dim)
        k = int(rng.integers(1, dim))
        p = Projector.from_columns(sigma.eigenvectors[:, :k])
        resid = check_pinching_identity(rho, sigma, p)
        split = check_donald_split(rho, sigma, reflection_unitary(p).matrix)
        pin = pinching_channel(p)
        once = pin.apply(rho)
        idem = trace_distance(pin.apply(once), once)
        avg = PositiveOperator(
            0.5 * (rho.matrix + conjugate(reflection_unitary(p).matrix, rho).matrix)
        )
        avg_resid = trace_distance(once, avg)
        worst_identity = max(worst_identity, abs(resid), abs(split.residual))
        worst_structural = max(worst_structural, idem, avg_resid)
        ok = (
            abs(resid) <= 1e-8
            and abs(split.residual) <= 1e-8
            and min(split.corrections) >= -1e-9
            and idem <= 1e-10
            and avg_resid <= 1e-10
        )
        passed = passed and ok
        rows.append(
            {
                "trial": i,
                "dim": dim,
                "rank": k,
                "identity_residual": resid,
                "split_residual": split.residual,
                "idempotence": idem,
                "average_form": avg_resid,
            }
        )
    return _report(
        "pinching",
        {"trials": trials, "dims": list(dims), "identity_tol": 1e-8, "structural_tol": 1e-10},
        seed,
        {"max_identity_residual": worst_identity, "max_structural_residual": worst_structural},
        rows,
        passed,
        t0,
    )


def lemma2_suite(seed: int, trials: int = 10, dims=(2, 2)) -> dict:
    """Compressed-divergence continuity along the jump family for ladder
    levels m = 1..min(trials, 50) (deterministic; the seed is recorded
    only). The full-support members carry eigenvalues far below the default
    support tolerance, so the suite pins its own."""
    t0 = time.perf_counter()
    m_max = min(max(1, trials), 50)
    fam = jump_family(LN2)
    ladder = threshold_ladder(fam, jump_family_thresholds(LN2, m_max))
    rows = []
    passed = True
    worst = 0.0
    for m in range(1, m_max + 1):
        res = check_compressed_continuity(
            fam, ladder, m, n_max=1000, tol=1e-4, rank_tol=1e-300
        )
        passed = passed and res.passed
        worst = max(worst, res.end_deviation)
        rows.append(
            {
                "m": m,
                "end_deviation": res.end_deviation,
                "limit_value": res.limit_value,
                "pass": res.passed,
            }
        )
    return _report(
        "lemma2",
        {"family": {"kind": "jump", "c": LN2, "dim": 2}, "m_max": m_max, "n_max": 1000, "tol": 1e-4},
        seed,
        {"max_end_deviation": worst},
        rows,
        passed,
        t0,
    )


def lemma3_suite(seed: int, trials: int = 1, dims=(2, 2)) -> dict:
    """Continuity of the symmetrized divergence: flat along the jump family
    (where the plain divergence jumps), exact on orthogonal pure states."""
    t0 = time.perf_counter()
    fam = jump_family(LN2)
    trend = check_symmetrized_continuity(fam, n_max=1000, tol=1e-3)
    ortho = symmetrized_divergence(
        PositiveOperator.diagonal([1.0, 0.0]), PositiveOperator.diagonal([0.0, 1.0])
    )
    ortho_err = abs(ortho - 2.0 * LN2)
    rng = as_rng(seed)
    same = random_state(rng, 3)
    zero_val = symmetrized_divergence(same, same)
    cont = check_symmetrized_continuity(continuous_family(3, seed), n_max=300, tol=1e-2)
    passed = trend.passed and ortho_err <= 1e-10 and zero_val <= 1e-10 and cont.passed
    rows = [
        {"case": "jump-family-trend", "end_deviation": trend.end_deviation, "pass": trend.passed},
        {"case": "orthogonal-pure", "value": ortho, "error": ortho_err},
        {"case": "identical-pair", "value": zero_val},
        {"case": "continuous-family-trend", "end_deviation": cont.end_deviation, "pass": cont.passed},
    ]
    return _report(
        "lemma3",
        {"n_max": 1000, "tol": 1e-3},
        seed,
        {"jump_family_end_deviation": trend.end_deviation, "orthogonal_error": ortho_err},
        rows,
        passed,
        t0,
    )


def dini_suite(seed: int, trials: int = 25, dims=(2, 2)) -> dict:
    """The strengthened two-index limit bound on constructed compliant
    double sequences and on arrays produced by a compression trace."""
    t0 = time.perf_counter()
    rows = []
    passed = True
    npts = 80
    for i in range(trials):
        rng = as_rng(seed + i)
        c = float(rng.uniform(0.1, 2.0))
        a = [0.0] + [c] * (npts - 1)
        grid = {
            m: [0.0] + [c if n <= m else 0.0 for n in range(1, npts)]
            for m in (1, 2, 5, 10, 20)
        }
        res = check_dini(a, grid, delta=c)
        passed = passed and res.passed
        rows.append({"trial": i, "case": "cutoff", "delta": c, "measured": res.measured_sup})
    const = check_dini([0.3] * npts, {m: [0.3] * npts for m in (1, 3)}, delta=0.0)
    passed = passed and const.passed
    rows.append({"case": "constant", "delta": 0.0, "measured": const.measured_sup})

    fam = jump_family(LN2)
    trace = compression_trace(
        fam, identity_channel(2), m_list=range(1, 7), n_max=60, rank_tol=1e-300
    )
    arrays = {t.m: list(t.a_m) for t in trace.traces}
    res = check_dini(list(trace.traces[0].a), arrays, delta=trace.delta)
    passed = passed and res.passed
    rows.append({"case": "compression-trace", "delta": trace.delta, "measured": res.measured_sup})
    return _report(
        "dini",
        {"trials": trials, "points": npts},
        seed,
        {"last_measured": res.measured_sup},
        rows,
        passed,
        t0,
    )


def commutation_violating_ladder(dim: int) -> ProjectorLadder:
    """Fixture: level 1 is a fixed computational-basis projector, higher
    levels are the identity, so only commutation with a generic reference
    can fail."""
    e11 = np.zeros((dim, dim), dtype=complex)
    e11[0, 0] = 1.0

    def build(n: int, m: int) -> Projector:
        return Projector(e11) if m == 1 else Projector.identity(dim)

    return ProjectorLadder(m0=1, m_max=3, build=build, description="commutation violation fixture")


def covering_violating_ladder(family) -> ProjectorLadder:
    """Fixture: every level is the rank-one top spectral projector of
    sigma_n, so the ladder never grows to cover a full-rank support."""

    def build(n: int, m: int) -> Projector:
        sigma = family.sigma(n)
        return Projector.from_columns(sigma.eigenvectors[:, :1])

    return ProjectorLadder(m0=1, m_max=3, build=build, description="covering violation fixture")


def ladder_suite(seed: int, trials: int = 1, dims=(2, 2)) -> dict:
    """Full-grid consistency of the canonical threshold ladder, plus the two
    deliberate-violation fixtures, each of which must fail exactly its named
    condition."""
    t0 = time.perf_counter()
    fam = jump_family(LN2)
    ladder = threshold_ladder(fam, jump_family_thresholds(LN2, 20))
    main = verify_ladder(ladder, fam, n_max=1000)

    control = continuous_family(2, seed)
    comm = verify_ladder(
        commutation_violating_ladder(2), control, n_max=200, support_tol=1e-9, rank_cutoff=1e-9
    )
    cover = verify_ladder(
        covering_violating_ladder(control), control, n_max=200, support_tol=1e-9, rank_cutoff=1e-9
    )
    comm_ok = comm.failing() == ["commutation"]
    cover_ok = cover.failing() == ["covering"]
    passed = main.passed and comm_ok and cover_ok
    rows = [
        {
            "case": "threshold-ladder",
            "pass": main.passed,
            "conditions": {k: v.passed for k, v in main.conditions.items()},
            "worst": {k: v.worst for k, v in main.conditions.items()},
        },
        {"case": "commutation-violation", "failing": comm.failing(), "pass": comm_ok},
        {"case": "covering-violation", "failing": cover.failing(), "pass": cover_ok},
    ]
    return _report(
        "ladder",
        {"family": {"kind": "jump", "c": LN2, "dim": 2}, "n_max": 1000, "m_max": 20},
        seed,
        {k: v.worst for k, v in main.conditions.items()},
        rows,
        passed,
        t0,
    )


def oracle_suite(seed: int, trials: int = 500, dims=(2, 6)) -> dict:
    """Classical-oracle agreement on commuting pairs and agreement of the
    two divergence formulas on random full-rank pairs."""
    t0 = time.perf_counter()
    lo, hi = _dims_range(dims)
    rows = []
    worst_diag = 0.0
    worst_rep = 0.0
    diag_trials = max(1, trials // 2)
    for i in range(diag_trials):
        rng = as_rng(seed + i)
        dim = int(rng.integers(lo, hi + 1))
        p = rng.uniform(0.05, 1.0, size=dim)
        q = rng.uniform(0.05, 1.0, size=dim)
        rho = PositiveOperator.diagonal(p)
        sigma = PositiveOperator.diagonal(q)
        got = relative_entropy(rho, sigma).value
        classic = float(np.sum(p * (np.log(p) - np.log(q))) + q.sum() - p.sum())
        err = abs(got - classic)
        worst_diag = max(worst_diag, err)
        rows.append({"trial": i, "case": "diagonal", "dim": dim, "error": err})
    for i in range(trials - diag_trials):
        rng = as_rng(seed + diag_trials + i)
        dim = int(rng.integers(lo, hi + 1))
        rho = random_positive(rng, dim)
        sigma = random_positive(rng, dim)
        a = relative_entropy(rho, sigma).value
        b = relative_entropy_via_entropy(rho, sigma).value
        err = abs(a - b)
        worst_rep = max(worst_rep, err)
        rows.append({"trial": diag_trials + i, "case": "representation", "dim": dim, "error": err})
    passed = worst_diag <= 1e-10 and worst_rep <= 1e-8
    return _report(
        "oracle",
        {"trials": trials, "dims": list(dims), "diag_tol": 1e-10, "rep_tol": 1e-8},
        seed,
        {"max_diagonal_error": worst_diag, "max_representation_error": worst_rep},
        rows,
        passed,
        t0,
    )


SUITES = {
    "dpi": dpi_suite,
    "donald": donald_suite,
    "sums": sums_suite,
    "scaling": scaling_suite,
    "pinching": pinching_suite,
    "lemma2": lemma2_suite,
    "lemma3": lemma3_suite,
    "dini": dini_suite,
    "ladder": ladder_suite,
    "oracle": oracle_suite,
}


def run_suite(name: str, seed: int, trials: int | None = None, dims=None) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    fn = SUITES[name]
    kwargs = {}
    if trials is not None:
        kwargs["trials"] = int(trials)
    if dims is not None:
        kwargs["dims"] = tuple(dims)
    return fn(int(seed), **kwargs)
