"""Acceptance battery: one test per criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -v -s`` to see them live).

Every tolerance is pinned here, not calibrated elsewhere. Estimator checks
state their window geometry explicitly: windowed sups stand in for limit
superiors, with slacks sized to the constructed families' known convergence
rates. Dense random channels are probed at depths where float64 matrices
still carry the decaying spectral branch faithfully; the structured
channels, which preserve the diagonal form exactly, are probed three
decades deeper.
"""

import json
import math

from qrelent.channels import (
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    random_channel,
    random_operation,
)
from qrelent.cli import main as cli_main
from qrelent.divergence import symmetrized_divergence
from qrelent.io import report_json
from qrelent.operators import PositiveOperator
from qrelent.sampling import as_rng
from qrelent.sequences import jump_family
from qrelent.suites import (
    donald_suite,
    dpi_suite,
    ladder_suite,
    lemma2_suite,
    oracle_suite,
    scaling_suite,
    sums_suite,
)
from qrelent.verify import (
    check_dini,
    check_jump_monotonicity,
    check_operation_reduction,
    check_symmetrized_continuity,
    compression_trace,
    estimate_jump,
)

LN2 = math.log(2)
SEED = 20260808


def announce(name: str, passed: bool, detail: str):
    print(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'} ({detail})", flush=True)
    assert passed, f"{name}: {detail}"


def test_dpi_suite():
    report = dpi_suite(SEED, trials=1000, dims=(2, 6))
    worst = report["residuals"]["max_violation"]
    announce(
        "dpi-suite",
        report["pass"] and worst <= 1e-8,
        f"1000 trials, max violation {worst:.3e} <= 1e-08",
    )


def test_identity_suite():
    scaling = scaling_suite(SEED + 1, trials=500, dims=(2, 6))
    sums = sums_suite(SEED + 2, trials=1000, dims=(2, 4))
    worst_scaling = scaling["residuals"]["max_abs_residual"]
    min_gap = sums["residuals"]["min_random_gap"]
    worst_exact = sums["residuals"]["max_orthogonal_residual"]
    ok = (
        scaling["pass"]
        and sums["pass"]
        and worst_scaling <= 1e-9
        and worst_exact <= 1e-9
        and min_gap >= -1e-9
    )
    announce(
        "identity-suite",
        ok,
        f"scaling residual {worst_scaling:.2e} <= 1e-09, orthogonal residual "
        f"{worst_exact:.2e} <= 1e-09, min subadditivity gap {min_gap:.2e} >= -1e-09",
    )


def test_donald_suite():
    report = donald_suite(SEED + 3, trials=200, dims=(2, 6))
    worst = report["residuals"]["max_abs_residual"]
    announce(
        "donald-suite",
        report["pass"],
        f"200 trials, max |residual| {worst:.3e}, per-trial bound 1e-09 * max(1, lhs)",
    )


def test_classical_oracle():
    report = oracle_suite(SEED + 4, trials=1000, dims=(2, 6))
    diag = report["residuals"]["max_diagonal_error"]
    rep = report["residuals"]["max_representation_error"]
    ok = report["pass"] and diag <= 1e-10 and rep <= 1e-8
    announce(
        "classical-oracle",
        ok,
        f"500 diagonal pairs err {diag:.2e} <= 1e-10; 500 representation pairs "
        f"err {rep:.2e} <= 1e-08",
    )


def test_jump_family_ground_truth():
    errs = {}
    for c in (0.25, LN2, 1.5):
        est = estimate_jump(jump_family(c), None, n_max=1000, window=50)
        errs[c] = abs(est.estimate - c)
    worst = max(errs.values())
    announce(
        "jump-ground-truth",
        worst <= 5e-3,
        f"n_max=1000, window=50, worst |estimate - c| = {worst:.2e} <= 5e-03",
    )


def test_jump_monotonicity_suite():
    fam = jump_family(LN2)
    # 200 random channels 2 -> {2, 3, 4}, Kraus rank <= 3, probed inside the
    # float-faithful depth for dense images
    worst_out = -math.inf
    for trial in range(200):
        rng = as_rng(SEED + 10_000 + trial)
        dim_out = int(rng.integers(2, 5))
        kraus = int(rng.integers(1, 4))
        cmp_ = check_jump_monotonicity(
            fam, random_channel(2, dim_out, kraus, rng),
            n_max=20, window=10, slack=5e-3, rank_tol=1e-13,
        )
        assert cmp_.passed and not cmp_.output.infinite
        worst_out = max(worst_out, cmp_.output.estimate)
    # 50 random trace-non-increasing operations
    for trial in range(50):
        rng = as_rng(SEED + 20_000 + trial)
        op = random_operation(2, int(rng.integers(2, 5)), int(rng.integers(1, 4)), rng)
        cmp_ = check_jump_monotonicity(
            fam, op, n_max=20, window=10, slack=5e-3, rank_tol=1e-13
        )
        assert cmp_.passed and not cmp_.output.infinite
        worst_out = max(worst_out, cmp_.output.estimate)
    # equality case: dephasing in the family basis, probed at full depth
    eq = check_jump_monotonicity(
        fam, dephasing_channel(2), n_max=1000, window=50, slack=5e-3, rank_tol=1e-310
    )
    eq_err = abs(eq.output.estimate - LN2)
    ok = worst_out <= LN2 + 5e-3 and eq.passed and eq_err <= 5e-3
    announce(
        "jump-monotonicity-suite",
        ok,
        f"250 maps: max output estimate {worst_out:.4f} <= ln2 + 5e-03; "
        f"dephasing equality |estimate - ln2| = {eq_err:.2e} <= 5e-03",
    )


def test_depolarizing_collapse():
    est = estimate_jump(jump_family(LN2), depolarizing_channel(2), n_max=1000, window=50)
    announce(
        "depolarizing-collapse",
        abs(est.estimate) <= 1e-6,
        f"output estimate {est.estimate:.2e} <= 1e-06",
    )


def test_compression_trace_replay():
    fam = jump_family(LN2)
    named = [
        ("identity", identity_channel(2), dict(n_max=200, rank_tol=1e-300)),
        ("dephasing", dephasing_channel(2), dict(n_max=200, rank_tol=1e-300)),
        # dense images lose the decaying branch to roundoff beyond n ~ 20
        ("random-2to3", random_channel(2, 3, 2, seed=SEED), dict(n_max=20, rank_tol=1e-13)),
    ]
    details = []
    all_ok = True
    for label, channel, kw in named:
        report = compression_trace(fam, channel, m_list=range(1, 11), slack=5e-3, **kw)
        five = [
            "a_m_monotone",
            "a_m_dominated",
            "tail_bound",
            "dini_gap",
            "pinching_identity",
        ]
        ok = all(report.checks[k].passed for k in five)
        # the same arrays must satisfy the standalone two-index bound
        arrays = {t.m: list(t.a_m) for t in report.traces}
        dini = check_dini(list(report.traces[0].a), arrays, delta=report.delta, tol=5e-3)
        ok = ok and dini.passed
        all_ok = all_ok and ok
        details.append(f"{label}: gap {report.checks['dini_gap'].worst:.4f} <= "
                       f"{report.delta:.4f} + 5e-03")
    announce("compression-trace-replay", all_ok, "; ".join(details))


def test_ladder_suite():
    report = ladder_suite(SEED + 5)
    cases = {row["case"]: row for row in report["trials"]}
    main_ok = cases["threshold-ladder"]["pass"]
    comm = cases["commutation-violation"]
    cover = cases["covering-violation"]
    ok = (
        report["pass"]
        and main_ok
        and comm["failing"] == ["commutation"]
        and cover["failing"] == ["covering"]
    )
    announce(
        "ladder-suite",
        ok,
        "threshold ladder: all five conditions on n <= 1000, m <= 20; "
        f"fixtures fail exactly {comm['failing']} and {cover['failing']}",
    )


def test_compressed_and_symmetrized_continuity():
    compressed = lemma2_suite(SEED + 6, trials=10)
    trend = check_symmetrized_continuity(jump_family(LN2), n_max=1000, tol=1e-3)
    ortho = symmetrized_divergence(
        PositiveOperator.diagonal([1.0, 0.0]), PositiveOperator.diagonal([0.0, 1.0])
    )
    ortho_err = abs(ortho - 2 * LN2)
    ok = compressed["pass"] and trend.passed and ortho_err <= 1e-10
    announce(
        "continuity-suites",
        ok,
        f"compressed m=1..10 max end deviation "
        f"{compressed['residuals']['max_end_deviation']:.2e}; symmetrized deviation "
        f"{trend.end_deviation:.2e} <= 1e-03 at n=1000; orthogonal-pure error "
        f"{ortho_err:.2e} <= 1e-10",
    )


def test_operation_reduction():
    fam = jump_family(LN2)
    worst_margin = -math.inf
    ok = True
    for trial in range(50):
        rng = as_rng(SEED + 30_000 + trial)
        op = random_operation(2, int(rng.integers(2, 5)), int(rng.integers(1, 4)), rng)
        red = check_operation_reduction(fam, op, n_max=20, window=10, rank_tol=1e-13, tol=1e-6)
        ok = ok and red.passed
        worst_margin = max(worst_margin, red.direct.estimate - red.extended.estimate)
    announce(
        "operation-reduction",
        ok and worst_margin <= 1e-6,
        f"50 operations, max (direct - extended) = {worst_margin:.2e} <= 1e-06",
    )


def test_determinism(tmp_path):
    first = dpi_suite(123, trials=40, dims=(2, 4))
    second = dpi_suite(123, trials=40, dims=(2, 4))
    for doc in (first, second):
        doc.pop("runtime_ms")
    library_ok = report_json(first) == report_json(second)

    fam_path = tmp_path / "fam.json"
    fam_path.write_text(json.dumps({"kind": "jump", "c": LN2, "dim": 2}))
    blobs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        rc = cli_main(
            ["jump", str(fam_path), "--channel", "random(3,2)", "--seed", "11",
             "--nmax", "20", "--window", "10", "--rank-tol", "1e-13",
             "--out", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        doc.pop("runtime_ms")
        blobs.append(json.dumps(doc, sort_keys=True))
    cli_ok = blobs[0] == blobs[1]
    announce(
        "determinism",
        library_ok and cli_ok,
        "reports byte-identical modulo runtime_ms (library and CLI paths)",
    )
