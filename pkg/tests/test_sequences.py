import math

import numpy as np
import pytest

from qrelent.divergence import relative_entropy
from qrelent.errors import (
    FamilyEvaluationError,
    LadderConstructionFailure,
    ThresholdCollision,
)
from qrelent.operators import PositiveOperator, trace_distance
from qrelent.sequences import (
    continuous_family,
    geometric_midpoint_thresholds,
    jump_family,
    jump_family_thresholds,
    jump_weight,
    tabulated_family,
    threshold_ladder,
    verify_ladder,
)
from qrelent.suites import commutation_violating_ladder, covering_violating_ladder

from oracles import classical_divergence, jump_family_divergence

LN2 = math.log(2)


class TestJumpFamily:
    def test_members_are_states(self):
        fam = jump_family(LN2)
        for n in (1, 2, 17, 400):
            rho, sigma = fam.pair(n)
            assert rho.trace == pytest.approx(1.0, abs=1e-12)
            assert sigma.trace == pytest.approx(1.0, abs=1e-12)

    def test_first_member_degenerates(self):
        rho, _ = jump_family(0.5).pair(1)
        assert np.allclose(rho.matrix, np.diag([0.0, 1.0]))

    def test_limit_pair_divergence_zero(self):
        fam = jump_family(1.0)
        rho0, sigma0 = fam.limit
        assert relative_entropy(rho0, sigma0).value == 0.0
        assert fam.input_divergence(0) == 0.0

    def test_closed_form_identity_against_matrix_path(self):
        # both routes computed independently; matrix path needs a tolerance
        # below the decaying weight
        fam = jump_family(LN2)
        for n in (1, 2, 5, 30, 120):
            rho, sigma = fam.pair(n)
            via_matrix = relative_entropy(rho, sigma, rank_tol=1e-60).value
            reduced = jump_family_divergence(LN2, n)
            assert abs(via_matrix - fam.input_divergence(n)) <= 1e-12
            assert abs(via_matrix - reduced) <= 1e-12

    def test_closed_form_against_scalar_oracle(self):
        c = 0.8
        fam = jump_family(c)
        for n in (2, 7, 50):
            q = jump_weight(c, n)
            want = classical_divergence([1 - 1 / n, 1 / n], [1 - q, q])
            assert fam.input_divergence(n) == pytest.approx(want, rel=1e-13)

    def test_closed_form_survives_underflow(self):
        # at c = 1.5, n = 1000 the weight underflows float64 entirely
        fam = jump_family(1.5)
        assert jump_weight(1.5, 1000) == 0.0
        assert fam.input_divergence(1000) == pytest.approx(1.5, abs=2e-3)

    def test_trace_norm_convergence_rate(self):
        fam = jump_family(LN2)
        rho, sigma = fam.pair(1000)
        rho0, sigma0 = fam.limit
        # documented rate 2/n, checked within a factor of 10
        assert trace_distance(rho, rho0) <= 10 * (2 / 1000)
        assert trace_distance(sigma, sigma0) <= 10 * (2 / 1000)

    def test_lower_semicontinuity_along_family(self):
        fam = jump_family(0.3)
        limit_val = fam.input_divergence(0)
        assert min(fam.input_divergence(n) for n in range(950, 1001)) >= limit_val - 1e-9

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            jump_family(0.0)
        with pytest.raises(ValueError):
            jump_family(1.0, dim=1)
        with pytest.raises(FamilyEvaluationError):
            jump_family(1.0).pair(0)


class TestContinuousFamily:
    def test_members_converge(self):
        fam = continuous_family(3, seed=7)
        rho, _ = fam.pair(1000)
        assert trace_distance(rho, fam.limit[0]) <= 10 * (2 / 1000)

    def test_divergence_trend_toward_limit(self):
        fam = continuous_family(2, seed=11)
        limit_val = relative_entropy(*fam.limit).value
        deviations = [
            abs(relative_entropy(*fam.pair(n)).value - limit_val) for n in (10, 100, 1000)
        ]
        assert deviations[2] < deviations[0]
        assert deviations[2] <= 1e-2

    def test_seed_determinism(self):
        a = continuous_family(3, seed=5).pair(7)
        b = continuous_family(3, seed=5).pair(7)
        assert np.array_equal(a[0].matrix, b[0].matrix)


class TestTabulatedFamily:
    def test_lookup_and_missing(self):
        member = (PositiveOperator.diagonal([1.0, 0.0]), PositiveOperator.diagonal([0.5, 0.5]))
        fam = tabulated_family(2, {3: member}, member)
        assert fam.pair(3) is member
        with pytest.raises(FamilyEvaluationError):
            fam.pair(4)


class TestThresholds:
    def test_jump_thresholds_interleave_the_weights(self):
        c = 0.25
        ths = jump_family_thresholds(c, 12)
        for m, delta in enumerate(ths, start=1):
            assert jump_weight(c, m + 1) < delta < jump_weight(c, m)

    def test_plateau_halves(self):
        ths = geometric_midpoint_thresholds([0.5] * 6, 5)
        assert ths[0] == pytest.approx(0.25)
        assert all(b < a for a, b in zip(ths, ths[1:]))

    def test_floor_refused(self):
        with pytest.raises(LadderConstructionFailure):
            geometric_midpoint_thresholds([1e-3, 1e-9, 1e-15], 2, floor=1e-12)

    def test_needs_enough_branch_values(self):
        with pytest.raises(LadderConstructionFailure):
            geometric_midpoint_thresholds([0.5, 0.1], 1000)


class TestThresholdLadder:
    def test_projector_pattern_on_jump_family(self):
        c = LN2
        fam = jump_family(c)
        ladder = threshold_ladder(fam, jump_family_thresholds(c, 6))
        for m in (1, 3, 6):
            for n in (1, 2, 10, 40):
                p = ladder.projector(n, m)
                if n <= m:
                    assert p.rank == 2
                else:
                    assert p.rank == 1
                    assert np.allclose(p.matrix, np.diag([1.0, 0.0]))
            assert ladder.projector(0, m).rank == 1

    def test_collision_refused(self):
        fam = jump_family(LN2)
        q3 = jump_weight(LN2, 3)
        ladder = threshold_ladder(fam, [q3])  # exactly on the n = 3 eigenvalue
        with pytest.raises(ThresholdCollision):
            ladder.projector(3, 1)

    def test_threshold_validation(self):
        fam = jump_family(LN2)
        with pytest.raises(ValueError):
            threshold_ladder(fam, [])
        with pytest.raises(ValueError):
            threshold_ladder(fam, [0.1, 0.2])
        with pytest.raises(ValueError):
            threshold_ladder(fam, [0.1, -0.2])

    def test_memoization_returns_same_object(self):
        fam = jump_family(LN2)
        ladder = threshold_ladder(fam, jump_family_thresholds(LN2, 3))
        assert ladder.projector(5, 2) is ladder.projector(5, 2)


class TestVerifyLadder:
    def test_threshold_ladder_passes_all_conditions(self):
        fam = jump_family(LN2)
        ladder = threshold_ladder(fam, jump_family_thresholds(LN2, 8))
        report = verify_ladder(ladder, fam, n_max=200)
        assert report.passed, report.failing()

    def test_commutation_fixture_fails_only_commutation(self):
        control = continuous_family(2, seed=42)
        report = verify_ladder(
            commutation_violating_ladder(2), control, n_max=150,
            support_tol=1e-9, rank_cutoff=1e-9,
        )
        assert report.failing() == ["commutation"]

    def test_covering_fixture_fails_only_covering(self):
        control = continuous_family(2, seed=42)
        report = verify_ladder(
            covering_violating_ladder(control), control, n_max=150,
            support_tol=1e-9, rank_cutoff=1e-9,
        )
        assert report.failing() == ["covering"]
