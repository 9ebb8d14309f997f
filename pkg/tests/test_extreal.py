import math

import pytest

from qrelent.extreal import ExtendedNonNegative


def test_finite_roundtrip():
    x = ExtendedNonNegative.finite(0.25)
    assert x.is_finite and float(x) == 0.25


def test_tiny_negative_clamps_to_zero():
    assert ExtendedNonNegative.finite(-5e-10).value == 0.0


def test_large_negative_rejected():
    with pytest.raises(ValueError):
        ExtendedNonNegative.finite(-1e-6)


def test_nan_rejected():
    with pytest.raises(ValueError):
        ExtendedNonNegative.finite(float("nan"))


def test_infinity_arithmetic_and_order():
    inf = ExtendedNonNegative.infinity()
    one = ExtendedNonNegative.finite(1.0)
    assert not inf.is_finite
    assert (one + inf).value == math.inf
    assert (inf + 3.0).value == math.inf
    assert one < inf and inf > one and inf >= inf and inf == math.inf
    assert one + 0.5 == 1.5


def test_comparisons_total_with_numbers():
    x = ExtendedNonNegative.finite(2.0)
    assert x > 1 and x <= 2.0 and x == 2
