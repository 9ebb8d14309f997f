"""Extended nonnegative reals: the value set [0, +inf] used by all divergences.

Tiny negative values produced by floating-point cancellation are clamped to
zero at construction; anything below the clamping band is treated as a bug in
the caller and rejected. Comparisons are total because NaN is never admitted.
"""

from dataclasses import dataclass
import math

#: negatives in [-NEGATIVE_CLAMP, 0) are rounded up to zero at construction
NEGATIVE_CLAMP = 1e-9


@dataclass(frozen=True)
class ExtendedNonNegative:
    """A finite nonnegative real or positive infinity.

    ``value`` is ``math.inf`` exactly when the quantity is infinite. Use the
    ``finite``/``infinity`` constructors rather than the raw dataclass field.
    """

    value: float

    @classmethod
    def finite(cls, x: float) -> "ExtendedNonNegative":
        x = float(x)
        if math.isnan(x):
            raise ValueError("extended nonnegative value cannot be NaN")
        if math.isinf(x):
            if x > 0:
                return cls(math.inf)
            raise ValueError("extended nonnegative value cannot be -inf")
        if x < 0.0:
            if x < -NEGATIVE_CLAMP:
                raise ValueError(
                    f"value {x!r} is below the negative roundoff band "
                    f"(-{NEGATIVE_CLAMP})"
                )
            x = 0.0
        return cls(x)

    @classmethod
    def infinity(cls) -> "ExtendedNonNegative":
        return cls(math.inf)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value

    def __add__(self, other):
        if isinstance(other, ExtendedNonNegative):
            other = other.value
        elif not isinstance(other, (int, float)):
            return NotImplemented
        return ExtendedNonNegative.finite(self.value + float(other))

    __radd__ = __add__

    def _cmp_value(self, other) -> float:
        if isinstance(other, ExtendedNonNegative):
            return other.value
        if isinstance(other, (int, float)):
            return float(other)
        raise TypeError(f"cannot compare ExtendedNonNegative with {type(other)!r}")

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __eq__(self, other):
        if isinstance(other, (ExtendedNonNegative, int, float)):
            return self.value == self._cmp_value(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self) -> str:
        if self.is_finite:
            return f"ExtendedNonNegative({self.value!r})"
        return "ExtendedNonNegative(inf)"

    def __str__(self) -> str:
        return "inf" if not self.is_finite else repr(self.value)
