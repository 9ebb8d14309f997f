"""Extended relative entropy for positive trace-class operators.

For positive operators rho and sigma (not necessarily states) the divergence
is

    D(rho || sigma) = sum_i <u_i| rho ln rho - rho ln sigma |u_i>
                      + Tr sigma - Tr rho,

with {u_i} an eigenbasis of rho, the conventions D(0 || sigma) = Tr sigma and
D(rho || sigma) = +inf whenever supp rho is not contained in supp sigma.
Restricted to unit-trace operators the affine terms cancel and this is the
usual relative entropy.

Numerically the only stable evaluation for non-commuting pairs is the double
sum over both spectra with cross weights |<u_i|w_j>|^2, applying the
0 ln 0 = 0 convention eigenvalue-wise; that is what ``relative_entropy``
does. Support containment is decided by compressing rho against the
orthogonal complement of sigma's support projector, which is robust under
rotated eigenbases.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    IndeterminateIdentity,
    InfiniteBaseDivergence,
    NegativeInput,
)
from .extreal import ExtendedNonNegative
from .operators import (
    PositiveOperator,
    default_rank_tol,
    matrix_of,
    operator_norm,
    trace_norm,
)

#: operator-norm bound under which a product of operators counts as zero
ORTHOGONALITY_TOL = 1e-10


def eta(x: float) -> float:
    """The entropy kernel: -x ln x for x > 0, and 0 at x = 0."""
    x = float(x)
    if x < 0.0:
        raise NegativeInput(f"eta requires a nonnegative argument, got {x!r}")
    if x == 0.0:
        return 0.0
    return -x * math.log(x)


def extended_entropy(rho: PositiveOperator) -> ExtendedNonNegative:
    """Homogeneous extension of the von Neumann entropy to the positive cone.

    S(rho) = Tr eta(rho) - eta(Tr rho); S(0) = 0, and S(c rho) = c S(rho)
    for c > 0. Always finite at finite dimension.
    """
    if rho.is_zero:
        return ExtendedNonNegative.finite(0.0)
    spectral = sum(eta(float(lam)) for lam in rho.eigenvalues if lam > 0.0)
    return ExtendedNonNegative.finite(spectral - eta(rho.trace))


def _support_data(sigma: PositiveOperator, rank_tol: float | None):
    """(kept eigenvalues, kept eigenvector columns, tol) of sigma's support."""
    tol = default_rank_tol(sigma) if rank_tol is None else float(rank_tol)
    if tol <= 0.0:
        raise ValueError("rank_tol must be positive")
    keep = sigma.eigenvalues > tol
    return sigma.eigenvalues[keep], sigma.eigenvectors[:, keep], tol


def _support_violated(rho: PositiveOperator, w_cols: np.ndarray, tol: float) -> bool:
    """True when rho carries more than dim * tol trace-norm outside span(w_cols)."""
    comp = np.eye(rho.dim, dtype=complex) - w_cols @ w_cols.conj().T
    leak = trace_norm(comp @ rho.matrix @ comp)
    return leak > rho.dim * tol


def relative_entropy(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    rank_tol: float | None = None,
) -> ExtendedNonNegative:
    """Extended relative entropy D(rho || sigma), +inf on support violation.

    ``rank_tol`` controls which sigma eigenvalues count as support (default
    1e-9 * max(lambda_max, 1)); lower it when the inputs carry genuinely tiny
    eigenvalues that must be resolved.
    """
    if rho.is_zero:
        return ExtendedNonNegative.finite(sigma.trace)
    q, w, tol = _support_data(sigma, rank_tol)
    if q.size == 0:
        # empty support: the leak rule degenerates to Tr rho <= dim * tol,
        # under which rho counts as the zero operator at this resolution
        if rho.trace <= rho.dim * tol:
            return ExtendedNonNegative.finite(sigma.trace)
        return ExtendedNonNegative.infinity()
    if _support_violated(rho, w, tol):
        return ExtendedNonNegative.infinity()

    keep_p = rho.eigenvalues > 0.0
    p = rho.eigenvalues[keep_p]
    u = rho.eigenvectors[:, keep_p]
    plogp = float(np.sum(p * np.log(p)))
    overlaps = np.abs(u.conj().T @ w) ** 2
    cross = float(p @ overlaps @ np.log(q))
    value = plogp - cross + sigma.trace - rho.trace
    return ExtendedNonNegative.finite(value)


def relative_entropy_via_entropy(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    rank_tol: float | None = None,
) -> ExtendedNonNegative:
    """D computed from the entropy representation

        D(rho || sigma) = Tr rho (-ln sigma) - S(rho) - eta(Tr rho)
                          + Tr sigma - Tr rho,

    with Tr rho (-ln sigma) evaluated spectrally on sigma's support and the
    infinite branch triggered by support violation. Agrees with
    ``relative_entropy`` within 1e-8 whenever both are finite.
    """
    if rho.is_zero:
        return ExtendedNonNegative.finite(sigma.trace)
    q, w, tol = _support_data(sigma, rank_tol)
    if q.size == 0:
        if rho.trace <= rho.dim * tol:
            return ExtendedNonNegative.finite(sigma.trace)
        return ExtendedNonNegative.infinity()
    if _support_violated(rho, w, tol):
        return ExtendedNonNegative.infinity()

    weights = np.einsum("ij,jk,ki->i", w.conj().T, rho.matrix, w).real
    tr_neg_log = float(-np.log(q) @ weights)
    s_rho = extended_entropy(rho).value
    value = tr_neg_log - s_rho - eta(rho.trace) + sigma.trace - rho.trace
    return ExtendedNonNegative.finite(value)


def scaling_residuals(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    c: float,
    rank_tol: float | None = None,
) -> tuple[float, float]:
    """Residuals of the two scaling identities, both zero in exact arithmetic:

        r1 = D(c rho || c sigma) - c D(rho || sigma)
        r2 = D(rho || c sigma) - [D(rho || sigma) - Tr rho ln c + (c - 1) Tr sigma]
    """
    c = float(c)
    if c <= 0.0:
        raise ValueError(f"scale must be positive, got {c!r}")
    base = relative_entropy(rho, sigma, rank_tol)
    if not base.is_finite:
        raise InfiniteBaseDivergence("scaling identities require D(rho||sigma) < inf")
    scaled_rho = PositiveOperator(c * rho.matrix)
    scaled_sigma = PositiveOperator(c * sigma.matrix)
    both = relative_entropy(scaled_rho, scaled_sigma, rank_tol)
    second = relative_entropy(rho, scaled_sigma, rank_tol)
    r1 = both.value - c * base.value
    r2 = second.value - (base.value - rho.trace * math.log(c) + (c - 1.0) * sigma.trace)
    return r1, r2


@dataclass(frozen=True)
class SumDecomposition:
    """Result of a subadditivity / orthogonal-additivity check.

    ``gap`` = D(rho||omega) + D(sigma||theta) - D(rho+sigma || omega+theta),
    nonnegative up to roundoff; ``None`` when indeterminate. ``exact`` is set
    when all four cross products vanish, in which case the gap is zero up to
    roundoff.
    """

    gap: ExtendedNonNegative | None
    exact: bool
    indeterminate: bool


def sum_decomposition_check(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    omega: PositiveOperator,
    theta: PositiveOperator,
    rank_tol: float | None = None,
) -> SumDecomposition:
    """Check D(rho+sigma || omega+theta) <= D(rho||omega) + D(sigma||theta).

    An inf - inf situation is reported through ``indeterminate`` rather than
    silently as NaN or zero.
    """
    cross = max(
        operator_norm(rho.matrix @ sigma.matrix),
        operator_norm(rho.matrix @ theta.matrix),
        operator_norm(sigma.matrix @ omega.matrix),
        operator_norm(omega.matrix @ theta.matrix),
    )
    exact = cross <= ORTHOGONALITY_TOL

    term_side = relative_entropy(rho, omega, rank_tol) + relative_entropy(
        sigma, theta, rank_tol
    )
    sum_side = relative_entropy(
        PositiveOperator(rho.matrix + sigma.matrix),
        PositiveOperator(omega.matrix + theta.matrix),
        rank_tol,
    )
    if not term_side.is_finite:
        if not sum_side.is_finite:
            return SumDecomposition(gap=None, exact=exact, indeterminate=True)
        return SumDecomposition(
            gap=ExtendedNonNegative.infinity(), exact=exact, indeterminate=False
        )
    # the inequality forces the sum side finite whenever the term side is
    gap = ExtendedNonNegative.finite(term_side.value - sum_side.value)
    return SumDecomposition(gap=gap, exact=exact, indeterminate=False)


@dataclass(frozen=True)
class DonaldDecomposition:
    """Both sides of Donald's identity and their residual.

    lhs  = p D(rho||omega) + (1-p) D(sigma||omega)
    rhs  = p D(rho||mix) + (1-p) D(sigma||mix) + D(mix||omega),
           mix = p rho + (1-p) sigma
    """

    lhs: float
    mixture_terms: tuple[float, float]
    outer_term: float
    residual: float


def donald_identity(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    omega: PositiveOperator,
    p: float,
    rank_tol: float | None = None,
) -> DonaldDecomposition:
    """Evaluate Donald's identity for arbitrary positive operators.

    Terms with weight exactly zero are dropped without being evaluated, so
    p = 0 and p = 1 degenerate cleanly. Any infinite term among the weighted
    ones raises ``IndeterminateIdentity``.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight must lie in [0, 1], got {p!r}")
    pbar = 1.0 - p
    mix = PositiveOperator(p * rho.matrix + pbar * sigma.matrix)

    def _finite(a: PositiveOperator, b: PositiveOperator, label: str) -> float:
        d = relative_entropy(a, b, rank_tol)
        if not d.is_finite:
            raise IndeterminateIdentity(f"{label} is infinite")
        return d.value

    lhs = 0.0
    t_rho_mix = 0.0
    t_sigma_mix = 0.0
    if p > 0.0:
        lhs += p * _finite(rho, omega, "D(rho||omega)")
        t_rho_mix = p * _finite(rho, mix, "D(rho||mix)")
    if pbar > 0.0:
        lhs += pbar * _finite(sigma, omega, "D(sigma||omega)")
        t_sigma_mix = pbar * _finite(sigma, mix, "D(sigma||mix)")
    outer = _finite(mix, omega, "D(mix||omega)")
    residual = lhs - (t_rho_mix + t_sigma_mix + outer)
    return DonaldDecomposition(
        lhs=lhs,
        mixture_terms=(t_rho_mix, t_sigma_mix),
        outer_term=outer,
        residual=residual,
    )


def symmetrized_divergence(
    rho: PositiveOperator,
    sigma: PositiveOperator,
    rank_tol: float | None = None,
) -> float:
    """D(rho || m) + D(sigma || m) with m the even mixture of rho and sigma.

    Always finite: each argument is dominated by twice the mixture, so the
    support condition holds automatically. Unlike the plain divergence this
    quantity is continuous in the pair, which is exactly why it appears in
    the verification battery.
    """
    mix = PositiveOperator(0.5 * (matrix_of(rho) + matrix_of(sigma)))
    a = relative_entropy(rho, mix, rank_tol)
    b = relative_entropy(sigma, mix, rank_tol)
    return a.value + b.value
