"""Exact learning coefficients for latent Dirichlet allocation.

The marginal likelihood of a singular model behaves like
``C * n^{-lambda} * (log n)^{m-1}`` for large sample size n, where
lambda is the real log canonical threshold (RLCT, also called the
learning coefficient) and m its multiplicity.  For LDA with M words,
N documents, H topics and intrinsic rank r of the true word
distribution, lambda and m have a closed form that splits into four
regimes; this module evaluates that closed form in exact rational
arithmetic, together with the matching coefficient for reduced-rank
matrix factorization and the asymptotic curves they induce.

All lambda values are returned as ``fractions.Fraction``; 8*lambda is
always an integer, so nothing here ever touches floating point until
a curve is evaluated at a concrete sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

__all__ = [
    "InvalidShapeError",
    "LdaShape",
    "RlctResult",
    "AsymptoticCurve",
    "lda_rlct",
    "mf_rlct",
    "lda_dimension",
    "expected_generalization_error",
    "free_energy_penalty",
]


class InvalidShapeError(ValueError):
    """A model shape violates one of its documented constraints."""


def _require(condition: bool, constraint: str) -> None:
    if not condition:
        raise InvalidShapeError(constraint)


def _require_int(value: object, name: str) -> int:
    # bool is an int subclass; reject it to keep shapes honest
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidShapeError(f"{name} must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class LdaShape:
    """Shape of an LDA learning problem.

    M : vocabulary size (M >= 2)
    N : number of documents (N >= 2)
    H : topics in the fitted model (1 <= H0 <= H)
    H0 : topics in the true model
    r : intrinsic rank of the truth, 0 <= r <= min(M-1, N-1, H0-1)
    """

    M: int
    N: int
    H: int
    H0: int
    r: int

    def __post_init__(self) -> None:
        for name in ("M", "N", "H", "H0", "r"):
            _require_int(getattr(self, name), name)
        _require(self.M >= 2, f"M >= 2 required, got M={self.M}")
        _require(self.N >= 2, f"N >= 2 required, got N={self.N}")
        _require(
            1 <= self.H0 <= self.H,
            f"1 <= H0 <= H required, got H0={self.H0}, H={self.H}",
        )
        rmax = min(self.M - 1, self.N - 1, self.H0 - 1)
        _require(
            0 <= self.r <= rmax,
            f"0 <= r <= min(M-1, N-1, H0-1) = {rmax} required, got r={self.r}",
        )

    @property
    def dimension(self) -> int:
        """Parameter count of the fitted model, (M-1)H + (H-1)N."""
        return lda_dimension(self.M, self.N, self.H)


@dataclass(frozen=True)
class RlctResult:
    """A learning coefficient together with its multiplicity."""

    lam: Fraction
    multiplicity: int

    def __post_init__(self) -> None:
        # 0 only occurs for the degenerate rank-zero factorization;
        # every valid LDA shape gives a strictly positive value
        _require(self.lam >= 0, f"lambda must be non-negative, got {self.lam}")
        _require(
            self.multiplicity in (1, 2),
            f"multiplicity must be 1 or 2, got {self.multiplicity}",
        )


def lda_dimension(M: int, N: int, H: int) -> int:
    """Free parameter count of LDA: (M-1)H word dofs + (H-1)N topic dofs."""
    _require_int(M, "M")
    _require_int(N, "N")
    _require_int(H, "H")
    _require(M >= 2, f"M >= 2 required, got M={M}")
    _require(N >= 2, f"N >= 2 required, got N={N}")
    _require(H >= 1, f"H >= 1 required, got H={H}")
    return (M - 1) * H + (H - 1) * N


def mf_rlct(m: int, n: int, h: int, r: int) -> RlctResult:
    """Learning coefficient of reduced-rank matrix factorization.

    The model is an m x n matrix factored through rank h, the truth
    having rank r.  Valid inputs: m, n >= 1, h >= 0, and
    r <= min(m, n, h) for h >= 1; (h, r) = (0, 0) is the degenerate
    rank-zero model, whose coefficient is 0 with multiplicity 1.

    Returns the pair (lambda, multiplicity) with lambda exact.
    """
    _require_int(m, "m")
    _require_int(n, "n")
    _require_int(h, "h")
    _require_int(r, "r")
    _require(m >= 1, f"m >= 1 required, got m={m}")
    _require(n >= 1, f"n >= 1 required, got n={n}")
    _require(h >= 0, f"h >= 0 required, got h={h}")
    if h == 0:
        _require(r == 0, f"h = 0 forces r = 0, got r={r}")
        return RlctResult(Fraction(0, 1), 1)
    _require(
        0 <= r <= min(m, n, h),
        f"0 <= r <= min(m, n, h) = {min(m, n, h)} required, got r={r}",
    )
    if n + r <= m + h and m + r <= n + h and h + r <= m + n:
        # interior regime: all three triangle-type inequalities hold
        base = 2 * (h + r) * (m + n) - (m - n) ** 2 - (h + r) ** 2
        if (m + n + h + r) % 2 == 0:
            return RlctResult(Fraction(base, 8), 1)
        return RlctResult(Fraction(base + 1, 8), 2)
    if m + h < n + r:
        return RlctResult(Fraction(m * h + n * r - h * r, 2), 1)
    if n + h < m + r:
        return RlctResult(Fraction(n * h + m * r - h * r, 2), 1)
    # remaining regime: h + r > m + n
    return RlctResult(Fraction(m * n, 2), 1)


def lda_rlct(M: int, N: int, H: int, r: int, H0: int | None = None) -> RlctResult:
    """Learning coefficient of LDA with M words, N documents, H topics.

    r is the intrinsic rank of the true word distribution (see
    ``lda_rlct.model.intrinsic_rank``).  H0, the true topic count,
    only constrains validity through r; when omitted it defaults to
    r + 1, the smallest value compatible with the given r.

    The coefficient splits into four regimes.  Writing s = H + r + 1:

    1. interior (N+r+1 <= M+H, M+r+1 <= N+H, H+r+1 <= M+N):
       lambda = (2s(M+N) - (M-N)^2 - s^2)/8 - N/2, multiplicity 1,
       when M+N+H+r is odd; with an extra +1/8 and multiplicity 2
       when it is even.
    2. M+H < N+r+1: lambda = (MH + N(r+1) - H(r+1) - N)/2.
    3. N+H < M+r+1: lambda = (NH + M(r+1) - H(r+1) - N)/2.
    4. otherwise (M+N < H+r+1): lambda = (MN - N)/2.

    Regimes 2-4 have multiplicity 1.  Exactly one regime applies to
    every valid shape.
    """
    if H0 is None:
        H0 = r + 1
    shape = LdaShape(M, N, H, H0, r)
    M, N, H, r = shape.M, shape.N, shape.H, shape.r
    s = H + r + 1
    if N + r + 1 <= M + H and M + r + 1 <= N + H and H + r + 1 <= M + N:
        base = 2 * s * (M + N) - (M - N) ** 2 - s * s - 4 * N
        if (M + N + H + r) % 2 == 1:
            return RlctResult(Fraction(base, 8), 1)
        return RlctResult(Fraction(base + 1, 8), 2)
    if M + H < N + r + 1:
        return RlctResult(Fraction(M * H + N * (r + 1) - H * (r + 1) - N, 2), 1)
    if N + H < M + r + 1:
        return RlctResult(Fraction(N * H + M * (r + 1) - H * (r + 1) - N, 2), 1)
    # remaining regime: M + N < H + r + 1
    return RlctResult(Fraction(M * N - N, 2), 1)


def _as_float(lam: Fraction | float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return lam


def expected_generalization_error(
    lam: Fraction | float, multiplicity: int, n: int
) -> float:
    """Leading asymptotic generalization error lambda/n - (m-1)/(n log n).

    Requires n >= 3 so the correction term is well behaved.
    """
    _require_int(n, "n")
    if n < 3:
        raise ValueError(f"n >= 3 required, got n={n}")
    lam = _as_float(lam)
    return lam / n - (multiplicity - 1) / (n * math.log(n))


def free_energy_penalty(lam: Fraction | float, multiplicity: int, n: int) -> float:
    """Asymptotic free-energy penalty lambda*log(n) - (m-1)*log(log(n)).

    Requires n >= 16 to keep log(log(n)) comfortably positive.
    """
    _require_int(n, "n")
    if n < 16:
        raise ValueError(f"n >= 16 required, got n={n}")
    lam = _as_float(lam)
    return lam * math.log(n) - (multiplicity - 1) * math.log(math.log(n))


@dataclass(frozen=True)
class AsymptoticCurve:
    """A learning coefficient evaluated along a grid of sample sizes."""

    lam: Fraction
    multiplicity: int
    n_grid: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        RlctResult(Fraction(self.lam), self.multiplicity)
        for n in self.n_grid:
            _require_int(n, "n")
            if n < 3:
                raise ValueError(f"grid values must be >= 3, got n={n}")

    def gen_errors(self) -> list[float]:
        return [
            expected_generalization_error(self.lam, self.multiplicity, n)
            for n in self.n_grid
        ]


def curve_rows(
    lam: Fraction | float,
    multiplicity: int,
    n_grid: Sequence[int],
    dimension: int | None = None,
) -> list[tuple[int, float, float | None]]:
    """Rows (n, expected error, d/(2n) baseline) for a learning curve.

    The baseline column is the error of a regular model with the given
    parameter count; it is None when dimension is omitted.  Grid values
    must be >= 16.
    """
    rows: list[tuple[int, float, float | None]] = []
    for n in n_grid:
        _require_int(n, "n")
        if n < 16:
            raise ValueError(f"curve grid requires n >= 16, got n={n}")
        e_lda = expected_generalization_error(lam, multiplicity, n)
        e_reg = dimension / (2 * n) if dimension is not None else None
        rows.append((n, e_lda, e_reg))
    return rows
