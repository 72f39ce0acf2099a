"""Moment, cumulant, and symmetric-function algebra.

Cumulants are the canonical internal basis: they add under convolution,
and for a single Bernoulli(p) trial the r-th cumulant is an integer
polynomial ``kappa_r(p) = sum_l a[r][l] p^l``.  Those coefficient rows,
computed exactly in integer arithmetic, drive the triangular transforms
between cumulants and power sums of the success probabilities.  The rest
of the module is the classical toolkit: the moment<->cumulant recursion,
power sums, elementary symmetric functions, Newton's identities, and the
finite-difference coefficients that expand a payoff in binomial-coefficient
basis functions.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

#: default cap on the number of prescribed cumulants; the coefficient
#: table's diagonal grows like (r-1)!, which degrades conditioning of the
#: triangular transforms well before r reaches desk-scale limits.
DEFAULT_MAX_ORDER = 8

__all__ = [
    "DEFAULT_MAX_ORDER",
    "CumulantCoeffTable",
    "CumulantSpec",
    "Payoff",
    "bernoulli_cumulant_coeffs",
    "bernoulli_cumulants",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "power_sums",
    "elementary_symmetric",
    "newton_E_from_S",
    "cumulants_to_power_sums",
    "power_sums_to_cumulants",
    "payoff_newton_coeffs",
    "expectation_via_elementary",
]


class CumulantCoeffTable:
    """Integer rows a[r][l], 1 <= l <= r, with kappa_r(Bernoulli(p)) = sum_l a[r][l] p^l.

    Rows are exact Python integers; ``as_matrix`` emits them as floats.
    The diagonal is a[r][r] = (-1)^(r-1) (r-1)!.
    """

    def __init__(self, rows):
        self._rows = tuple(tuple(int(c) for c in row) for row in rows)
        for r, row in enumerate(self._rows, start=1):
            if len(row) != r:
                raise DomainError("coefficient row lengths must be 1, 2, 3, ...")

    @property
    def r_max(self) -> int:
        return len(self._rows)

    @property
    def rows(self):
        return self._rows

    def row(self, r: int):
        """Row for kappa_r as (a[r][1], .., a[r][r])."""
        if not 1 <= r <= self.r_max:
            raise DomainError(f"row {r} outside table range 1..{self.r_max}")
        return self._rows[r - 1]

    def coeff(self, r: int, l: int) -> int:
        row = self.row(r)
        if not 1 <= l <= r:
            raise DomainError("coefficient index l must satisfy 1 <= l <= r")
        return row[l - 1]

    def as_matrix(self, r: int | None = None) -> np.ndarray:
        """Lower-triangular float matrix A with A[i-1, l-1] = a[i][l]."""
        r = self.r_max if r is None else r
        if r > self.r_max:
            raise DomainError("matrix order exceeds table range")
        A = np.zeros((r, r))
        for i in range(1, r + 1):
            A[i - 1, : i] = self._rows[i - 1]
        return A


@functools.lru_cache(maxsize=None)
def _coeff_rows(r_max: int):
    # kappa_{r+1}(p) = p * (1 - sum_{l=0}^{r-1} C(r,l) kappa_{l+1}(p)),
    # an integer polynomial recursion; polys[r] holds kappa_{r+1} as a
    # coefficient list in powers of p.
    polys: list[list[int]] = []
    for r in range(r_max):
        acc = [0] * (r + 1)
        for l in range(r):
            c = math.comb(r, l)
            for j, a in enumerate(polys[l]):
                acc[j] += c * a
        new = [0] * (r + 2)
        new[1] = 1
        for j, a in enumerate(acc):
            new[j + 1] -= a
        polys.append(new)
    return tuple(tuple(poly[1:]) for poly in polys)


def bernoulli_cumulant_coeffs(r_max: int) -> CumulantCoeffTable:
    """Coefficient table rows 1..r_max, computed in exact integer arithmetic."""
    if r_max < 0:
        raise DomainError("table order must be nonnegative")
    return CumulantCoeffTable(_coeff_rows(r_max))


def coeff_rows_via_derivative(r_max: int):
    """Same rows from the recursion kappa_{r+1}(p) = p(1-p) d/dp kappa_r(p).

    Exact integer arithmetic; used as an independent cross-check of
    :func:`bernoulli_cumulant_coeffs`.
    """
    rows = []
    poly = [0, 1]
    rows.append(tuple(poly[1:]))
    for _ in range(1, max(r_max, 0)):
        deriv = [(j + 1) * c for j, c in enumerate(poly[1:])]
        new = [0] * (len(poly) + 1)
        for j, c in enumerate(deriv):
            new[j + 1] += c
            new[j + 2] -= c
        poly = new
        rows.append(tuple(poly[1:]))
    return tuple(rows[:r_max])


def bernoulli_cumulants(p: float, r: int) -> np.ndarray:
    """(kappa_1, .., kappa_r) of a single Bernoulli(p) trial."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Bernoulli parameter {p} outside [0,1]")
    table = bernoulli_cumulant_coeffs(r)
    out = np.empty(r)
    for i in range(1, r + 1):
        row = table.row(i)
        acc = 0.0
        for c in reversed(row):
            acc = acc * p + c
        out[i - 1] = acc * p
    return out


def moments_from_cumulants(kappa) -> np.ndarray:
    """Raw moments (mu_1, .., mu_r) from cumulants, by the triangular recursion
    mu_{r+1} = sum_l C(r,l) mu_{r-l} kappa_{l+1} with mu_0 = 1.

    The triangle is evaluated in exact rational arithmetic and rounded once
    on output: the terms cancel heavily for oscillating inputs, and at the
    low orders used here exactness is cheaper than error analysis."""
    kappa = np.asarray(kappa, dtype=float)
    kf = [Fraction(float(x)) for x in kappa.tolist()]
    mu = [Fraction(1)]
    for i in range(kappa.size):
        mu.append(sum((math.comb(i, l) * mu[i - l] * kf[l] for l in range(i + 1)),
                      start=Fraction(0)))
    return np.array([float(v) for v in mu[1:]])


def cumulants_from_moments(mu) -> np.ndarray:
    """Inverse of :func:`moments_from_cumulants` (same triangle, solved
    exactly; single rounding on output)."""
    mu = np.asarray(mu, dtype=float)
    muf = [Fraction(1)] + [Fraction(float(x)) for x in mu.tolist()]
    kappa: list[Fraction] = []
    for i in range(mu.size):
        s = muf[i + 1] - sum((math.comb(i, l) * muf[i - l] * kappa[l] for l in range(i)),
                             start=Fraction(0))
        kappa.append(s)
    return np.array([float(v) for v in kappa])


def power_sums(x, r: int) -> np.ndarray:
    """(S_1(x), .., S_r(x)) with S_l = sum_i x_i^l; empty x gives zeros."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if r < 0:
        raise DomainError("power-sum order must be nonnegative")
    out = np.zeros(r)
    t = np.ones_like(x)
    for l in range(r):
        t = t * x
        out[l] = t.sum()
    return out


def elementary_symmetric(x) -> np.ndarray:
    """(E_0, .., E_n)(x) by the stable one-row recurrence E_k += x_i E_{k-1}."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.size
    E = np.zeros(n + 1)
    E[0] = 1.0
    for i, xi in enumerate(x):
        hi = i + 2
        E[1:hi] = E[1:hi] + xi * E[0 : hi - 1]
    return E


def newton_E_from_S(s, n: int) -> np.ndarray:
    """(E_1, .., E_n) from power sums via Newton's identities:
    E_r = (1/r) sum_{l=1}^{r} (-1)^(l-1) S_l E_{r-l}."""
    s = np.asarray(s, dtype=float)
    if s.size < n:
        raise DomainError(f"need {n} power sums, got {s.size}")
    E = np.empty(n + 1)
    E[0] = 1.0
    for r in range(1, n + 1):
        acc = 0.0
        sign = 1.0
        for l in range(1, r + 1):
            acc += sign * s[l - 1] * E[r - l]
            sign = -sign
        E[r] = acc / r
    return E[1:]


def cumulants_to_power_sums(c) -> np.ndarray:
    """Solve the triangular system sum_l a[r][l] s_l = c_r for s."""
    c = np.asarray(c, dtype=float)
    r = c.size
    table = bernoulli_cumulant_coeffs(r)
    s = np.empty(r)
    for i in range(1, r + 1):
        row = table.row(i)
        acc = c[i - 1]
        for l in range(1, i):
            acc -= row[l - 1] * s[l - 1]
        s[i - 1] = acc / row[i - 1]
    return s


def power_sums_to_cumulants(s) -> np.ndarray:
    """kappa_r = sum_l a[r][l] s_l: cumulants of the convolution whose
    success probabilities have power sums s."""
    s = np.asarray(s, dtype=float)
    r = s.size
    table = bernoulli_cumulant_coeffs(r)
    c = np.empty(r)
    for i in range(1, r + 1):
        row = table.row(i)
        c[i - 1] = float(np.dot(np.asarray(row, dtype=float), s[:i]))
    return c


@dataclass(frozen=True)
class CumulantSpec:
    """Constraint data: the first r cumulants (or raw moments) to prescribe."""

    r: int
    c: tuple[float, ...]
    basis: str = "cumulant"

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        if self.r < 0:
            raise DomainError("constraint order r must be nonnegative")
        if len(self.c) != self.r:
            raise DomainError(f"expected {self.r} constraint values, got {len(self.c)}")
        if self.basis not in ("cumulant", "moment"):
            raise DomainError("basis must be 'cumulant' or 'moment'")

    def cumulant_values(self) -> np.ndarray:
        c = np.asarray(self.c, dtype=float)
        return cumulants_from_moments(c) if self.basis == "moment" else c

    def power_sum_targets(self) -> np.ndarray:
        return cumulants_to_power_sums(self.cumulant_values())


def payoff_newton_coeffs(g) -> np.ndarray:
    """Coefficients b with g(x) = sum_k b_k C(x,k) on {0,..,n}: b_k is the
    k-th forward difference of g at 0.  Exact for integer-valued g."""
    g = np.asarray(g, dtype=float)
    b = np.empty(g.size)
    d = g.copy()
    b[0] = d[0]
    for k in range(1, g.size):
        d = np.diff(d)
        b[k] = d[0]
    return b


class Payoff:
    """Payoff table g over {0,..,n}, with its binomial-basis coefficients."""

    __slots__ = ("table", "_coeffs")

    def __init__(self, table):
        self.table = np.asarray(table, dtype=float).reshape(-1)
        if self.table.size == 0:
            raise DomainError("payoff table must be nonempty")
        self._coeffs = None

    @property
    def n(self) -> int:
        return self.table.size - 1

    @property
    def newton_coeffs(self) -> np.ndarray:
        """Coefficients in the binomial-coefficient basis, computed on first use."""
        if self._coeffs is None:
            self._coeffs = payoff_newton_coeffs(self.table)
        return self._coeffs

    def __len__(self) -> int:
        return self.table.size

    def __repr__(self) -> str:
        return f"Payoff({self.table.tolist()!r})"


def expectation_via_elementary(p, b) -> float:
    """sum_k b_k E_k(p) — the expectation of the payoff with binomial-basis
    coefficients b under the Bernoulli convolution of p, computed without
    forming the pmf."""
    p = np.asarray(p, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float)
    if b.size != p.size + 1:
        raise DomainError(f"need {p.size + 1} coefficients, got {b.size}")
    return float(np.dot(b, elementary_symmetric(p)))
