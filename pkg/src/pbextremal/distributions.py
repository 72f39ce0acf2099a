"""Exact pmfs of Bernoulli laws, binomials, and their convolutions on {0,..,n}.

A Bernoulli convolution (Poisson binomial law) is the distribution of the
number of successes in independent trials with success probabilities
``p_1..p_n``.  All constructions here are exact O(n^2) convolution
arithmetic; no normal or Poisson approximations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernels import convolve_bernoulli
from .errors import DomainError, NumericalQualityWarning

#: weights this far below zero are treated as rounding noise and clamped
WEIGHT_FLOOR = -1e-15
#: a produced pmf must sum to 1 within this
NORMALIZATION_TOL = 1e-12
#: mass defects beyond this trigger renormalisation plus a warning
RENORM_DEFECT_TOL = 1e-13

__all__ = [
    "Pmf",
    "ExtremalCandidate",
    "as_param_vector",
    "bernoulli_pmf",
    "bc_pmf",
    "binomial_pmf",
    "candidate_pmf",
    "expectation",
]


@dataclass(frozen=True)
class Pmf:
    """Probability vector over {0,..,n}.  Treat ``weights`` as read-only."""

    weights: np.ndarray
    n: int

    @classmethod
    def from_weights(cls, weights) -> "Pmf":
        """Validate, clamp rounding noise, renormalise if the defect is real."""
        w = np.asarray(weights, dtype=float).copy()
        if w.ndim != 1 or w.size == 0:
            raise DomainError("pmf weights must be a nonempty 1-d vector")
        if w.min() < WEIGHT_FLOOR:
            raise DomainError(f"pmf weight {w.min()} below tolerated floor {WEIGHT_FLOOR}")
        np.clip(w, 0.0, None, out=w)
        total = w.sum()
        defect = abs(total - 1.0)
        if defect > RENORM_DEFECT_TOL:
            warnings.warn(
                f"pmf mass defect {defect:.3e}; renormalising",
                NumericalQualityWarning,
                stacklevel=2,
            )
            w /= total
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise DomainError("pmf weights do not sum to 1")
        w.flags.writeable = False
        return cls(weights=w, n=w.size - 1)

    def mean(self) -> float:
        return float(np.dot(self.weights, np.arange(self.n + 1)))

    def variance(self) -> float:
        x = np.arange(self.n + 1)
        m = self.mean()
        return float(np.dot(self.weights, (x - m) ** 2))

    def raw_moments(self, r: int) -> np.ndarray:
        """(E X, E X^2, .., E X^r)."""
        x = np.arange(self.n + 1, dtype=float)
        out = np.empty(r)
        t = np.ones_like(x)
        for l in range(r):
            t = t * x
            out[l] = np.dot(self.weights, t)
        return out


def as_param_vector(p) -> np.ndarray:
    """Coerce to a float vector of success probabilities, all in [0,1]."""
    v = np.asarray(p, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    if v.size and (v.min() < 0.0 or v.max() > 1.0):
        raise DomainError("success probabilities must lie in [0,1]")
    return v


@dataclass(frozen=True)
class ExtremalCandidate:
    """A shifted convolution of binomials: delta_{n0} * B_{n_1,q_1} * ... .

    ``n0`` counts parameters pinned at 1 (a deterministic shift), ``zeros``
    counts parameters pinned at 0, and each block ``(size, q)`` is a
    binomial factor with q strictly inside (0,1).  Blocks are kept sorted
    by (size, q) so equality and ordering are canonical.
    """

    n0: int
    zeros: int
    blocks: tuple[tuple[int, float], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted((int(m), float(q)) for m, q in self.blocks)))
        if self.n0 < 0 or self.zeros < 0:
            raise DomainError("candidate counts must be nonnegative")
        for m, q in self.blocks:
            if m < 1:
                raise DomainError("binomial block size must be a positive integer")
            if not 0.0 < q < 1.0:
                raise DomainError("binomial block probability must lie strictly in (0,1)")

    @property
    def interior_count(self) -> int:
        """Number of distinct interior success probabilities."""
        return len(self.blocks)

    def size(self) -> int:
        return self.n0 + self.zeros + sum(m for m, _ in self.blocks)

    def param_vector(self) -> np.ndarray:
        """Expand to the success-probability vector it abbreviates."""
        parts = [np.ones(self.n0), np.zeros(self.zeros)]
        parts.extend(np.full(m, q) for m, q in self.blocks)
        return np.concatenate(parts) if parts else np.empty(0)

    def sort_key(self):
        """Deterministic tie-break order: fewer blocks, then lexicographic."""
        return (len(self.blocks), self.n0, self.zeros, self.blocks)


def bernoulli_pmf(p: float) -> Pmf:
    """Pmf [1-p, p] of a single Bernoulli(p) trial."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"Bernoulli parameter {p} outside [0,1]")
    return Pmf.from_weights(np.array([1.0 - p, p]))


def bc_pmf(p) -> Pmf:
    """Pmf of the convolution of Bernoulli(p_i) over all entries of p.

    The parameter vector is sorted first, so permutations of p produce
    bit-identical weights.  An empty vector gives the point mass at 0.
    """
    v = np.sort(as_param_vector(p))
    return Pmf.from_weights(convolve_bernoulli(v))


def binomial_pmf(n: int, p: float) -> Pmf:
    """Binomial(n, p) pmf via the mode-anchored ratio recurrence.

    Independent of the convolution route but agrees with
    ``bc_pmf([p]*n)`` to within accumulated rounding (~1e-15 per weight
    at desk scale).
    """
    if n < 0:
        raise DomainError("binomial size must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binomial parameter {p} outside [0,1]")
    if n == 0:
        return Pmf.from_weights(np.array([1.0]))
    w = np.zeros(n + 1)
    if p == 0.0:
        w[0] = 1.0
        return Pmf.from_weights(w)
    if p == 1.0:
        w[n] = 1.0
        return Pmf.from_weights(w)
    mode = min(n, max(0, int((n + 1) * p)))
    w[mode] = 1.0
    for k in range(mode, n):
        w[k + 1] = w[k] * ((n - k) * p) / ((k + 1) * (1.0 - p))
    for k in range(mode, 0, -1):
        w[k - 1] = w[k] * (k * (1.0 - p)) / ((n - k + 1) * p)
    w /= w.sum()
    return Pmf.from_weights(w)


def candidate_pmf(cand: ExtremalCandidate, n: int) -> Pmf:
    """Pmf of a shifted binomial convolution, embedded in support {0,..,n}."""
    if cand.size() != n:
        raise DomainError(f"candidate accounts for {cand.size()} of {n} parameters")
    return bc_pmf(cand.param_vector())


def expectation(pmf: Pmf, g) -> float:
    """sum_x weights[x] * g(x); g is a Payoff or a table over {0,..,n}."""
    table = np.asarray(getattr(g, "table", g), dtype=float)
    if table.shape != pmf.weights.shape:
        raise DomainError(
            f"payoff length {table.size} does not match pmf support {pmf.weights.size}"
        )
    return float(np.dot(pmf.weights, table))
