"""Extremal expectations over Bernoulli convolutions with prescribed cumulants.

The search space is the family of shifted binomial convolutions: among all
success-probability vectors matching the first r cumulants, an extreme
expectation is attained at one with at most r distinct values strictly
inside (0,1).  The solver therefore enumerates the finitely many
structures (shift count, zero count, interior block multiplicities),
solves each block's power-sum system for the interior probabilities, and
takes the best feasible candidate.

Constraints are converted once, up front, to power sums of the success
probabilities; that is the basis in which the block systems are
polynomial and triangularly related to cumulants.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import newton_block_scan
from .distributions import ExtremalCandidate, candidate_pmf, expectation
from .errors import DomainError, Infeasible
from .moments import DEFAULT_MAX_ORDER, CumulantSpec, Payoff, cumulants_to_power_sums

#: values within this of the incumbent are ties, broken structurally
VALUE_TIE_TOL = 1e-12

#: cap on multistart grid size so high-dimensional blocks stay tractable
_GRID_BUDGET = 20000

THREADS_ENV_VAR = "PB_EXTREMAL_THREADS"

__all__ = [
    "SolveRequest",
    "SolveResult",
    "BoxRequest",
    "BoxCandidate",
    "BoxResult",
    "enumerate_structures",
    "solve_block_system",
    "solve_extremal",
    "solve_box",
]


@dataclass(frozen=True)
class SolveRequest:
    """One extremal problem: payoff g on {0,..,n}, constraint spec, direction."""

    n: int
    g: Payoff
    spec: CumulantSpec
    direction: str = "max"
    residual_tol: float = 1e-10
    dedup_tol: float = 1e-8
    boundary_tol: float = 1e-12
    max_r: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be a positive integer")
        if self.direction not in ("max", "min"):
            raise DomainError("direction must be 'max' or 'min'")
        g = self.g if isinstance(self.g, Payoff) else Payoff(self.g)
        object.__setattr__(self, "g", g)
        if len(g) != self.n + 1:
            raise DomainError(f"payoff must have length {self.n + 1}, got {len(g)}")
        if self.spec.r > self.max_r:
            raise DomainError(
                f"constraint order {self.spec.r} exceeds the configured cap {self.max_r}"
            )
        for tol in (self.residual_tol, self.dedup_tol, self.boundary_tol):
            if tol <= 0:
                raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class SolveResult:
    value: float
    candidate: ExtremalCandidate
    residuals: np.ndarray
    n_candidates_examined: int
    structures_examined: int
    roots_found: int
    all_optima: tuple[ExtremalCandidate, ...] = field(default=())


@dataclass(frozen=True)
class BoxRequest:
    """Extremal problem for a symmetric multiaffine function on a box [a,b]^n.

    The function is encoded by its vertex payoff table g: g[m] is the value
    at any point with m coordinates equal to b and the rest equal to a.
    ``s_targets`` prescribes the power sums of the coordinates.
    """

    n: int
    a: float
    b: float
    g: Payoff
    s_targets: tuple[float, ...]
    direction: str = "max"
    residual_tol: float = 1e-10
    dedup_tol: float = 1e-8
    boundary_tol: float = 1e-12
    max_r: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be a positive integer")
        if self.a > self.b:
            raise DomainError("box endpoints must satisfy a <= b")
        if self.direction not in ("max", "min"):
            raise DomainError("direction must be 'max' or 'min'")
        g = self.g if isinstance(self.g, Payoff) else Payoff(self.g)
        object.__setattr__(self, "g", g)
        if len(g) != self.n + 1:
            raise DomainError(f"payoff must have length {self.n + 1}, got {len(g)}")
        object.__setattr__(self, "s_targets", tuple(float(v) for v in self.s_targets))
        if len(self.s_targets) > self.max_r:
            raise DomainError(
                f"constraint order {len(self.s_targets)} exceeds the configured cap {self.max_r}"
            )


@dataclass(frozen=True)
class BoxCandidate:
    """Coordinate profile on [a,b]: counts at the endpoints plus interior blocks."""

    at_a: int
    at_b: int
    blocks: tuple[tuple[int, float], ...] = field(default=())


@dataclass(frozen=True)
class BoxResult:
    value: float
    candidate: BoxCandidate
    residuals: np.ndarray
    unit_result: SolveResult | None = None


def enumerate_structures(n: int, r: int):
    """Yield every (n0, zeros, multiplicities) with at most min(r, n) blocks.

    Multiplicities are non-increasing positive integers (permutations of
    blocks are redundant) and n0 + zeros + sum(multiplicities) = n.  The
    order is deterministic: by block count, then interior mass, then
    partition (lexicographically decreasing), then n0.
    """
    if n < 0 or r < 0:
        raise DomainError("n and r must be nonnegative")
    for k in range(min(r, n) + 1):
        for total in range(k, n + 1):
            for mult in _partitions(total, k):
                for n0 in range(n - total + 1):
                    yield n0, n - total - n0, mult


def _partitions(total, k, cap=None):
    """Non-increasing tuples of k positive integers summing to total."""
    if k == 0:
        if total == 0:
            yield ()
        return
    if cap is None:
        cap = total
    for first in range(min(cap, total - k + 1), 0, -1):
        for rest in _partitions(total - first, k - 1, first):
            yield (first, *rest)


def _grid_points(k: int, requested: int) -> int:
    """Multistart grid density per dimension, capped by a total-start budget."""
    if k <= 1:
        return requested
    budget = max(3, int(_GRID_BUDGET ** (1.0 / k)))
    return max(2, min(requested, budget))


def _square_roots(mults, d, *, grid_points=12, target_tol=1e-13, accept_tol=1e-10,
                  max_iter=200, max_halvings=40):
    """All solutions found for the square system sum_j mults[j] q_j^l = d[l], l=1..k.

    Closed forms for one block and for two equal blocks; damped multistart
    Newton otherwise.  Roots are canonicalised (ascending within runs of
    equal multiplicities), lex-sorted, and deduplicated exactly; range
    filtering is left to the caller.
    """
    k = len(mults)
    if k == 0:
        return [np.empty(0)]
    if k == 1:
        return [np.array([d[0] / mults[0]])]
    if k == 2 and mults[0] == mults[1]:
        m = float(mults[0])
        e1 = d[0] / m
        ps2 = d[1] / m
        disc = 2.0 * ps2 - e1 * e1
        if disc < 0.0:
            return []
        root = math.sqrt(disc)
        return [np.array([(e1 - root) / 2.0, (e1 + root) / 2.0])]
    mults_f = np.asarray(mults, dtype=float)
    d_f = np.asarray(d, dtype=float)
    m_grid = _grid_points(k, grid_points)
    raw, found = newton_block_scan(
        mults_f, d_f, m_grid, target_tol, accept_tol, max_iter, max_halvings
    )
    roots = []
    for i in range(found):
        q = raw[i].copy()
        # q-values attached to equal multiplicities are interchangeable
        j = 0
        while j < k:
            j2 = j
            while j2 + 1 < k and mults[j2 + 1] == mults[j]:
                j2 += 1
            q[j : j2 + 1] = np.sort(q[j : j2 + 1])
            j = j2 + 1
        roots.append(q)
    roots.sort(key=tuple)
    return roots


def _dedup_roots(roots, tol):
    out = []
    for q in roots:
        if out and np.max(np.abs(q - out[-1])) <= tol:
            continue
        out.append(q)
    return out


def solve_block_system(multiplicities, s_target, n0, *, residual_tol=1e-10,
                       dedup_tol=1e-8, boundary_tol=1e-12, grid_points=12,
                       max_iter=200, max_halvings=40):
    """Interior solutions q of sum_j multiplicities[j] q_j^l = s_target[l] - n0.

    The square subsystem of the first k equations is solved (closed form or
    multistart Newton); solutions are kept only when every component lies in
    (boundary_tol, 1 - boundary_tol), components are pairwise separated by
    more than dedup_tol, and the remaining equations hold within
    residual_tol.  No admissible solution returns an empty list.
    """
    mults = [int(m) for m in multiplicities]
    if any(m < 1 for m in mults):
        raise DomainError("block multiplicities must be positive integers")
    s = np.asarray(s_target, dtype=float).reshape(-1)
    k = len(mults)
    if k > s.size:
        raise DomainError("more blocks than constraint equations")
    d = s - float(n0)
    accepted = []
    for q in _square_roots(
        mults, d[:k], grid_points=grid_points,
        target_tol=min(1e-13, 0.01 * residual_tol), accept_tol=residual_tol,
        max_iter=max_iter, max_halvings=max_halvings,
    ):
        if q.size and (q.min() <= boundary_tol or q.max() >= 1.0 - boundary_tol):
            continue
        if q.size > 1 and np.min(np.diff(np.sort(q))) < dedup_tol:
            continue
        resid = _block_residuals(mults, q, d)
        if np.max(np.abs(resid), initial=0.0) <= residual_tol:
            accepted.append(q)
    return _dedup_roots(accepted, dedup_tol)


def _block_residuals(mults, q, d):
    """Full residual vector sum_j mults[j] q_j^l - d[l] over all equations."""
    r = d.size
    vals = np.zeros(r)
    for m, qj in zip(mults, q):
        t = 1.0
        for l in range(r):
            t *= qj
            vals[l] += m * t
    return vals - d


def _provably_infeasible(s, n, slack):
    """A reason string when no [0,1]^n vector can have power sums s, else None.

    Necessary conditions only: 0 <= S_l <= n, monotonicity S_{l+1} <= S_l,
    and Jensen S_l >= n (S_1/n)^l.
    """
    r = s.size
    for l in range(r):
        if s[l] < -slack or s[l] > n + slack:
            return f"power-sum target S_{l + 1} = {s[l]:.6g} outside [0, {n}]"
    for l in range(1, r):
        if s[l] > s[l - 1] + slack:
            return (
                f"power-sum targets increase: S_{l + 1} = {s[l]:.6g} exceeds "
                f"S_{l} = {s[l - 1]:.6g}"
            )
    if r >= 1 and n > 0:
        mean = min(max(s[0] / n, 0.0), 1.0)
        for l in range(1, r):
            lower = n * mean ** (l + 1)
            if s[l] < lower - slack:
                return (
                    f"power-sum target S_{l + 1} = {s[l]:.6g} below the convexity "
                    f"bound {lower:.6g} forced by S_1"
                )
    return None


class _Entry:
    """One feasible candidate with its value and full residual vector."""

    __slots__ = ("value", "candidate", "residuals")

    def __init__(self, value, candidate, residuals):
        self.value = value
        self.candidate = candidate
        self.residuals = residuals


def _structure_entries(n, g_table, s, n0, zeros, mults, req):
    """Evaluate one structure: solve its block system, snap near-boundary
    roots onto the vertex counts, verify residuals, price the survivors."""
    k = len(mults)
    d = s - float(n0)
    btol = req.boundary_tol
    entries = []
    if k == 0:
        if np.max(np.abs(d), initial=0.0) <= req.residual_tol:
            cand = ExtremalCandidate(n0, zeros, ())
            entries.append(_Entry(
                expectation(candidate_pmf(cand, n), g_table), cand, -d.copy()
            ))
        return entries
    roots = _square_roots(
        mults, d[:k], grid_points=12,
        target_tol=min(1e-13, 0.01 * req.residual_tol), accept_tol=req.residual_tol,
    )
    for q in _dedup_roots(roots, req.dedup_tol):
        new_n0, new_zeros = n0, zeros
        blocks = []
        ok = True
        for m, qj in zip(mults, q):
            if abs(qj) <= btol:
                new_zeros += m
            elif abs(qj - 1.0) <= btol:
                new_n0 += m
            elif btol < qj < 1.0 - btol:
                blocks.append((m, float(qj)))
            else:
                ok = False
                break
        if not ok:
            continue
        qs = sorted(qj for _, qj in blocks)
        if any(b - a < req.dedup_tol for a, b in zip(qs, qs[1:])):
            continue
        resid = _candidate_residuals(new_n0, blocks, s)
        if np.max(np.abs(resid), initial=0.0) > req.residual_tol:
            continue
        cand = ExtremalCandidate(new_n0, new_zeros, tuple(blocks))
        entries.append(_Entry(
            expectation(candidate_pmf(cand, n), g_table), cand, resid
        ))
    return entries


def _candidate_residuals(n0, blocks, s):
    r = s.size
    vals = np.full(r, float(n0))
    for m, qj in blocks:
        t = 1.0
        for l in range(r):
            t *= qj
            vals[l] += m * t
    return vals - s


def _resolve_threads(threads):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None and env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"{THREADS_ENV_VAR}={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _solve_power_sums(n, g, s, direction, req, threads=None):
    """Search all structures against power-sum targets s; deterministic result.

    Parallel fan-out over structures preserves enumeration order before the
    single-threaded selection pass, so the outcome is independent of the
    thread count.
    """
    g_table = g.table if isinstance(g, Payoff) else np.asarray(g, dtype=float)
    structures = list(enumerate_structures(n, s.size))
    n_threads = min(_resolve_threads(threads), len(structures))

    def run(st):
        n0, zeros, mults = st
        return _structure_entries(n, g_table, s, n0, zeros, mults, req)

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            per_structure = list(pool.map(run, structures))
    else:
        per_structure = [run(st) for st in structures]
    entries = [e for lst in per_structure for e in lst]

    if not entries:
        reason = _provably_infeasible(s, n, max(1e-9, req.residual_tol))
        raise Infeasible(
            reason or "no structure admissible",
            provably_empty=reason is not None,
            diagnostics={
                "structures_examined": len(structures),
                "power_sum_targets": [float(v) for v in s],
            },
        )

    sign = 1.0 if direction == "max" else -1.0
    best_signed = max(sign * e.value for e in entries)
    ties = [e for e in entries if sign * e.value >= best_signed - VALUE_TIE_TOL]
    ties.sort(key=lambda e: e.candidate.sort_key())
    winner = ties[0]
    optima = []
    for e in ties:
        if e.candidate not in optima:
            optima.append(e.candidate)
    return SolveResult(
        value=winner.value,
        candidate=winner.candidate,
        residuals=winner.residuals,
        n_candidates_examined=len(entries),
        structures_examined=len(structures),
        roots_found=len(entries),
        all_optima=tuple(optima),
    )


def solve_extremal(req: SolveRequest, threads=None) -> SolveResult:
    """Best expectation of req.g over Bernoulli convolutions meeting req.spec.

    Raises Infeasible when the targets are provably unattainable or when no
    structured candidate meets the residual tolerance.
    """
    s = req.spec.power_sum_targets()
    reason = _provably_infeasible(s, req.n, max(1e-9, req.residual_tol))
    if reason is not None:
        raise Infeasible(reason, provably_empty=True,
                         diagnostics={"power_sum_targets": [float(v) for v in s]})
    return _solve_power_sums(req.n, req.g, s, req.direction, req, threads=threads)


def _unit_power_sum_targets(a, b, c, n):
    """Power sums of p in [0,1]^n from power sums of x = a + (b-a) p.

    Inverts S_l(x) = sum_k C(l,k) a^(l-k) (b-a)^k S_k(p) triangularly,
    with S_0(p) = n.
    """
    c = np.asarray(c, dtype=float)
    r = c.size
    w = b - a
    s_full = np.empty(r + 1)
    s_full[0] = float(n)
    for l in range(1, r + 1):
        acc = c[l - 1]
        for k in range(l):
            acc -= math.comb(l, k) * a ** (l - k) * w**k * s_full[k]
        s_full[l] = acc / w**l
    return s_full[1:]


def solve_box(req: BoxRequest, threads=None) -> BoxResult:
    """Extremal value of a symmetric multiaffine function on [a,b]^n given
    power sums of the coordinates; at most r coordinate values fall outside
    the endpoints at the reported optimum."""
    n, a, b = req.n, req.a, req.b
    c = np.asarray(req.s_targets, dtype=float)
    if a == b:
        resid = np.array([n * a ** (l + 1) for l in range(c.size)]) - c
        if np.max(np.abs(resid), initial=0.0) > req.residual_tol:
            raise Infeasible(
                "degenerate box: targets do not match the single feasible point",
                provably_empty=True,
            )
        return BoxResult(
            value=float(req.g.table[0]),
            candidate=BoxCandidate(at_a=n, at_b=0, blocks=()),
            residuals=-resid,
        )
    s_unit = _unit_power_sum_targets(a, b, c, n)
    inner = SolveRequest(
        n=n, g=req.g, spec=CumulantSpec(r=0, c=(), basis="cumulant"),
        direction=req.direction, residual_tol=req.residual_tol,
        dedup_tol=req.dedup_tol, boundary_tol=req.boundary_tol, max_r=req.max_r,
    )
    reason = _provably_infeasible(s_unit, n, max(1e-9, req.residual_tol))
    if reason is not None:
        raise Infeasible(reason + " (after mapping to the unit box)", provably_empty=True,
                         diagnostics={"unit_power_sum_targets": [float(v) for v in s_unit]})
    unit = _solve_power_sums(n, req.g, s_unit, req.direction, inner, threads=threads)
    cand = unit.candidate
    blocks = tuple((m, a + (b - a) * q) for m, q in cand.blocks)
    box_cand = BoxCandidate(at_a=cand.zeros, at_b=cand.n0, blocks=blocks)
    xs = np.concatenate([
        np.full(box_cand.at_a, float(a)),
        np.full(box_cand.at_b, float(b)),
        *[np.full(m, x) for m, x in blocks],
    ]) if n else np.empty(0)
    r = c.size
    s_of_x = np.zeros(r)
    t = np.ones_like(xs)
    for l in range(r):
        t = t * xs
        s_of_x[l] = t.sum()
    return BoxResult(
        value=unit.value,
        candidate=box_cand,
        residuals=s_of_x - c,
        unit_result=unit,
    )
