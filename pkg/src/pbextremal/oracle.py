"""Brute-force cross-check of the structured solver at small n.

Optimises E[g] directly over success-probability vectors in [0,1]^n under
power-sum constraints: many random starts, each projected onto the
constraint set by damped Gauss-Newton, then polished by projected gradient
ascent with constraint restoration after every step.  No structural
knowledge of the extremal family is used, which is the point: agreement
with the solver is evidence, not circularity.

Intended for n up to about 6; cost grows with the multistart dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import oracle_scan, restore_power_sums
from .distributions import as_param_vector
from .errors import DomainError, Infeasible
from .moments import Payoff

#: coordinates this close to 0 or 1 count as boundary, not interior
EDGE_TOL = 1e-6
#: interior coordinates within this gap are clustered as one value
CLUSTER_GAP = 1e-4

__all__ = ["OracleConfig", "OracleResult", "project_to_constraints", "oracle_optimize"]


@dataclass(frozen=True)
class OracleConfig:
    """Multistart and polish parameters.  Identical seed, identical output."""

    n_starts: int = 2000
    seed: int = 0
    projection_tol: float = 1e-10
    projection_iters: int = 80
    ascent_steps: int = 120
    step_init: float = 0.25
    min_step: float = 1e-8

    def __post_init__(self):
        if self.n_starts < 1:
            raise DomainError("n_starts must be positive")
        if self.projection_tol <= 0:
            raise DomainError("projection_tol must be positive")


class OracleResult(NamedTuple):
    value: float
    p: np.ndarray
    interior_profile: tuple[tuple[float, int], ...]


def project_to_constraints(p, s_target, tol: float = 1e-10, max_iter: int = 80):
    """Nearest-effort projection of p onto {S_l(p) = s_target[l]} in [0,1]^n.

    Returns the projected vector (power-sum residuals <= tol), or None when
    the damped Newton restoration stalls or leaves the box: failure is a
    value, not an exception.
    """
    q = as_param_vector(p).copy()
    s = np.asarray(s_target, dtype=float).reshape(-1)
    ok = restore_power_sums(q, s, tol, max_iter)
    return q if ok else None


def interior_profile(p, edge_tol: float = EDGE_TOL, gap: float = CLUSTER_GAP):
    """Cluster the coordinates of p that are not at the box boundary.

    Returns ((value, count), ...) with cluster means as values; consecutive
    sorted coordinates are merged while their gap is at most ``gap``.
    """
    interior = sorted(float(v) for v in np.asarray(p).reshape(-1)
                      if edge_tol < v < 1.0 - edge_tol)
    clusters = []
    for v in interior:
        if clusters and v - clusters[-1][-1] <= gap:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return tuple((sum(c) / len(c), len(c)) for c in clusters)


def oracle_optimize(n, g, s_target, direction: str = "max",
                    cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Best feasible point found by seeded multistart projected search.

    Raises Infeasible when no start projects onto the constraint set.
    Single-threaded per instance so identical configurations reproduce
    bit-for-bit; parallelise across instances, not within.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    g_table = g.table if isinstance(g, Payoff) else np.asarray(g, dtype=float).reshape(-1)
    if g_table.size != n + 1:
        raise DomainError(f"payoff must have length {n + 1}, got {g_table.size}")
    s = np.asarray(s_target, dtype=float).reshape(-1)
    if direction not in ("max", "min"):
        raise DomainError("direction must be 'max' or 'min'")
    sign = 1.0 if direction == "max" else -1.0
    rng = np.random.default_rng(cfg.seed)
    starts = rng.random((cfg.n_starts, n))
    dg = np.diff(g_table)
    found, value, best_p = oracle_scan(
        starts, g_table, dg, s, sign,
        cfg.projection_tol, cfg.projection_iters,
        cfg.ascent_steps, cfg.step_init, cfg.min_step,
    )
    if not found:
        raise Infeasible(
            f"no feasible start found in {cfg.n_starts} projections",
            diagnostics={"n_starts": cfg.n_starts, "seed": cfg.seed},
        )
    return OracleResult(float(value), best_p, interior_profile(best_p))
