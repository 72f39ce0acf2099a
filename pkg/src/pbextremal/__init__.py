"""Sharp extreme expectations of Bernoulli convolutions (Poisson binomial
laws) whose first few cumulants or moments are prescribed.

The structured solver reduces the search to shifted convolutions of at most
r binomial laws; a brute-force oracle cross-checks it at small n; a wrapper
handles symmetric multiaffine optimisation on boxes under power-sum
constraints.
"""

from ._backend import BACKEND, USING_NUMBA
from .distributions import (
    ExtremalCandidate,
    Pmf,
    as_param_vector,
    bc_pmf,
    bernoulli_pmf,
    binomial_pmf,
    candidate_pmf,
    expectation,
)
from .errors import DomainError, Infeasible, NumericalQualityWarning, PbExtremalError
from .moments import (
    DEFAULT_MAX_ORDER,
    CumulantCoeffTable,
    CumulantSpec,
    Payoff,
    bernoulli_cumulant_coeffs,
    bernoulli_cumulants,
    cumulants_from_moments,
    cumulants_to_power_sums,
    elementary_symmetric,
    expectation_via_elementary,
    moments_from_cumulants,
    newton_E_from_S,
    payoff_newton_coeffs,
    power_sums,
    power_sums_to_cumulants,
)
from .oracle import OracleConfig, OracleResult, oracle_optimize, project_to_constraints
from .solver import (
    BoxCandidate,
    BoxRequest,
    BoxResult,
    SolveRequest,
    SolveResult,
    enumerate_structures,
    solve_block_system,
    solve_box,
    solve_extremal,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "USING_NUMBA",
    "__version__",
    "Pmf",
    "ExtremalCandidate",
    "as_param_vector",
    "bernoulli_pmf",
    "bc_pmf",
    "binomial_pmf",
    "candidate_pmf",
    "expectation",
    "DomainError",
    "Infeasible",
    "NumericalQualityWarning",
    "PbExtremalError",
    "DEFAULT_MAX_ORDER",
    "CumulantCoeffTable",
    "CumulantSpec",
    "Payoff",
    "bernoulli_cumulant_coeffs",
    "bernoulli_cumulants",
    "cumulants_from_moments",
    "cumulants_to_power_sums",
    "elementary_symmetric",
    "expectation_via_elementary",
    "moments_from_cumulants",
    "newton_E_from_S",
    "payoff_newton_coeffs",
    "power_sums",
    "power_sums_to_cumulants",
    "OracleConfig",
    "OracleResult",
    "oracle_optimize",
    "project_to_constraints",
    "BoxCandidate",
    "BoxRequest",
    "BoxResult",
    "SolveRequest",
    "SolveResult",
    "enumerate_structures",
    "solve_block_system",
    "solve_box",
    "solve_extremal",
]
