"""Diamond-norm approximation by convex minimization over fidelity.

The main entry point is :func:`diamond_norm`, which takes a super-operator in
Stinespring form and returns an estimate within a requested additive accuracy.
"""

from .coords import FeasibleSetSpec, OracleAnswer, ProductSet, decode, encode, membership, shrink
from .matkernel import DomainError, InvalidInputError
from .objective import Objective, PrecisionError, g_exact, g_oracle, sqrt_fidelity
from .solver import (
    BudgetExceededError,
    DiamondResult,
    SolveReport,
    SolverConfig,
    compute_constants,
    diamond_norm,
    minimize,
)
from .superop import (
    NaturalRep,
    StinespringPair,
    natural_from_stinespring,
    stinespring_from_natural,
    stinespring_of_difference,
    tensor_superop,
)
from .verify import BruteForceConfig, bruteforce_diamond, fidelity_seesaw, unitary_diamond

__all__ = [
    "BruteForceConfig",
    "BudgetExceededError",
    "DiamondResult",
    "DomainError",
    "FeasibleSetSpec",
    "InvalidInputError",
    "NaturalRep",
    "Objective",
    "OracleAnswer",
    "PrecisionError",
    "ProductSet",
    "SolveReport",
    "SolverConfig",
    "StinespringPair",
    "bruteforce_diamond",
    "compute_constants",
    "decode",
    "diamond_norm",
    "encode",
    "fidelity_seesaw",
    "g_exact",
    "g_oracle",
    "membership",
    "minimize",
    "natural_from_stinespring",
    "shrink",
    "sqrt_fidelity",
    "stinespring_from_natural",
    "stinespring_of_difference",
    "tensor_superop",
    "unitary_diamond",
]
