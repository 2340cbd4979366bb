"""Achievable fidelity, accessible fidelity and quantumness of pure-state ensembles."""

__version__ = "0.1.0"

from .ensembles import Ensemble, density_operator, lifted_trine, platonic, real_symmetric, sic_ensemble, two_state
from .fidelity import (
    Strategy,
    achievable_fidelity,
    average_fidelity,
    lambda_max_bound,
    optimal_resynthesis,
    srm_lower_bound,
    success_probability,
)
from .measurements import InvalidPovmError, Povm, helstrom, srm, validate
from .optimizer import OptimizationReport, OptimizerConfig, accessible_fidelity, quantumness

__all__ = [
    "Ensemble",
    "InvalidPovmError",
    "OptimizationReport",
    "OptimizerConfig",
    "Povm",
    "Strategy",
    "accessible_fidelity",
    "achievable_fidelity",
    "average_fidelity",
    "density_operator",
    "helstrom",
    "lambda_max_bound",
    "lifted_trine",
    "optimal_resynthesis",
    "platonic",
    "quantumness",
    "real_symmetric",
    "sic_ensemble",
    "srm",
    "srm_lower_bound",
    "success_probability",
    "two_state",
    "validate",
]
