"""Statevector simulation and natural-gradient optimizers for variational circuits."""

from .circuits import (
    AnsatzSpec,
    MeasurementBasis,
    ParameterizedCircuit,
    build_ansatz,
    evaluate,
    identity_basis,
    probabilities_under_measurement,
    sample_random_measurement,
)
from .fisher import (
    FisherMatrix,
    ResourceCounter,
    cfim,
    descent_condition,
    fisher_distance,
    gradient_parameter_shift,
    loewner_leq,
    null_space_containment,
    qfim_exact,
    qfim_parameter_shift,
    reduced_qfim,
    trace_objective_search,
)
from .hamiltonians import PauliHamiltonian, PauliString, ProblemInstance, exact_ground, loss, random_instance
from .linalg import eigh, is_psd, pinv_cutoff, rank_tol
from .optimizers import OptimizerConfig, OptimizerTrace, compute_step, run, subset_coverage_probability
from .statevector import Statevector, apply_gate, new_zero_state, probabilities
