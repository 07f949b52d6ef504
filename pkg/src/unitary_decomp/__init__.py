"""Non-unitary operators as sums of four unitaries, simulated on a statevector core."""

from .channels import (
    GADParams,
    KrausChannel,
    cptp_check,
    ensemble_decompose,
    gad_kraus,
    kraus_evolve_oracle,
    lambda_from_beta,
)
from .decomposition import (
    UnitaryBlockSet,
    assemble_full_U,
    build_block_set,
    effective_operator,
    pair_enumeration,
    richardson_extrapolate,
    richardson_step,
    rotation_R,
)
from .experiment import (
    ExperimentConfig,
    PopulationTrace,
    compare_to_oracle,
    estimate_kraus_diag,
    reconstruct_diagonal,
    run_trace,
    seed_derivation,
)
from .linalg import eig_hermitian, hermitian_split, structure_checks, unitary_exp
from .simulator import Circuit, apply_multiplexed, prepare_state, run_exact, sample_counts

__version__ = "0.1.0"
