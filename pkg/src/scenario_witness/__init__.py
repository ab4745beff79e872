"""Probabilistic entanglement detection with sampled witness programs."""

__version__ = "0.1.0"

from .linalg import (
    contract_product,
    eig_hermitian,
    hermitian_basis,
    kron,
    min_eig,
    partial_trace,
    partial_transpose,
)
from .partitions import (
    Partition,
    PartitionStructure,
    full_separability_structure,
    m_separability_structure,
    parse_structure,
)
from .sdp import AffineBlock, CongruenceBlocks, SdpProblem, SdpSolution, Status, solve
from .states import (
    DensityMatrix,
    RngStream,
    ghz_state,
    horodecki_state,
    random_density_matrix,
    sample_product_vector,
    sample_unit_vector,
    shifts_upb_state,
)
from .validation import (
    ValidationReport,
    Verdict,
    chernoff_sample_count,
    classify,
    empirical_violation,
    ppt_check,
)
from .witness import (
    WitnessResult,
    build_sampled_program,
    find_witness,
    ghz_biseparable_witness,
    theoretical_sample_count,
)
