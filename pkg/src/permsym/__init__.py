"""permsym: permutation-invariant operator algebra and the symmetric seesaw.

Operators on n-fold tensor powers that commute with permuting the copies are
parametrized by polynomially many orbit coefficients; this package provides
the coefficient algebra (traces, transposes, partial traces, channel
compositions), the symmetric-group block diagonalization that turns
positivity constraints into small dense blocks, the classical-quantum
extension for flagged channels, and an alternating encoder/decoder
optimization yielding lower bounds on the n-copy channel fidelity.
"""

__version__ = "0.1.0"

from .algebras import (
    AlgebraChangeOfBasis,
    AlgebraSpec,
    algebra_link,
    algebra_marginal_data,
    algebra_orbits,
    kappa_block_decomposition,
    flag_profiles,
    glue_orbit,
    split_orbit,
)
from .blockmap import (
    BlockRep,
    ChangeOfBasis,
    gram,
    load_change_of_basis,
    save_change_of_basis,
)
from .blockops import (
    BlockPartialTranspose,
    block_hs,
    block_partial_transpose,
    block_trace,
    check_cpu,
    check_cptp,
    enforce_cpu,
    enforce_cptp,
)
from .channels import (
    ChoiMatrix,
    adc,
    choi_from_json,
    choi_to_json,
    depolarizing,
    entanglement_fidelity,
    flagged,
    identity_channel,
    reference_curves,
    replacement,
)
from .errors import BasisMismatchError, CapacityError, GaugeError, SingularGramError
from .linkprod import (
    RefCoefficients,
    TripartiteTable,
    apply_channel_to_state,
    build_tripartite,
    compose_after_encoder,
    compose_before_decoder,
    compose_covariant,
    contract_refs,
    ref_adjoint,
    ref_hs_inner,
)
from .orbits import (
    CountMatrix,
    MarginalData,
    OrbitBasis,
    OrbitCoefficients,
    SystemSpec,
    count_of_pair,
    enumerate_orbits,
    hs_inner,
    identity_coefficients,
    marginal_data,
    orbit_size,
    partial_trace_coeffs,
    partial_transpose_coeffs,
    representative,
    tensor_coefficients,
    trace_coeffs,
    transpose_coeffs,
)
from .seesaw import (
    SeesawConfig,
    SeesawEngine,
    SeesawResult,
    SymmetricSeesaw,
    best_over_n,
    power_fd,
    power_fe,
    random_symmetric_seed,
    seesaw_flagged,
    seesaw_run,
    sweep,
)
from .tableaux import (
    partitions,
    ssyt_count,
    ssyt_enumerate,
    syt_count,
)
