"""dfs-scout: locating decoherence-free subspaces without full process tomography.

A simulation library and batch harness for the reversed-trial protocol: send
the informationally complete input set through a channel, project onto one
random output state, reconstruct the adjoint image, and read the
decoherence-free structure off its eigenvectors.
"""

from .analytics import (
    confidence_band,
    failure_probability,
    fidelity_pdf_exact,
    fidelity_pdf_paper,
    two_peak_summary,
)
from .channels import (
    BlockSpec,
    DressedChannelSpec,
    KrausChannel,
    adjoint,
    apply,
    block_dephasing,
    dressed,
    singlet_state,
    sswap,
    triplet_basis,
    unitary_channel,
)
from .protocol import (
    ProtocolConfig,
    ProtocolResult,
    SyndromeFlags,
    detect_syndromes,
    discover_subspaces,
    identify_1d_dfs,
    identify_without_averaging,
    verify_average_purity,
    verify_unitarity,
)
from .qmath import (
    DensityMatrix,
    EigenSystem,
    Ket,
    Subspace,
    eigh,
    fidelity,
    gram_schmidt_residual,
    haar_state,
    haar_unitary,
    purity,
    random_separable_pair,
    state_average,
    subspace_fidelity,
)
from .tomography import (
    InputStateSet,
    SettingsCounter,
    TomographyTrial,
    forward_probabilities,
    input_states,
    linear_invert,
    mle_fit,
    run_reversed_trial,
    simulate_counts,
)

__version__ = "0.1.0"
