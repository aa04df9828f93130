"""Single-excitation Lindblad dynamics of engineered XX spin networks."""

from .engine import (
    Decoherence,
    Generator,
    LindbladModel,
    Propagator,
    SubspaceState,
    build_generator,
    devectorize,
    encode_input,
    evolve,
    propagator,
    vectorize,
)
from .metrics import (
    CriticalPoint,
    FidelityReadout,
    average_fidelity,
    concurrence,
    critical_gamma,
    find_peak,
    fwhm,
    reduced_1q,
    reduced_2q,
    transfer_fidelity,
)
from .networks import (
    SpinNetwork,
    attach_noninteracting,
    christandl_chain,
    hamiltonian,
    multiarm_network,
    shi_chain,
)

__version__ = "0.1.0"
