"""Cooperative (CQI) and cascaded (CAS) quantum-interface models.

Closed-form scattering responses, a Lindblad steady-state engine for thermal
noise, exact entanglement bookkeeping for two-node links and GHZ chains, and
parameter sweeps comparing both interface designs.
"""

from .core import (
    PAPER_DEFAULTS,
    DeviceParams,
    ScatterResponse,
    SingularInputError,
    cas_response,
    conversion_efficiency,
    converter_transmission,
    cooperativities,
    cqi_response,
    cqi_response_resonant,
    efficiency_bound,
    matched_coupling,
    noise_transfer_cqi,
    qubit_cavity_response,
    supermode_splitting,
)
from .lindblad import (
    DensityMatrix,
    DriveSpec,
    FockConfig,
    SteadyStateError,
    WeakDriveError,
    build_liouvillian,
    scatter_response,
    solve_response,
    steady_state,
    thermal_leak_flux,
    truncation_check,
)
from .protocol import (
    LinkResult,
    ModelValidityError,
    NetworkResult,
    NodeResponse,
    ghz_chain,
    ghz_chain_dense,
    identical_links,
    link_closed_form,
    link_entangle,
    zeta,
)
from .sweeps import (
    ProtocolSettings,
    SweepRow,
    SweepSpec,
    optimize_detuning,
    run_sweep,
    scaling_sweep,
    sweep_kappa_b,
    sweep_nth,
)

__version__ = "0.1.0"
