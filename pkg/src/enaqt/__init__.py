"""Noise-assisted quantum transport laboratory for disordered 1D chains."""

__version__ = "0.1.0"

from .chain import (  # noqa: F401
    ChainSpec,
    average_ipr,
    build_chain,
    build_hamiltonian,
    eigendecomposition,
    sample_site_energies,
)
from .lindblad import (  # noqa: F401
    Liouvillian,
    NonUniqueSteadyState,
    PropagationError,
    SolverFailure,
    SteadyStateError,
    TransportSpec,
    build_liouvillian,
    build_operator_set,
    population_variance,
    propagate,
    steady_current,
    steady_state,
    wavepacket_variance,
)
from .optimizer import OptimizationResult, find_minimal_variance, find_optimal_dephasing  # noqa: F401
from .redfield import (  # noqa: F401
    BathSpec,
    DrudeLorentzSpectralDensity,
    FlatSpectralDensity,
    build_redfield_liouvillian,
    drude_lorentz,
    eigenoperator_decomposition,
    noise_power,
)
from .sweep import (  # noqa: F401
    FitResult,
    SweepConfig,
    SweepRecord,
    aggregate,
    fit_power_law,
    gradient_only_scan,
    run_sweep,
    transient_experiment,
    uniformisation_comparison,
)
