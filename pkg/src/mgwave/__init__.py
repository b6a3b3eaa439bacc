"""mgwave: wavepacket propagation on phase-space-adaptive Fourier grids.

Split-operator propagation of the time-dependent Schrödinger equation on a
tensor-product grid whose position and momentum centers move with the
wavepacket.  The reversible update rule keeps the moving-grid algorithm
norm-preserving and time-reversible; symmetric compositions raise the
accuracy to an arbitrary even order.
"""

__version__ = "0.1.0"

from ._config import get_num_threads, set_num_threads
from ._kernels import BACKEND as kernel_backend
from .errors import (
    ConfigError,
    DegenerateStateError,
    IncompatibleGridError,
    InvalidArgumentError,
    MgwaveError,
    ModelDefinitionError,
    ModelDomainError,
    TruncationWarning,
    UnsupportedModelError,
    UnsupportedSchemeError,
)
from .grid import (
    GridSpec,
    MultiIndexSet,
    axis_coordinates,
    make_grid,
    momentum_axes,
    position_axes,
    to_momentum,
    to_position,
)
from .state import MOMENTUM, POSITION, WaveState
from .wavefunction import (
    gaussian_state,
    inner_product,
    expect_energy,
    expect_momentum,
    expect_position,
    load_state,
    physical_norm_factor,
    resample,
    save_state,
)
from .models import (
    HarmonicParams,
    Model,
    TABLE_HARMONIC,
    harmonic_excited,
    harmonic_ground,
    henon_heiles,
    initial_state_for,
    secrest_johnson,
)
from .propagator import (
    CompositionScheme,
    DiagnosticSeries,
    PropagationReport,
    available_schemes,
    compose_scheme,
    naive_step,
    propagate,
    step_T_adaptive,
    step_T_fixed,
    step_V_adaptive,
    step_V_fixed,
    strang_step,
)
from .diagnostics import (
    ConvergenceTable,
    autocorrelation,
    convergence_study,
    reversibility_error,
    spectrum,
    state_distance,
    verlet_threshold,
)

__all__ = [
    "__version__",
    "kernel_backend",
    "get_num_threads",
    "set_num_threads",
    # errors
    "MgwaveError",
    "InvalidArgumentError",
    "IncompatibleGridError",
    "DegenerateStateError",
    "ModelDomainError",
    "ModelDefinitionError",
    "UnsupportedModelError",
    "UnsupportedSchemeError",
    "ConfigError",
    "TruncationWarning",
    # grid & state
    "MultiIndexSet",
    "GridSpec",
    "WaveState",
    "POSITION",
    "MOMENTUM",
    "make_grid",
    "axis_coordinates",
    "position_axes",
    "momentum_axes",
    "to_momentum",
    "to_position",
    # wavefunction
    "gaussian_state",
    "inner_product",
    "expect_position",
    "expect_momentum",
    "expect_energy",
    "resample",
    "physical_norm_factor",
    "save_state",
    "load_state",
    # models
    "Model",
    "HarmonicParams",
    "TABLE_HARMONIC",
    "harmonic_excited",
    "harmonic_ground",
    "secrest_johnson",
    "henon_heiles",
    "initial_state_for",
    # propagation
    "CompositionScheme",
    "compose_scheme",
    "available_schemes",
    "strang_step",
    "naive_step",
    "step_V_fixed",
    "step_T_fixed",
    "step_V_adaptive",
    "step_T_adaptive",
    "propagate",
    "PropagationReport",
    "DiagnosticSeries",
    # diagnostics
    "state_distance",
    "reversibility_error",
    "convergence_study",
    "ConvergenceTable",
    "verlet_threshold",
    "autocorrelation",
    "spectrum",
]
