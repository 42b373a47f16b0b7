"""Dynamics of quantum systems coupled to several independent reservoirs.

Independent baths are usually assumed to contribute additively to a master
equation.  With structured (finite-memory) reservoirs that assumption
fails: the exact dynamics mixes the baths' parameters, the mismatch first
appears at fourth order in the couplings, and exploiting it can improve
dark-state preparation.  This package computes both treatments side by
side for two concrete systems — a two-level emitter coupled to two
Lorentzian photonic vacua, and a driven three-level Lambda system with
relaxation plus non-Markovian dephasing — together with a power-series
analysis of the interference order and a deterministic CSV harness.
"""

__version__ = "0.1.0"

from .baths import (
    BathParams,
    ConstantUnit,
    KernelSpec,
    LorentzianExponential,
    MarkovianDelta,
    Tabulated,
    kernel_values,
    memory_kernel,
    single_bath_amplitude,
    single_bath_decay_rate,
    spectral_density,
)
from .errors import (
    ConfigError,
    DegenerateRootsError,
    MultibathError,
    PoleError,
    SolverError,
    StabilityError,
)
from .harness import (
    ResultTable,
    ScenarioConfig,
    SweepSpec,
    TimeGrid,
    emit_csv,
    parse_config,
    run_scenario,
)
from .lambda_system import (
    LambdaParams,
    Propagator,
    additive_me_solve,
    bright_state,
    dark_projector,
    dark_state,
    dark_state_population,
    double_commutator_correlator,
    dressed_liouvillian,
    markovian_dephasing_solve,
    me2_solve,
    min_eigenvalue,
    propagate,
    quantum_darkstate_solution,
    quantum_darkstate_states,
    regression_correlator,
)
from .series import (
    InterferenceResult,
    PowerSeries,
    additive_population_series,
    exact_population_series,
    interference_order,
    series_amplitude,
)
from .two_bath import (
    AmplitudeTrajectory,
    CubicRoots,
    TwoBathModel,
    additive_population,
    additivity_error,
    characteristic_roots,
    exact_amplitude,
    exact_decay_rate,
    exact_population,
    volterra_solve,
)

__all__ = [
    "__version__",
    # baths
    "BathParams",
    "ConstantUnit",
    "KernelSpec",
    "LorentzianExponential",
    "MarkovianDelta",
    "Tabulated",
    "kernel_values",
    "memory_kernel",
    "single_bath_amplitude",
    "single_bath_decay_rate",
    "spectral_density",
    # two-bath emitter
    "AmplitudeTrajectory",
    "CubicRoots",
    "TwoBathModel",
    "additive_population",
    "additivity_error",
    "characteristic_roots",
    "exact_amplitude",
    "exact_decay_rate",
    "exact_population",
    "volterra_solve",
    # series
    "InterferenceResult",
    "PowerSeries",
    "additive_population_series",
    "exact_population_series",
    "interference_order",
    "series_amplitude",
    # Lambda system
    "LambdaParams",
    "Propagator",
    "additive_me_solve",
    "bright_state",
    "dark_projector",
    "dark_state",
    "dark_state_population",
    "double_commutator_correlator",
    "dressed_liouvillian",
    "markovian_dephasing_solve",
    "me2_solve",
    "min_eigenvalue",
    "propagate",
    "quantum_darkstate_solution",
    "quantum_darkstate_states",
    "regression_correlator",
    # harness
    "ResultTable",
    "ScenarioConfig",
    "SweepSpec",
    "TimeGrid",
    "emit_csv",
    "parse_config",
    "run_scenario",
    # errors
    "ConfigError",
    "DegenerateRootsError",
    "MultibathError",
    "PoleError",
    "SolverError",
    "StabilityError",
]
