"""Design, simulation and adaptive control of rhythmic fast-slow oscillator networks."""

from .analysis import ScenarioResult, cumulative_square_error, extract_profile, tail_metrics
from .control import ControllerConfig, NodeMapping, cancellation_term, sliding_target
from .design import (
    RhythmicProfile,
    SpectrumReport,
    controller_gamma,
    design_complex_leading,
    design_real_leading,
    eigen_spectrum,
    hopf_critical_alpha,
    random_plant,
)
from .dynamics import ClosedLoopSystem, closed_loop_rhs, open_loop_rhs, rk4_step, sigmoid, simulate
from .errors import (
    ConfigError,
    DesignError,
    IntegrationBlowup,
    NotRhythmicError,
    NumericalError,
    PreconditionError,
)
from .model import ClosedLoopState, NetworkConfig, StateLayout, TimeVaryingNetwork, Trajectory
from .scenarios import Scenario, build_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ClosedLoopState", "ClosedLoopSystem", "ConfigError", "ControllerConfig", "DesignError", "IntegrationBlowup",
    "NetworkConfig", "NodeMapping", "NotRhythmicError", "NumericalError", "PreconditionError", "RhythmicProfile",
    "Scenario", "ScenarioResult", "SpectrumReport", "StateLayout", "TimeVaryingNetwork", "Trajectory",
    "build_scenario", "cancellation_term", "closed_loop_rhs", "controller_gamma", "cumulative_square_error",
    "design_complex_leading", "design_real_leading", "eigen_spectrum", "extract_profile", "hopf_critical_alpha",
    "open_loop_rhs", "random_plant", "rk4_step", "run_scenario", "sigmoid", "simulate", "sliding_target",
    "tail_metrics",
]
