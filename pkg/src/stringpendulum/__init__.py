"""Structure-preserving simulation of an elastic string pendulum.

A finite-element elastic string connects an inertially fixed reel mechanism to
a rigid end body; the flow map is a variational integrator on the product group
R x (R^3)^(N+1) x SO(3), so the attitude stays exactly on SO(3) and energy and
vertical angular momentum behave the way the mechanics says they should.
"""

from .errors import (
    CayleyBoundaryError,
    ConfigError,
    DegenerateElementError,
    FullyDeployedError,
    IOFailure,
    NonConvergenceError,
    ReelLimitError,
    StringPendulumError,
)
from .params import (
    BodyParams,
    ControlInput,
    Discretization,
    Environment,
    ModelParams,
    ReelParams,
    StringParams,
)
from .state import Configuration, RelativeUpdate
from .integrator import (
    InitialVelocities,
    NewtonSettings,
    StepResult,
    SimulationResult,
    initialize_update,
    initialize_update_momentum,
    residual,
    simulate,
    solve_step,
)
from .config import RunConfig, build_initial_state, load_config, write_config
from .presets import PRESET_NAMES, expand_preset

__version__ = "1.0.0"

__all__ = [
    "BodyParams", "CayleyBoundaryError", "ConfigError", "Configuration",
    "ControlInput", "DegenerateElementError", "Discretization", "Environment",
    "FullyDeployedError", "IOFailure", "InitialVelocities", "ModelParams",
    "NewtonSettings", "NonConvergenceError", "PRESET_NAMES", "ReelLimitError",
    "ReelParams", "RelativeUpdate", "RunConfig", "SimulationResult",
    "StepResult", "StringParams", "StringPendulumError", "build_initial_state",
    "expand_preset", "initialize_update", "initialize_update_momentum",
    "load_config", "residual", "simulate", "solve_step", "write_config",
]
