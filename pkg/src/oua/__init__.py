"""Reward-modulated Ornstein-Uhlenbeck learning.

Parameters diffuse around an adaptive mean; the mean drifts toward
parameter excursions that beat the running average reward. Everything is
simulated in continuous time with a stochastic Heun integrator, with
optional compiled kernels for the hot loops (see :mod:`oua._backend`).
"""

from ._backend import backend, set_backend
from .dynamics import (
    SIGMA_FLOOR,
    Hyperparams,
    LearnerState,
    MetaState,
    learner_as_sde,
    rpe,
    stationary_covariance,
)
from .errors import ConfigError, DataError, IntegrationError, OuaError
from .harness import (
    ExperimentConfig,
    MetaParams,
    RunRecord,
    SdiParams,
    SweepResult,
    WeatherParams,
    experiment,
    run,
    run_many,
    sweep,
    weather_experiment,
)
from .presets import PRESET_NAMES, preset
from .sde import DEFAULT_DT, SdeSystem, TimeGrid, WienerSource, euler_heun_step, integrate

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_DT",
    "SIGMA_FLOOR",
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "Hyperparams",
    "IntegrationError",
    "LearnerState",
    "MetaParams",
    "MetaState",
    "OuaError",
    "PRESET_NAMES",
    "RunRecord",
    "SdeSystem",
    "SdiParams",
    "SweepResult",
    "TimeGrid",
    "WeatherParams",
    "WienerSource",
    "__version__",
    "backend",
    "euler_heun_step",
    "experiment",
    "integrate",
    "learner_as_sde",
    "preset",
    "rpe",
    "run",
    "run_many",
    "set_backend",
    "stationary_covariance",
    "sweep",
    "weather_experiment",
]
