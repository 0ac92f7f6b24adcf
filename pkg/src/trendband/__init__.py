"""Online bootstrap confidence bands and tests for smoothed trends.

The package streams a univariate series through an exponential smoother while
maintaining bootstrap replicates of the estimation error, giving bands that
hold uniformly over the monitoring horizon with O(1) work per observation.
"""

from ._backend import available_backends
from .baselines import AsympCs, AsympCsConfig, asympcs_halfwidth, iid_engine_config
from .dgp import DgpParams, SimOutput, preset, simulate, true_smoothed_mean
from .engine import (
    BandTrace,
    Decision,
    Engine,
    EngineConfig,
    NotCalibratedError,
    SequenceExhaustedError,
    StepOutput,
    bootstrap_delta_direct,
    run_test,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    MetricsRow,
    jump_transform,
    power_curve,
    run_experiment,
    uniform_coverage,
)
from .multipliers import MultiplierConfig, MultiplierState, multiplier_step, transform
from .smoothers import Smoother, SmootherParams, effective_sample_size, weight

__version__ = "0.1.0"

__all__ = [
    "AsympCs",
    "AsympCsConfig",
    "BandTrace",
    "Decision",
    "DgpParams",
    "Engine",
    "EngineConfig",
    "ExperimentConfig",
    "ExperimentResult",
    "MetricsRow",
    "MultiplierConfig",
    "MultiplierState",
    "NotCalibratedError",
    "SequenceExhaustedError",
    "SimOutput",
    "Smoother",
    "SmootherParams",
    "StepOutput",
    "asympcs_halfwidth",
    "available_backends",
    "bootstrap_delta_direct",
    "effective_sample_size",
    "iid_engine_config",
    "jump_transform",
    "multiplier_step",
    "power_curve",
    "preset",
    "run_experiment",
    "run_test",
    "simulate",
    "transform",
    "true_smoothed_mean",
    "uniform_coverage",
    "weight",
]
