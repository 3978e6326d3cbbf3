"""Adam, RAdam and untuned warmup schedules, with tools to compare them."""

__version__ = "0.1.0"

from .errors import (
    InvalidArgumentError,
    InvalidConfigurationError,
    NumericFailureError,
    ShapeError,
    UndefinedStatisticError,
)
from .optim import (
    AdamHyperparams,
    Optimizer,
    OptimizerKind,
    OptimizerState,
    RadamAblation,
    StepResult,
    adam_step,
    radam_step,
    scheduled_optimizer,
    sgd_step,
)
from .schedules import (
    RhoTerms,
    ScheduleKind,
    WarmupSchedule,
    effective_warmup_period,
    exponential_warmup,
    linear_warmup,
    radam_rho,
    radam_warmup_factor,
    untuned_exponential_tau,
    untuned_linear_tau,
)
from .sim import SimConfig, SimTrajectory, run_local_minimum_sim, stationary_median
from .stats import coefficient_of_variation, pearson_correlation, quantiles
