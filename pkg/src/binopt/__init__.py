"""Binary integer programming via a piecewise-cubic exact penalty.

The package minimizes a smooth function over {0, 1}^n by penalizing a
box relaxation with a separable piecewise-cubic penalty whose prox map
has a closed form, and driving it with an adaptive proximal point
iteration that grows the penalty weight until iterates snap to exact
binary points.
"""

from .cubic import (
    KERNEL_BACKEND,
    ProxBranch,
    ProxRegime,
    ScalarProxResult,
    cubic_subdiff,
    cubic_value,
    penalty_sum,
    prox_regime,
    prox_scalar,
    prox_vector,
)
from .instances import (
    MimoInstance,
    OneBitInstance,
    QuboInstance,
    RecoveryInstance,
    gen_mimo,
    gen_onebit,
    gen_qubo_synthetic,
    gen_recovery,
    load_instance,
    parse_beasley,
    save_instance,
)
from .metrics import accuracy, bit_error_rate, brute_force_min, gap
from .objectives import (
    CapabilityError,
    LqRecoveryObjective,
    Objective,
    OneBitMimoObjective,
    QuboObjective,
)
from .penalty import (
    StationarityCertificate,
    binary_snap_threshold,
    is_binary,
    lambda_bar,
    penalty_value,
    stationarity_check,
)
from .presets import initial_point, preset_for
from .solver import (
    AppaConfig,
    LineSearchError,
    SolveReport,
    Termination,
    appa_step,
    lambda_schedule,
    solve,
    stopping_check,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "AppaConfig",
    "CapabilityError",
    "LineSearchError",
    "LqRecoveryObjective",
    "MimoInstance",
    "Objective",
    "OneBitInstance",
    "OneBitMimoObjective",
    "ProxBranch",
    "ProxRegime",
    "QuboInstance",
    "QuboObjective",
    "RecoveryInstance",
    "ScalarProxResult",
    "SolveReport",
    "StationarityCertificate",
    "Termination",
    "accuracy",
    "appa_step",
    "binary_snap_threshold",
    "bit_error_rate",
    "brute_force_min",
    "cubic_subdiff",
    "cubic_value",
    "gap",
    "gen_mimo",
    "gen_onebit",
    "gen_qubo_synthetic",
    "gen_recovery",
    "initial_point",
    "is_binary",
    "lambda_bar",
    "lambda_schedule",
    "load_instance",
    "parse_beasley",
    "penalty_sum",
    "penalty_value",
    "preset_for",
    "prox_regime",
    "prox_scalar",
    "prox_vector",
    "save_instance",
    "solve",
    "stationarity_check",
    "stopping_check",
]
