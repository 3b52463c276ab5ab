"""Adaptive proximal point solver for box-penalized binary programs.

Each iteration backtracks a step size tau = eta * alpha^s until the
prox-gradient update passes the sufficient-decrease test

    F(x+; lambda) <= F(x; lambda) - (sigma/2) ||x+ - x||^2,

then grows the penalty weight by pi every k0 iterations while it stays
below the cap theta.  The run stops as soon as the iterate is exactly
binary and the next update moves it by less than epsilon: such a point
is a binary prox-stationary point of the penalized objective.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cubic import penalty_sum, prox_step
from .objectives import Objective
from .penalty import is_binary, stationarity_check


class Termination(Enum):
    STOPPING_RULE = "stopping_rule"
    MAX_ITERS = "max_iters"
    TIME_CAP = "time_cap"


class LineSearchError(RuntimeError):
    """No backtracking step satisfied the sufficient-decrease test."""

    def __init__(self, last_tau: float, iteration: int, backtracks: int):
        super().__init__(
            f"line search failed at iteration {iteration}: no step in "
            f"{backtracks + 1} trials satisfied sufficient decrease "
            f"(last tau {last_tau:.3e})"
        )
        self.last_tau = last_tau
        self.iteration = iteration


@dataclass
class AppaConfig:
    """Solver hyperparameters.

    eta      initial step scale; the line search tries eta * alpha^s.
    alpha    backtracking shrink factor in (0, 1).
    sigma    sufficient-decrease weight.
    lambda0  initial penalty weight.
    pi       penalty growth factor (> 1).
    theta    penalty cap: growth happens only while lambda < theta.
    k0       penalty update period in iterations.
    epsilon  stopping tolerance in (0, 1) for the iterate displacement.
    """

    eta: float = 1.0
    alpha: float = 0.25
    sigma: float = 1e-8
    lambda0: float = 0.25
    pi: float = 1.5
    theta: float = 100.0
    k0: int = 100
    epsilon: float = 1e-4
    max_iters: int = 1_000_000
    max_backtracks: int = 60
    time_cap_secs: float | None = None
    warm_start_backtracking: bool = False
    record_diagnostics: bool = False

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.lambda0 <= 0.0:
            raise ValueError("lambda0 must be positive")
        if self.pi <= 1.0:
            raise ValueError("pi must exceed 1")
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")
        if self.k0 < 1:
            raise ValueError("k0 must be a positive integer")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")
        if self.time_cap_secs is not None and self.time_cap_secs <= 0.0:
            raise ValueError("time_cap_secs must be positive")


@dataclass
class SolveDiagnostics:
    """Per-iteration records for invariant checking in tests."""

    descent_margins: list[float] = field(default_factory=list)
    all_feasible: bool = True
    binary_flags: list[bool] = field(default_factory=list)
    snap_ready_flags: list[bool] | None = None
    lambda_bar: float | None = None


@dataclass
class SolveReport:
    x_final: np.ndarray
    objective_value: float
    penalty_value: float
    iterations: int
    backtrack_counts: list[int]
    lambda_trace: list[float]
    tau_trace: list[float]
    stationarity_residual: float
    terminated_by: Termination
    wall_time_secs: float
    diagnostics: SolveDiagnostics | None = None


@dataclass
class _Step:
    x_next: np.ndarray
    tau: float
    s: int
    f_next: float
    p_next: float
    sq_dist: float
    F_x: float
    F_next: float


def _line_search(obj, x, grad, F_x, lam, cfg, s_start) -> _Step:
    tau = cfg.eta
    for s in range(s_start, cfg.max_backtracks + 1):
        tau = cfg.eta * cfg.alpha**s
        x_next, p_next, sq_dist = prox_step(x - tau * grad, tau * lam, x)
        f_next = obj.value(x_next)
        F_next = f_next + lam * p_next
        if F_next <= F_x - 0.5 * cfg.sigma * sq_dist:
            return _Step(x_next, tau, s, f_next, p_next, sq_dist, F_x, F_next)
    raise LineSearchError(last_tau=tau, iteration=-1, backtracks=cfg.max_backtracks)


def appa_step(x, obj: Objective, lam: float, cfg: AppaConfig):
    """One backtracked prox-gradient update at fixed penalty weight.

    Returns (x_next, tau, s) for the smallest s whose step passes the
    sufficient-decrease test.
    """
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64)
    f_x, grad = obj.value_and_gradient(x)
    step = _line_search(obj, x, grad, f_x + lam * penalty_sum(x), lam, cfg, 0)
    return step.x_next, step.tau, step.s


def lambda_schedule(k: int, lam: float, cfg: AppaConfig) -> float:
    """Penalty weight for iteration k+1: grow by pi on-period below theta."""
    if (k + 1) % cfg.k0 == 0 and lam < cfg.theta:
        return cfg.pi * lam
    return lam


def stopping_check(x, x_next, cfg: AppaConfig) -> bool:
    """True iff x is exactly binary and the update moved less than epsilon."""
    x = np.asarray(x)
    x_next = np.asarray(x_next)
    return is_binary(x) and float(np.linalg.norm(x - x_next)) < cfg.epsilon


def solve(obj: Objective, x0, cfg: AppaConfig) -> SolveReport:
    """Run the adaptive proximal point iteration from x0.

    x0 outside the unit box is clamped with a warning.  Raises
    LineSearchError when no backtracking step achieves sufficient
    decrease (does not happen for strongly smooth objectives once tau
    falls below 1/(sigma + L)).
    """
    t_start = time.perf_counter()
    x = np.array(x0, dtype=np.float64, copy=True).ravel()
    if x.shape != (obj.dim,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({obj.dim},)")
    if x.size and (np.min(x) < 0.0 or np.max(x) > 1.0):
        warnings.warn("initial point clamped to the unit box", stacklevel=2)
        np.clip(x, 0.0, 1.0, out=x)

    lam = cfg.lambda0
    p_x = penalty_sum(x)
    lambda_trace: list[float] = []
    tau_trace: list[float] = []
    backtrack_counts: list[int] = []

    diag = None
    if cfg.record_diagnostics:
        diag = SolveDiagnostics()
        lb = obj.lambda_bar_bound()
        if lb is not None:
            diag.lambda_bar = float(lb)
            diag.snap_ready_flags = []

    terminated = Termination.MAX_ITERS
    s_prev = 0
    last_tau = cfg.eta
    iterations = 0

    for k in range(cfg.max_iters):
        f_x, grad = obj.value_and_gradient(x)
        F_x = f_x + lam * p_x
        s_start = max(s_prev - 1, 0) if cfg.warm_start_backtracking else 0
        try:
            step = _line_search(obj, x, grad, F_x, lam, cfg, s_start)
        except LineSearchError as err:
            err.iteration = k
            raise

        iterations = k + 1
        lambda_trace.append(lam)
        tau_trace.append(step.tau)
        backtrack_counts.append(step.s)
        s_prev = step.s
        last_tau = step.tau

        if diag is not None:
            diag.descent_margins.append(step.F_x - 0.5 * cfg.sigma * step.sq_dist - step.F_next)
            if np.min(step.x_next) < 0.0 or np.max(step.x_next) > 1.0:
                diag.all_feasible = False
            diag.binary_flags.append(is_binary(step.x_next))
            if diag.snap_ready_flags is not None:
                diag.snap_ready_flags.append(
                    lam >= diag.lambda_bar + 1.0 / (3.0 * step.tau)
                )

        if stopping_check(x, step.x_next, cfg):
            terminated = Termination.STOPPING_RULE
            break

        x = step.x_next
        p_x = step.p_next
        lam = lambda_schedule(k, lam, cfg)

        if (
            cfg.time_cap_secs is not None
            and time.perf_counter() - t_start > cfg.time_cap_secs
        ):
            terminated = Termination.TIME_CAP
            break

    f_final = obj.value(x)
    cert = stationarity_check(x, obj, last_tau, lam)
    return SolveReport(
        x_final=x,
        objective_value=f_final,
        penalty_value=f_final + lam * penalty_sum(x),
        iterations=iterations,
        backtrack_counts=backtrack_counts,
        lambda_trace=lambda_trace,
        tau_trace=tau_trace,
        stationarity_residual=cert.residual,
        terminated_by=terminated,
        wall_time_secs=time.perf_counter() - t_start,
        diagnostics=diag,
    )
