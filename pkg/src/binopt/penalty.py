"""Penalized objective, penalty thresholds, and stationarity residuals.

The penalized objective F(x; lambda) = f(x) + lambda * penalty_sum(x)
agrees with f on binary points.  Above the threshold lambda_bar =
max_box ||grad f||_inf / 3 the penalized and constrained problems share
their global minimizers, and one prox-gradient step with lambda >=
lambda_bar + 1/(3 tau) lands exactly on a binary point.

A point is prox-stationary when it belongs to the prox image of its own
gradient step; the residual reported here is the distance to the nearest
point of that image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubic import penalty_sum, prox_scalar, prox_vector
from .objectives import Objective, lambda_bar_bound_for


@dataclass(frozen=True)
class PenaltyObjective:
    """An objective paired with a fixed penalty weight."""

    base: Objective
    lam: float

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("penalty weight must be nonnegative")

    def value(self, x) -> float:
        return penalty_value(x, self.base, self.lam)


@dataclass(frozen=True)
class StationarityCertificate:
    residual: float
    tau: float
    lam: float
    is_binary: bool


def _check_box(x: np.ndarray):
    if x.size and (np.min(x) < 0.0 or np.max(x) > 1.0):
        raise ValueError("point has components outside [0, 1]")


def is_binary(x) -> bool:
    """Exact componentwise membership in {0, 1}."""
    x = np.asarray(x)
    return bool(np.all((x == 0.0) | (x == 1.0)))


def penalty_value(x, obj: Objective, lam: float) -> float:
    """F(x; lambda) = f(x) + lambda * penalty_sum(x); x must be in the box."""
    if lam < 0.0:
        raise ValueError("penalty weight must be nonnegative")
    x = np.ascontiguousarray(x, dtype=np.float64)
    _check_box(x)
    return obj.value(x) + lam * penalty_sum(x)


def lambda_bar(obj: Objective) -> float:
    """Penalty threshold bound declared by the objective.

    Exact for affine gradients (quadratic objectives); a sound
    over-estimate otherwise.  CapabilityError when the objective
    declares no bound.
    """
    return lambda_bar_bound_for(obj)


def binary_snap_threshold(lambda_bar_value: float, tau: float) -> float:
    """Penalty weight above which a prox step is guaranteed binary."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    return lambda_bar_value + 1.0 / (3.0 * tau)


def stationarity_check(x, obj: Objective, tau: float, lam: float) -> StationarityCertificate:
    """Distance from x to the prox image of its own gradient step.

    The prox image is a set (componentwise products of one- or
    two-point sets); the residual is minimized over the full set, so
    any member certifies stationarity.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64)
    _check_box(x)
    z = x - tau * obj.gradient(x)
    t = tau * lam
    image = prox_vector(z, t)
    d2 = (x - image) ** 2
    # Two-candidate components exist only where the prox argument hits
    # exactly 1/2; take the closer candidate there.
    for i in np.flatnonzero(z == 0.5):
        cands = prox_scalar(float(z[i]), t).candidates
        d2[i] = min((x[i] - c) ** 2 for c in cands)
    return StationarityCertificate(
        residual=float(np.sqrt(np.sum(d2))),
        tau=float(tau),
        lam=float(lam),
        is_binary=is_binary(x),
    )
