"""Piecewise-cubic binary penalty and its box-constrained prox map.

The scalar penalty

    c(w) = w^3 - 3w^2 + 3w   for w <= 1/2,
           1 - w^3           for w >  1/2,

is zero exactly at {0, 1} and positive on (0, 1), so its componentwise
sum vanishes on a box vector iff the vector is binary.  The prox map

    argmin_{w in [0,1]}  c(w) + (w - z)^2 / (2 t)

has a closed form with two regimes: for t >= 1/6 it snaps straight to
{0, 1}; for t < 1/6 interior roots of the two cubic branches appear.
Vector operations dispatch to a compiled kernel when available and to a
numpy fallback otherwise (set BINOPT_PURE_PYTHON=1 to force the
fallback).

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _prox_numpy

if os.environ.get("BINOPT_PURE_PYTHON"):
    _BACKEND = _prox_numpy
else:
    try:
        from . import _prox_kernels as _BACKEND
    except ImportError:
        _BACKEND = _prox_numpy

#: "cython" when the compiled kernel is active, "numpy" otherwise.
KERNEL_BACKEND = "numpy" if _BACKEND is _prox_numpy else "cython"

LARGE_TAU_MIN = 1.0 / 6.0


class ProxBranch(Enum):
    LARGE_TAU = "large_tau"   # t >= 1/6: prox image is a subset of {0, 1}
    SMALL_TAU = "small_tau"   # t < 1/6: interior roots possible


@dataclass(frozen=True)
class ProxRegime:
    tau: float
    branch: ProxBranch


def prox_regime(tau: float) -> ProxRegime:
    """Classify the prox parameter; the boundary tau = 1/6 snaps."""
    if tau <= 0.0:
        raise ValueError("prox parameter must be positive")
    branch = ProxBranch.LARGE_TAU if tau >= LARGE_TAU_MIN else ProxBranch.SMALL_TAU
    return ProxRegime(tau=tau, branch=branch)


@dataclass(frozen=True)
class ScalarProxResult:
    """Full minimizer set of the scalar box prox (one or two points).

    ``candidates`` is sorted ascending; ``selected`` is the deterministic
    tie-break, always the smaller candidate.
    """

    candidates: tuple[float, ...]
    selected: float


def cubic_value(x):
    """Scalar penalty, vectorized; zero exactly at 0 and 1 on [0, 1]."""
    out = _prox_numpy.cubic_values(x)
    if np.ndim(x) == 0:
        return float(out)
    return out


def cubic_subdiff(x: float) -> tuple[float, ...]:
    """Limiting subdifferential of the scalar penalty.

    Singleton everywhere except the kink at 1/2 where it is the pair
    {-3/4, +3/4}.
    """
    if x < 0.5:
        return (3.0 * x * x - 6.0 * x + 3.0,)
    if x == 0.5:
        return (-0.75, 0.75)
    return (-3.0 * x * x,)


def penalty_sum(x) -> float:
    """Componentwise penalty sum; zero iff x is binary (for x in the box)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    return float(_BACKEND.penalty_sum(x))


def _root_low(z: float, t: float) -> float:
    # Stationary point of the w <= 1/2 cubic branch, in the rationalized
    # form that stays accurate as t -> 0.  The discriminant is
    # nonnegative for z > 3t; clamp guards rounding at the boundary.
    disc = 1.0 + 12.0 * t * (z - 1.0)
    if disc < -1e-12:
        raise ArithmeticError(
            f"negative prox discriminant {disc!r} for z={z!r}, t={t!r}"
        )
    w = 1.0 + 2.0 * (z - 1.0) / (1.0 + math.sqrt(max(disc, 0.0)))
    return min(max(w, 0.0), 1.0)


def _root_high(z: float, t: float) -> float:
    # Stationary point of the w > 1/2 cubic branch; nonnegative
    # discriminant for z < 1 - 3t.
    disc = 1.0 - 12.0 * t * z
    if disc < -1e-12:
        raise ArithmeticError(
            f"negative prox discriminant {disc!r} for z={z!r}, t={t!r}"
        )
    w = 2.0 * z / (1.0 + math.sqrt(max(disc, 0.0)))
    return min(max(w, 0.0), 1.0)


def prox_scalar(z: float, tau: float) -> ScalarProxResult:
    """Full minimizer set of c(w) + (w - z)^2 / (2 tau) over [0, 1].

    ``z`` may lie anywhere on the real line (prox arguments leave the
    box).  Raises ValueError for non-positive ``tau``.
    """
    if tau <= 0.0:
        raise ValueError("prox parameter must be positive")
    if tau >= LARGE_TAU_MIN:
        if z < 0.5:
            cands = (0.0,)
        elif z == 0.5:
            cands = (0.0, 1.0)
        else:
            cands = (1.0,)
    else:
        if z <= 3.0 * tau:
            cands = (0.0,)
        elif z < 0.5:
            cands = (_root_low(z, tau),)
        elif z == 0.5:
            cands = (_root_low(z, tau), _root_high(z, tau))
        elif z < 1.0 - 3.0 * tau:
            cands = (_root_high(z, tau),)
        else:
            cands = (1.0,)
    return ScalarProxResult(candidates=cands, selected=cands[0])


def prox_vector(z, tau_lambda: float) -> np.ndarray:
    """Componentwise selected prox with combined parameter tau*lambda."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    return _BACKEND.prox_select(z, float(tau_lambda))


def prox_step(z, tau_lambda: float, x) -> tuple[np.ndarray, float, float]:
    """Fused solver step: prox image, its penalty sum, and ||image - x||^2."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    out, pen, sqd = _BACKEND.prox_step(z, float(tau_lambda), x)
    return out, float(pen), float(sqd)
