"""Smooth objectives behind a uniform value/gradient interface.

Three families: quadratic binary objectives (symmetric coupling matrix),
q-norm residual recovery objectives, and the sign-quantized observation
log-likelihood.  Each declares a sound upper bound on the box gradient
sup-norm (used for penalty thresholds) and, where available, a cheap
smoothness estimate for diagnostics.

Objectives are immutable after construction; value/gradient are pure.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.special import log_ndtr

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class CapabilityError(RuntimeError):
    """An objective lacks a capability required by the caller."""


class Objective:
    """Abstract smooth function over the unit box [0, 1]^dim."""

    dim: int

    def value(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def value_and_gradient(self, x) -> tuple[float, np.ndarray]:
        return self.value(x), self.gradient(x)

    def lambda_bar_bound(self) -> float | None:
        """Upper bound on max_{x in box} ||grad f(x)||_inf / 3, if known."""
        return None

    def smoothness_estimate(self) -> float | None:
        """Upper bound on the gradient Lipschitz constant over the box."""
        return None


def _as_vector(x, n: int) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"expected vector of length {n}, got shape {x.shape}")
    return x


def _maxabs_inf_norm(mat) -> float:
    if sp.issparse(mat):
        return float(abs(mat).max()) if mat.nnz else 0.0
    return float(np.max(np.abs(mat))) if mat.size else 0.0


def _induced_inf_norm(mat) -> float:
    if sp.issparse(mat):
        return float(abs(mat).sum(axis=1).max()) if mat.nnz else 0.0
    return float(np.max(np.sum(np.abs(mat), axis=1))) if mat.size else 0.0


def _induced_one_norm(mat) -> float:
    if sp.issparse(mat):
        return float(abs(mat).sum(axis=0).max()) if mat.nnz else 0.0
    return float(np.max(np.sum(np.abs(mat), axis=0))) if mat.size else 0.0


class QuboObjective(Objective):
    """f(x) = <x, Q x> / 2 with symmetric Q (dense or CSR).

    Q is symmetrized at construction; the gradient is Q x.
    """

    def __init__(self, Q):
        if sp.issparse(Q):
            Q = Q.tocsr()
            if Q.shape[0] != Q.shape[1]:
                raise ValueError("Q must be square")
            Q = (Q + Q.T) * 0.5
            Q = Q.tocsr()
        else:
            Q = np.ascontiguousarray(Q, dtype=np.float64)
            if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
                raise ValueError("Q must be square")
            Q = (Q + Q.T) * 0.5
        self.Q = Q
        self.dim = Q.shape[0]

    def value(self, x) -> float:
        x = _as_vector(x, self.dim)
        return 0.5 * float(x @ (self.Q @ x))

    def gradient(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        g = self.Q @ x
        return np.asarray(g, dtype=np.float64).ravel()

    def value_and_gradient(self, x) -> tuple[float, np.ndarray]:
        x = _as_vector(x, self.dim)
        g = np.asarray(self.Q @ x, dtype=np.float64).ravel()
        return 0.5 * float(x @ g), g

    def lambda_bar_bound(self) -> float:
        # Exact: the gradient is affine, so per row the box maximum of
        # |<q_i, x>| is max(sum of positives, sum of |negatives|).
        if sp.issparse(self.Q):
            pos = np.asarray(self.Q.maximum(0).sum(axis=1)).ravel()
            neg = np.asarray((-self.Q).maximum(0).sum(axis=1)).ravel()
        else:
            pos = np.maximum(self.Q, 0.0).sum(axis=1)
            neg = np.maximum(-self.Q, 0.0).sum(axis=1)
        if pos.size == 0:
            return 0.0
        return float(np.max(np.maximum(pos, neg))) / 3.0

    def smoothness_estimate(self) -> float:
        # ||Q||_2 <= max absolute row sum for symmetric Q.
        return _induced_inf_norm(self.Q)


class LqRecoveryObjective(Objective):
    """f(x) = sum_i |(A x - b)_i|^q / 2 with q > 1.

    q = 2 is the classical least-squares detector; the stacked real form
    of complex channels uses exactly this objective.
    """

    def __init__(self, A, b, q: float):
        if q <= 1.0:
            raise ValueError("q must exceed 1 for a continuous gradient")
        if sp.issparse(A):
            self.A = A.tocsr()
        else:
            self.A = np.ascontiguousarray(A, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64).ravel()
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A and b have incompatible row counts")
        self.q = float(q)
        self.dim = self.A.shape[1]

    def _residual(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        return np.asarray(self.A @ x, dtype=np.float64).ravel() - self.b

    def value(self, x) -> float:
        r = self._residual(x)
        if self.q == 2.0:
            return 0.5 * float(np.dot(r, r))
        return 0.5 * float(np.sum(np.abs(r) ** self.q))

    def _grad_from_residual(self, r: np.ndarray) -> np.ndarray:
        if self.q == 2.0:
            s = r
        else:
            s = np.sign(r) * np.abs(r) ** (self.q - 1.0)
        g = self.A.T @ s
        return (self.q / 2.0) * np.asarray(g, dtype=np.float64).ravel()

    def gradient(self, x) -> np.ndarray:
        return self._grad_from_residual(self._residual(x))

    def value_and_gradient(self, x) -> tuple[float, np.ndarray]:
        r = self._residual(x)
        if self.q == 2.0:
            val = 0.5 * float(np.dot(r, r))
        else:
            val = 0.5 * float(np.sum(np.abs(r) ** self.q))
        return val, self._grad_from_residual(r)

    def _residual_box_bound(self) -> np.ndarray:
        # Componentwise bound on |A x - b| over the box: |A| 1 + |b|.
        if sp.issparse(self.A):
            row_abs = np.asarray(abs(self.A).sum(axis=1)).ravel()
        else:
            row_abs = np.sum(np.abs(self.A), axis=1)
        return row_abs + np.abs(self.b)

    def lambda_bar_bound(self) -> float:
        rbar = self._residual_box_bound() ** (self.q - 1.0)
        if sp.issparse(self.A):
            col = np.asarray(abs(self.A).T @ rbar).ravel()
        else:
            col = np.abs(self.A).T @ rbar
        return (self.q / 2.0) * float(np.max(col, initial=0.0)) / 3.0

    def smoothness_estimate(self) -> float | None:
        # The gradient is not Lipschitz near zero residuals for q < 2.
        if self.q < 2.0:
            return None
        op_sq = _induced_one_norm(self.A) * _induced_inf_norm(self.A)
        if self.q == 2.0:
            return op_sq
        rmax = float(np.max(self._residual_box_bound(), initial=0.0))
        return 0.5 * self.q * (self.q - 1.0) * rmax ** (self.q - 2.0) * op_sq


def mills_ratio(u):
    """phi(u) / Phi(u), stable far into the left tail (u ~ -40)."""
    u = np.asarray(u, dtype=np.float64)
    out = np.exp(-0.5 * u * u - LOG_SQRT_2PI - log_ndtr(u))
    if u.ndim == 0:
        return float(out)
    return out


class OneBitMimoObjective(Objective):
    """Negative log-likelihood of sign-quantized linear observations.

    With bipolar signal z = 2x - 1 and scaled margins
    u_i = y_i <h_i, z> / rho, the value is -sum_i log Phi(u_i).  The
    gradient kernel is the inverse Mills ratio, evaluated through
    log_ndtr so that deep negative margins stay finite.
    """

    def __init__(self, H, y, rho: float):
        self.H = np.ascontiguousarray(H, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64).ravel()
        if self.H.ndim != 2 or self.H.shape[0] != self.y.shape[0]:
            raise ValueError("H and y have incompatible shapes")
        if not np.all(np.abs(self.y) == 1.0):
            raise ValueError("y must be componentwise +-1")
        if rho <= 0.0:
            raise ValueError("rho must be positive")
        self.rho = float(rho)
        self.dim = self.H.shape[1]

    def _margins(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        z = 2.0 * x - 1.0
        return self.y * (self.H @ z) / self.rho

    def value(self, x) -> float:
        return -float(np.sum(log_ndtr(self._margins(x))))

    def gradient(self, x) -> np.ndarray:
        u = self._margins(x)
        return -(2.0 / self.rho) * (self.H.T @ (self.y * mills_ratio(u)))

    def value_and_gradient(self, x) -> tuple[float, np.ndarray]:
        u = self._margins(x)
        val = -float(np.sum(log_ndtr(u)))
        grad = -(2.0 / self.rho) * (self.H.T @ (self.y * mills_ratio(u)))
        return val, grad

    def lambda_bar_bound(self) -> float:
        # The Mills ratio decreases, so bounding each margin from below
        # by -(||h_i||_1 / rho + guard) bounds the kernel from above.
        ubar = np.sum(np.abs(self.H), axis=1) / self.rho + 1e-9
        rbar = mills_ratio(-ubar)
        col = np.abs(self.H).T @ rbar
        return (2.0 / self.rho) * float(np.max(col, initial=0.0)) / 3.0

    def smoothness_estimate(self) -> float:
        # d^2(-log Phi)/du^2 = R(u)(u + R(u)) lies in (0, 1).
        op_sq = _induced_one_norm(self.H) * _induced_inf_norm(self.H)
        return (4.0 / self.rho**2) * op_sq


def lambda_bar_bound_for(obj: Objective) -> float:
    """Declared penalty-threshold bound of an objective.

    Raises CapabilityError when the objective declares none.
    """
    bound = obj.lambda_bar_bound()
    if bound is None:
        raise CapabilityError(
            f"{type(obj).__name__} declares no box gradient bound"
        )
    return float(bound)
