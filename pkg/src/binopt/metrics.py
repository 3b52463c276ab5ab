"""Evaluation metrics and independent test-time oracles.

Metrics: recovery accuracy, bit error rate, and the relative optimality
gap in percent.  Oracles: exhaustive binary enumeration (exact for
small dimensions), a dense-grid minimizer for the scalar prox
objective, and central finite differences for gradients.  The oracles
are deliberately simple; the closed-form code paths they validate must
never be reused here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objectives import CapabilityError, Objective, QuboObjective

BRUTE_FORCE_MAX_DIM = 24


@dataclass
class MetricReport:
    objective: float
    time_secs: float
    acc: float | None = None
    ber: float | None = None
    gap_percent: float | None = None


def accuracy(x, x_star) -> float:
    """1 - ||x - x*|| / ||x*||; can be negative for poor solutions."""
    x = np.asarray(x, dtype=np.float64)
    x_star = np.asarray(x_star, dtype=np.float64)
    if x.shape != x_star.shape:
        raise ValueError("length mismatch")
    denom = float(np.linalg.norm(x_star))
    if denom == 0.0:
        raise ValueError("accuracy undefined for zero ground truth")
    return 1.0 - float(np.linalg.norm(x - x_star)) / denom


def bit_error_rate(x, x_star) -> float:
    """Fraction of mismatched bits; both inputs must be exactly binary."""
    x = np.asarray(x, dtype=np.float64)
    x_star = np.asarray(x_star, dtype=np.float64)
    if x.shape != x_star.shape:
        raise ValueError("length mismatch")
    for v in (x, x_star):
        if not np.all((v == 0.0) | (v == 1.0)):
            raise ValueError("bit error rate requires exactly binary vectors")
    return float(np.count_nonzero(x != x_star)) / x.size


def gap(obj_value: float, lowest: float) -> float:
    """Relative optimality gap |obj - lowest| / |lowest| in percent."""
    if lowest == 0.0:
        raise ValueError("gap undefined for zero reference value")
    return abs(obj_value - lowest) / abs(lowest) * 100.0


def _lex_binary_block(start: int, stop: int, n: int) -> np.ndarray:
    # Rows are the binary expansions of start..stop-1, most significant
    # bit first, i.e. lexicographic order of the vectors.
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.float64)


def brute_force_min(obj: Objective, n: int | None = None):
    """Exact global binary minimizer by exhaustive enumeration.

    Ties break toward the lexicographically smallest vector.  Quadratic
    objectives enumerate in vectorized blocks; any other objective is
    evaluated point by point, which is practical only for small n.
    """
    n = obj.dim if n is None else n
    if n != obj.dim:
        raise ValueError("n disagrees with the objective dimension")
    if n > BRUTE_FORCE_MAX_DIM:
        raise CapabilityError(
            f"enumeration over 2^{n} points exceeds the n <= {BRUTE_FORCE_MAX_DIM} cap"
        )
    total = 1 << n
    if isinstance(obj, QuboObjective):
        Q = obj.Q
        dense = Q.toarray() if hasattr(Q, "toarray") else Q
        best_val = np.inf
        best_idx = 0
        block = 1 << 16
        for start in range(0, total, block):
            X = _lex_binary_block(start, min(start + block, total), n)
            vals = 0.5 * np.einsum("ij,ij->i", X @ dense, X)
            j = int(np.argmin(vals))
            if vals[j] < best_val:
                best_val = float(vals[j])
                best_idx = start + j
        x_opt = _lex_binary_block(best_idx, best_idx + 1, n)[0]
        return x_opt, best_val
    best_val = np.inf
    best_x = None
    for i in range(total):
        x = _lex_binary_block(i, i + 1, n)[0]
        v = obj.value(x)
        if v < best_val:
            best_val = v
            best_x = x
    return best_x, float(best_val)


def _prox_objective_grid(grid_step: float) -> tuple[np.ndarray, np.ndarray]:
    # Independent evaluation of the scalar penalty on the [0, 1] grid;
    # intentionally not routed through binopt.cubic.
    n = int(round(1.0 / grid_step))
    w = np.linspace(0.0, 1.0, n + 1)
    pen = np.where(w <= 0.5, w**3 - 3.0 * w**2 + 3.0 * w, 1.0 - w**3)
    return w, pen


_GRID_CACHE: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _cached_grid(grid_step: float) -> tuple[np.ndarray, np.ndarray]:
    if grid_step not in _GRID_CACHE:
        _GRID_CACHE.clear()
        _GRID_CACHE[grid_step] = _prox_objective_grid(grid_step)
    return _GRID_CACHE[grid_step]


def grid_prox_oracle(z: float, tau: float, grid_step: float = 1e-6) -> np.ndarray:
    """All grid points within 1e-8 of the grid minimum of the prox objective."""
    if grid_step > 1e-4:
        raise ValueError("grid_step must be at most 1e-4")
    w, pen = _cached_grid(grid_step)
    vals = pen + (w - z) ** 2 / (2.0 * tau)
    return w[vals <= vals.min() + 1e-8]


def grid_prox_min_batch(z_values, tau: float, grid_step: float = 1e-6) -> np.ndarray:
    """Grid minima of the prox objective for many z at a fixed tau.

    Expands the objective as ``base(w) - (z/tau) w + z^2/(2 tau)`` with
    ``base = pen + w^2/(2 tau)``; the argmin of ``base - c w`` is
    nondecreasing in c, so a divide-and-conquer over sorted z touches
    each grid point O(log len(z)) times instead of once per z.
    """
    if grid_step > 1e-4:
        raise ValueError("grid_step must be at most 1e-4")
    w, pen = _cached_grid(grid_step)
    base = pen + w**2 / (2.0 * tau)
    z_values = np.asarray(z_values, dtype=np.float64)
    order = np.argsort(z_values, kind="stable")
    out = np.empty(z_values.shape[0])
    # stack of (z-index range, admissible w range)
    stack = [(0, z_values.shape[0] - 1, 0, w.shape[0] - 1)]
    while stack:
        lo, hi, wlo, whi = stack.pop()
        if lo > hi:
            continue
        mid = (lo + hi) // 2
        z = z_values[order[mid]]
        seg = base[wlo : whi + 1] - (z / tau) * w[wlo : whi + 1]
        j = wlo + int(np.argmin(seg))
        out[order[mid]] = seg[j - wlo] + z**2 / (2.0 * tau)
        stack.append((lo, mid - 1, wlo, j))
        stack.append((mid + 1, hi, j, whi))
    return out


def finite_difference_gradient(fun, x, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g
