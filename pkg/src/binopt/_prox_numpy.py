"""Pure-numpy backend for the prox kernels.

Reference semantics for binopt._prox_kernels: identical branch
boundaries, constants and operation order, so that both backends return
bitwise-equal prox images (reductions may differ in the last ulps
because numpy sums pairwise).
"""

import numpy as np

ONE_SIXTH = 1.0 / 6.0


def cubic_values(w):
    w = np.asarray(w, dtype=np.float64)
    return np.where(w <= 0.5, ((w - 3.0) * w + 3.0) * w, 1.0 - w * w * w)


def penalty_sum(x):
    return float(np.sum(cubic_values(x)))


def prox_select(z, t):
    if t <= 0.0:
        raise ValueError("prox parameter must be positive")
    z = np.asarray(z, dtype=np.float64)
    if t >= ONE_SIXTH:
        return np.where(z > 0.5, 1.0, 0.0)
    # rationalized interior roots, stable as t -> 0
    root_low = 1.0 + 2.0 * (z - 1.0) / (1.0 + np.sqrt(np.maximum(1.0 + 12.0 * t * (z - 1.0), 0.0)))
    root_high = 2.0 * z / (1.0 + np.sqrt(np.maximum(1.0 - 12.0 * t * z, 0.0)))
    out = np.select(
        [z <= 3.0 * t, z <= 0.5, z < 1.0 - 3.0 * t],
        [0.0, np.clip(root_low, 0.0, 1.0), np.clip(root_high, 0.0, 1.0)],
        default=1.0,
    )
    return out


def prox_step(z, t, x):
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError("length mismatch between z and x")
    out = prox_select(z, t)
    d = out - x
    return out, penalty_sum(out), float(np.dot(d, d))
