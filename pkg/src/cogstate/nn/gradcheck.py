"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable

import numpy as np


def numerical_gradient(f: Callable[[], float], arr: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar function w.r.t. an array it reads.

    ``arr`` is perturbed in place and restored; ``f`` must recompute the
    scalar from the current contents on every call.
    """
    grad = np.zeros_like(arr)
    flat = arr.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        f_plus = f()
        flat[i] = orig - step
        f_minus = f()
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numerical: np.ndarray) -> float:
    """Max absolute difference over the larger gradient magnitude.

    Gradients that are zero on both sides (e.g. a parameter the output is
    exactly invariant to) are compared absolutely: dividing finite-
    difference noise by a near-zero scale would report spurious failures.
    """
    diff = float(np.max(np.abs(analytic - numerical)))
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(numerical))))
    if scale < 1e-7:
        return diff
    return diff / scale
