"""Small numerical kernels shared across modules: finite-difference weights
on arbitrary node sets (Fornberg's recurrence) and derivatives of sampled
time series along trace samplings."""

from __future__ import annotations

import numpy as np

__all__ = ["fd_weights", "series_derivative"]


def fd_weights(x: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x_j) ~ f^(m)(x0), exact for polynomials of
    degree len(x)-1 (Fornberg's recurrence)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if m >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def series_derivative(values: np.ndarray, times: np.ndarray, window: int = 5) -> np.ndarray:
    """d/dt of a sampled series, sample by sample, via local polynomial
    stencils on the actual sample times.

    values: (T,) or (T, N); times strictly increasing.  Interior samples use
    centered windows of width `window` (5 nodes = fourth order); samples near
    the ends use the shifted window of the same width.
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    T = times.size
    if T < 2:
        raise ValueError("need at least two samples to differentiate")
    w = min(window, T)
    half = w // 2
    out = np.empty_like(values, dtype=float)
    for i in range(T):
        lo = min(max(i - half, 0), T - w)
        nodes = times[lo : lo + w]
        wt = fd_weights(nodes, times[i], 1)
        out[i] = np.tensordot(wt, values[lo : lo + w], axes=(0, 0))
    return out
