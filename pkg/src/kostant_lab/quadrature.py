"""Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands."""
from __future__ import annotations

import heapq

import numpy as np

from ._kernels import GW, KW, NODES
from .errors import QuadratureFailure


def gk15(fun, a: float, b: float):
    """One G7K15 panel: returns ``(kronrod_estimate, |kronrod - gauss|)``."""
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.asarray(fun(c + r * NODES), dtype=complex)
    k = r * np.dot(KW, vals)
    return k, abs(k - r * np.dot(GW, vals))


def adaptive_gk(fun, a: float, b: float, tol: float = 1e-10, max_intervals: int = 500):
    """Integrate ``fun`` over ``[a, b]`` to absolute tolerance ``tol``.

    ``fun`` must accept a 1-d array of abscissae. Panels with the largest
    error estimate are bisected first (global error control).

    Raises
    ------
    QuadratureFailure
        If the summed error estimate is still above ``tol`` after
        ``max_intervals`` panels.
    """
    if a == b:
        return 0j, 0.0
    if b < a:
        val, err = adaptive_gk(fun, b, a, tol, max_intervals)
        return -val, err
    k, e = gk15(fun, a, b)
    heap = [(-e, a, b, k)]
    total, err_total = k, e
    count = 1
    while err_total > tol:
        if count >= max_intervals:
            raise QuadratureFailure(
                f"error estimate {err_total:.3e} above tolerance {tol:.1e} after {count} panels"
            )
        neg_e, lo, hi, kv = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = gk15(fun, lo, mid)
        k2, e2 = gk15(fun, mid, hi)
        total += k1 + k2 - kv
        err_total += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
        count += 1
    return total, err_total
