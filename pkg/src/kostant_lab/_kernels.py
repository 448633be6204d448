"""Hot numeric kernels with numba and pure-numpy implementations.

Set ``KOSTANT_LAB_DISABLE_NUMBA=1`` to force the numpy path. Both paths are
always importable as ``numba_impl`` / ``numpy_impl`` for benchmarking and
cross-checking; the module-level names point at the active one.
"""
from __future__ import annotations

import os
import types

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("KOSTANT_LAB_DISABLE_NUMBA", "").lower() in ("", "0", "false", "no")

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (nonnegative half).
XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
# Full 15-point node/weight arrays; Gauss weights placed on the odd Kronrod nodes.
NODES = np.concatenate([-XGK[:-1], XGK[::-1]])
KW = np.concatenate([WGK[:-1], WGK[::-1]])
GW = np.zeros(15)
GW[1::2] = np.concatenate([WG[:-1], WG[::-1]])

MAX_INTERVALS = 200


# ---------------------------------------------------------------- numpy path

def _phi_np(w):
    """``expm1(w)/w`` for complex ``w`` with a series near zero."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1e-3
    ws = np.where(small, w, 0)
    series = 1 + ws / 2 + ws * ws / 6 + ws ** 3 / 24 + ws ** 4 / 120
    wb = np.where(small, 1.0, w)
    big = (np.exp(wb) - 1) / wb
    return np.where(small, series, big)


def homotopy_exact_np(h, L, m):
    """``K = int_{-L}^0 exp((m - i h) t) dt`` in closed form, elementwise."""
    h = np.asarray(h, dtype=float)
    L = np.asarray(L, dtype=float)
    z = m - 1j * h
    return L * _phi_np(-z * L)


def _gk_interval_np(a, b, m, h):
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.exp((m - 1j * h) * (c + r * NODES))
    k = r * np.dot(KW, vals)
    g = r * np.dot(GW, vals)
    return k, abs(k - g)


def _adaptive_np(a, b, m, h, tol):
    stack = [(a, b)]
    total = 0j
    err_total = 0.0
    count = 0
    while stack:
        lo, hi = stack.pop()
        k, err = _gk_interval_np(lo, hi, m, h)
        count += 1
        local_tol = tol * (hi - lo) / (b - a) if b > a else tol
        if err <= max(local_tol, 1e-15 * abs(k)) or count >= MAX_INTERVALS:
            total += k
            err_total += err
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi))
            stack.append((lo, mid))
    return total, err_total, count < MAX_INTERVALS


def homotopy_quad_np(h, L, m, tol):
    """Adaptive G7K15 quadrature of ``exp((m - i h) t)`` over ``[-L, 0]``.

    Returns ``(values, error_estimates, converged)`` arrays.
    """
    h = np.atleast_1d(np.asarray(h, dtype=float))
    L = np.broadcast_to(np.asarray(L, dtype=float), h.shape)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), h.shape)
    out = np.zeros(h.shape, dtype=complex)
    err = np.zeros(h.shape)
    ok = np.ones(h.shape, dtype=bool)
    for idx in np.ndindex(h.shape):
        Li = L[idx]
        if Li == 0.0:
            continue
        lo, hi = (-Li, 0.0) if Li > 0 else (0.0, -Li)
        val, e, conv = _adaptive_np(lo, hi, float(m), h[idx], tol[idx])
        out[idx] = val if Li > 0 else -val
        err[idx] = e
        ok[idx] = conv
    return out, err, ok


def jet_recursion_np(f, N):
    """Solve ``(l-k) g[k,l] - i g[k-1,l-1] = f[k,l]`` for ``k + l <= N``.

    ``f`` is a dense complex array indexed ``[k, l]`` holding at least the
    coefficients up to total degree ``N + 2``. The diagonal uses
    ``g[k,k] = i f[k+1,k+1]``.
    """
    g = np.zeros((N + 1, N + 1), dtype=complex)
    M = f.shape[0]
    for k in range(N + 1):
        for l in range(N + 1 - k):
            if k == l:
                if k + 1 < M and k + 1 < f.shape[1]:
                    g[k, k] = 1j * f[k + 1, k + 1]
            else:
                prev = g[k - 1, l - 1] if (k > 0 and l > 0) else 0j
                g[k, l] = (f[k, l] + 1j * prev) / (l - k)
    return g


numpy_impl = types.SimpleNamespace(
    homotopy_exact=homotopy_exact_np,
    homotopy_quad=homotopy_quad_np,
    jet_recursion=jet_recursion_np,
)

# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    _NODES, _KW, _GW = NODES.copy(), KW.copy(), GW.copy()

    @numba.njit(cache=True)
    def _phi_nb(w):
        if abs(w) < 1e-3:
            return 1 + w / 2 + w * w / 6 + w ** 3 / 24 + w ** 4 / 120
        return (np.exp(w) - 1) / w

    @numba.njit(cache=True)
    def _homotopy_exact_nb(h, L, m):
        out = np.empty(h.shape[0], dtype=np.complex128)
        for i in range(h.shape[0]):
            z = m - 1j * h[i]
            out[i] = L[i] * _phi_nb(-z * L[i])
        return out

    @numba.njit(cache=True)
    def _gk_interval_nb(lo, hi, m, h):
        c = 0.5 * (lo + hi)
        r = 0.5 * (hi - lo)
        k = 0j
        g = 0j
        z = m - 1j * h
        for q in range(15):
            v = np.exp(z * (c + r * _NODES[q]))
            k += _KW[q] * v
            g += _GW[q] * v
        return r * k, abs(r * (k - g))

    @numba.njit(cache=True)
    def _homotopy_quad_nb(h, L, m, tol, max_intervals):
        n = h.shape[0]
        out = np.zeros(n, dtype=np.complex128)
        err = np.zeros(n)
        ok = np.ones(n, dtype=np.bool_)
        stack_lo = np.empty(max_intervals + 2)
        stack_hi = np.empty(max_intervals + 2)
        for i in range(n):
            Li = L[i]
            if Li == 0.0:
                continue
            if Li > 0:
                a, b, sgn = -Li, 0.0, 1.0
            else:
                a, b, sgn = 0.0, -Li, -1.0
            top = 0
            stack_lo[0] = a
            stack_hi[0] = b
            top = 1
            total = 0j
            etot = 0.0
            count = 0
            while top > 0:
                top -= 1
                lo = stack_lo[top]
                hi = stack_hi[top]
                k, e = _gk_interval_nb(lo, hi, m, h[i])
                count += 1
                local_tol = tol[i] * (hi - lo) / (b - a)
                if e <= max(local_tol, 1e-15 * abs(k)) or count >= max_intervals or top + 2 > max_intervals:
                    total += k
                    etot += e
                else:
                    mid = 0.5 * (lo + hi)
                    stack_lo[top] = mid
                    stack_hi[top] = hi
                    stack_lo[top + 1] = lo
                    stack_hi[top + 1] = mid
                    top += 2
            out[i] = sgn * total
            err[i] = etot
            ok[i] = count < max_intervals
        return out, err, ok

    @numba.njit(cache=True)
    def _jet_recursion_nb(f, N):
        g = np.zeros((N + 1, N + 1), dtype=np.complex128)
        M0 = f.shape[0]
        M1 = f.shape[1]
        for k in range(N + 1):
            for l in range(N + 1 - k):
                if k == l:
                    if k + 1 < M0 and k + 1 < M1:
                        g[k, k] = 1j * f[k + 1, k + 1]
                else:
                    prev = 0j
                    if k > 0 and l > 0:
                        prev = g[k - 1, l - 1]
                    g[k, l] = (f[k, l] + 1j * prev) / (l - k)
        return g

    def homotopy_exact_nb(h, L, m):
        h = np.asarray(h, dtype=float)
        shape = h.shape
        L = np.broadcast_to(np.asarray(L, dtype=float), shape)
        out = _homotopy_exact_nb(np.ascontiguousarray(h.ravel()), np.ascontiguousarray(L.ravel()), float(m))
        return out.reshape(shape)

    def homotopy_quad_nb(h, L, m, tol):
        h = np.atleast_1d(np.asarray(h, dtype=float))
        shape = h.shape
        L = np.broadcast_to(np.asarray(L, dtype=float), shape)
        tol = np.broadcast_to(np.asarray(tol, dtype=float), shape)
        out, err, ok = _homotopy_quad_nb(
            np.ascontiguousarray(h.ravel()), np.ascontiguousarray(L.ravel()),
            float(m), np.ascontiguousarray(tol.ravel()), MAX_INTERVALS,
        )
        return out.reshape(shape), err.reshape(shape), ok.reshape(shape)

    def jet_recursion_nb(f, N):
        return _jet_recursion_nb(np.ascontiguousarray(f, dtype=np.complex128), int(N))

    numba_impl = types.SimpleNamespace(
        homotopy_exact=homotopy_exact_nb,
        homotopy_quad=homotopy_quad_nb,
        jet_recursion=jet_recursion_nb,
    )
else:  # pragma: no cover
    numba_impl = None

active = numba_impl if USE_NUMBA else numpy_impl
homotopy_exact = active.homotopy_exact
homotopy_quad = active.homotopy_quad
jet_recursion = active.jet_recursion
BACKEND = "numba" if USE_NUMBA else "numpy"
