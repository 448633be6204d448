"""Solvers for ``X(g) - i h g = f`` near a 2-dimensional hyperbolic singularity.

Here ``h = x y`` and ``X = -x d/dx + y d/dy``. Three regimes are covered:

* jets: the coefficient recursion (and its closed form) on truncated series;
* exact: polynomial and rational data, solved in closed form with
  denominators ``(m - i h)``;
* flat: data of the form ``x^a y^b R(h) exp(-c/h^2)``, solved by the
  homotopy integral ``G = int_{-ln gamma}^0 exp(-i h t) F(phi_t) dt``.

Flat sections (solutions of ``X(f) = i h f``) are assembled from four flat
one-variable profiles by :func:`flat_section_build`.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import ArityMismatch, NonzeroConstantTerm, QuadratureFailure, UnsolvableFactor
from .functions import FlatFactor, HRational, PairFactor, QuadrantKernel, SeparableFunction, SeparableTerm
from .normal_forms import build_model, flow, WilliamsonSpec
from .quadrature import adaptive_gk
from .series import TruncatedSeries

__all__ = [
    "solve_jets_recursive",
    "solve_jets_closed_form",
    "solve_poly_exact",
    "homotopy_flat_integral",
    "solve_full_2d",
    "flat_section_build",
    "smooth_function",
    "symbolic_residual",
]

_MODEL_2D = build_model(WilliamsonSpec(0, 1, 0))


def _require_2d(f):
    if f.arity != 1:
        raise ArityMismatch(f"2-dimensional solver needs arity 1, got {f.arity}")


def _dense(f: TruncatedSeries) -> np.ndarray:
    M = f.order
    arr = np.zeros((M + 1, M + 1), dtype=complex)
    for (k, l), v in f.items():
        arr[k, l] = v
    return arr


def solve_jets_recursive(f: TruncatedSeries, tol: float = 0.0) -> TruncatedSeries:
    """Formal solution of ``X(g) - i h g = f``; output order is ``f.order - 2``.

    The coefficients satisfy ``(l - k) g[k,l] - i g[k-1,l-1] = f[k,l]``, so
    ``g[k,k] = i f[k+1,k+1]`` on the diagonal and ``g[k,l] = (f[k,l] + i
    g[k-1,l-1]) / (l - k)`` off it (with ``g[-1, .] = g[., -1] = 0``).
    """
    _require_2d(f)
    if abs(f[(0, 0)]) > tol:
        raise NonzeroConstantTerm(f"f(0,0) = {f[(0, 0)]!r}")
    N = f.order - 2
    if N < 0:
        raise ValueError("input order must be at least 2")
    g = _kernels.jet_recursion(_dense(f), N)
    coeffs = {(k, l): g[k, l] for k in range(N + 1) for l in range(N + 1 - k) if g[k, l] != 0}
    return TruncatedSeries(1, N, coeffs)


def solve_jets_closed_form(f: TruncatedSeries, tol: float = 0.0) -> TruncatedSeries:
    """Same jets as :func:`solve_jets_recursive`, summed along each diagonal.

    With offset ``m = l - k``::

        g[k,k] = i f[k+1,k+1]
        g[0,m] = f[0,m] / m,   g[m,0] = -f[m,0] / m
        g[k,l] = sum_{j<min(k,l)} i^j f[k-j,l-j] / m^(j+1) + (i/m)^min(k,l) g[axis]

    where ``g[axis]`` is the axis coefficient reached after ``min(k, l)`` steps.
    """
    _require_2d(f)
    if abs(f[(0, 0)]) > tol:
        raise NonzeroConstantTerm(f"f(0,0) = {f[(0, 0)]!r}")
    N = f.order - 2
    out = {}
    for k in range(N + 1):
        for l in range(N + 1 - k):
            if k == l:
                val = 1j * f[(k + 1, k + 1)]
            else:
                m = l - k
                s = min(k, l)
                val = sum((1j ** j) * f[(k - j, l - j)] / m ** (j + 1) for j in range(s))
                axis = f[(0, m)] / m if m > 0 else -f[(-m, 0)] / (-m)
                val += (1j / m) ** s * axis
            if val != 0:
                out[(k, l)] = val
    return TruncatedSeries(1, N, out)


def smooth_function(poly=None, rational=(), flat=(), kernel: QuadrantKernel | None = None) -> SeparableFunction:
    """Build a 2-dimensional function from its parts.

    ``poly`` is a :class:`TruncatedSeries` or a ``{(k, l): coeff}`` mapping;
    ``rational`` holds ``(coeff, a, b, HRational)`` records; ``flat`` holds
    ``(coeff, a, b, FlatFactor)`` records.
    """
    terms = []
    if poly is not None:
        items = poly.items() if isinstance(poly, (TruncatedSeries, dict)) else poly
        for (k, l), c in items:
            terms.append(SeparableTerm(complex(c), (PairFactor(k, l),)))
    for c, a, b, rat in rational:
        terms.append(SeparableTerm(complex(c), (PairFactor(a, b, rat),)))
    for c, a, b, ff in flat:
        terms.append(SeparableTerm(complex(c), (PairFactor(a, b, HRational.one(), ff),)))
    if kernel is not None:
        terms.append(SeparableTerm(1 + 0j, (PairFactor(0, 0, HRational.one(), kernel),)))
    return SeparableFunction(1, terms)


def solve_poly_exact(f) -> SeparableFunction:
    """Closed-form solution for polynomial or rational data.

    Writing ``f = sum_m x^a y^b q_m(h)`` grouped by offset ``m = b - a``, the
    solution is ``x^a y^b q_m(h) / (m - i h)`` for ``m != 0`` and
    ``i q_0(h) / h`` on the diagonal (``q_0(0) = f(0,0)`` must vanish).
    """
    if isinstance(f, TruncatedSeries):
        f = SeparableFunction.from_series(f)
    _require_2d(f)
    if not f.pair_is_rational(1):
        raise UnsolvableFactor("solve_poly_exact only accepts polynomial/rational data")
    f = f.simplify()
    return f.solve_in_pair(1)


def symbolic_residual(g: SeparableFunction, f: SeparableFunction, j: int = 1) -> float:
    """Max canonical coefficient of ``(X_j - i h_j) g - f`` (0.0 means identically zero)."""
    return (g.cohom(j) - f).residual_max()


def _flat_terms(F) -> list:
    if isinstance(F, PairFactor):
        return [(1 + 0j, F)]
    if isinstance(F, FlatFactor):
        return [(1 + 0j, PairFactor(0, 0, HRational.one(), F))]
    if isinstance(F, SeparableFunction):
        _require_2d(F)
        out = []
        for t in F.terms:
            fac = t.factors[0]
            if fac.extra is not None and not isinstance(fac.extra, FlatFactor):
                raise UnsolvableFactor(f"homotopy integral needs flat data, got {fac.kind}")
            if fac.extra is None:
                raise UnsolvableFactor("homotopy integral needs data flat on the axes; got a rational term")
            out.append((t.coeff, fac))
        return out
    return None


def homotopy_flat_integral(F, p, tol: float = 1e-10, method: str = "auto"):
    """Evaluate ``G(p) = int_{-ln gamma(p)}^0 exp(-i h t) F(phi_t(p)) dt``.

    ``F`` is a flat pair factor / :class:`SeparableFunction` of flat terms (the
    structured class) or any vectorised callable on points ``(..., 2)``. ``p``
    may be one point or an array of points. ``G`` is 0 where ``x y = 0``.

    ``method``: ``"exact"`` uses the primitive of ``exp((m - i h) t)`` (structured
    data only), ``"quad"`` forces adaptive quadrature, ``"auto"`` picks exact
    when available.
    """
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    x, y = pts[..., 0], pts[..., 1]
    h = x * y
    off = h != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.where(off, 0.5 * np.log(np.abs(y) / np.abs(x)), 0.0)
    terms = _flat_terms(F)
    out = np.zeros(x.shape, dtype=complex)
    if terms is not None and method in ("auto", "exact", "quad"):
        for c, fac in terms:
            base = c * fac(x, y)  # F(p); F(phi_t p) = exp(m t) F(p)
            if method == "quad":
                scale = np.maximum(np.abs(base), 1e-300)
                K, err, ok = _kernels.homotopy_quad(np.where(off, h, 0.0), L, fac.offset, tol / scale)
                if not np.all(ok[off]):
                    raise QuadratureFailure("adaptive quadrature did not converge")
            else:
                K = _kernels.homotopy_exact(np.where(off, h, 0.0), L, fac.offset)
            out = out + np.where(off, base * K, 0)
    else:
        if method == "exact":
            raise UnsolvableFactor("no closed-form primitive for a generic callable")
        for idx in zip(*np.nonzero(off)):
            pt = pts[idx]
            hp = h[idx]

            def integrand(t, pt=pt, hp=hp):
                traj = flow(_MODEL_2D, 1, t, pt)
                return np.exp(-1j * hp * t) * np.asarray(F(traj), dtype=complex)

            out[idx], _ = adaptive_gk(integrand, -L[idx], 0.0, tol)
    return out[0] if single else out


def solve_full_2d(f: SeparableFunction) -> SeparableFunction:
    """Solve for polynomial/rational plus flat data (no kernel part).

    The rational part is solved in closed form; every flat term becomes a
    homotopy factor whose pointwise value is :func:`homotopy_flat_integral`.
    """
    if isinstance(f, TruncatedSeries):
        f = SeparableFunction.from_series(f)
    _require_2d(f)
    for t in f.terms:
        fac = t.factors[0]
        if fac.extra is not None and not isinstance(fac.extra, FlatFactor):
            raise UnsolvableFactor(f"solve_full_2d does not accept {fac.kind} parts")
    return f.simplify().solve_in_pair(1)


def flat_section_build(kernel: QuadrantKernel) -> SeparableFunction:
    """The function ``u`` with ``X(u) = i h u`` built from four quadrant profiles."""
    if kernel.is_zero():
        return SeparableFunction.zero(1)
    return SeparableFunction(1, (SeparableTerm(1 + 0j, (PairFactor(0, 0, HRational.one(), kernel),)),))
