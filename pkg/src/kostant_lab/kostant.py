"""Line-bundle-valued polarised forms for Williamson type ``(0, n, 0)``.

A polarised ``k``-form is stored by its coefficients ``beta(X_{i1}, ..., X_{ik})``
on strictly increasing index tuples (1-based). With ``D_j = X_j - i h_j`` the
coboundary reads::

    (d beta)(X_{i0}, ..., X_{ik}) = sum_r (-1)^r D_{ir} beta(..., hat X_{ir}, ...)

Coefficients are either truncated series (``mode="formal"``) or
:class:`SeparableFunction` values (``mode="exact"``). Solving in a pair
through a formal series costs two orders of truncation; the solvers report the
order they can guarantee.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import (
    ArityMismatch,
    DegreeOverflow,
    IndexOutOfRange,
    InvalidSpec,
    NonzeroConstantTerm,
    NotClosed,
    OrderMismatch,
    PreconditionViolated,
)
from .functions import SeparableFunction
from .series import TruncatedSeries, cohom_operator
from .verify import ResidualReport

__all__ = [
    "PolarizedForm",
    "SectionCoefficient",
    "apply_dnabla",
    "check_closed",
    "solve_pair",
    "solve_preserving",
    "solve_h1",
    "solve_top",
    "solve_h2_dim6",
    "DEFAULT_TOL",
]

FORMAL = "formal"
EXACT = "exact"
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class SectionCoefficient:
    """The function ``f`` in a section ``f * exp(i sum_j h_j)``."""

    value: object


def _mode_of(value) -> str:
    if isinstance(value, TruncatedSeries):
        return FORMAL
    if isinstance(value, SeparableFunction):
        return EXACT
    raise TypeError(f"unsupported coefficient type {type(value).__name__}")


class PolarizedForm:
    """Coefficients of a polarised ``degree``-form on ``arity`` symplectic pairs."""

    __slots__ = ("degree", "arity", "mode", "order", "_coeffs")

    def __init__(self, degree: int, arity: int, coeffs=None, mode: str | None = None, order: int | None = None):
        degree, arity = int(degree), int(arity)
        if arity < 1:
            raise ArityMismatch("arity must be positive")
        if not 0 <= degree <= arity:
            raise DegreeOverflow(f"degree {degree} outside 0..{arity}")
        coeffs = dict(coeffs or {})
        modes = {_mode_of(v) for v in coeffs.values()}
        if mode is None:
            mode = modes.pop() if len(modes) == 1 else (FORMAL if order is not None else EXACT)
            if modes:
                raise TypeError("mixed formal and exact coefficients")
        if mode not in (FORMAL, EXACT):
            raise ValueError(f"unknown mode {mode!r}")
        if modes - {mode}:
            raise TypeError(f"coefficients do not match mode {mode!r}")
        stored = {}
        for key, val in coeffs.items():
            key = tuple(int(i) for i in key)
            if len(key) != degree:
                raise ValueError(f"index tuple {key} has length {len(key)}, expected {degree}")
            if any(b <= a for a, b in zip(key, key[1:])):
                raise ValueError(f"index tuple {key} is not strictly increasing")
            if key and not (1 <= key[0] and key[-1] <= arity):
                raise IndexOutOfRange(f"index tuple {key} outside 1..{arity}")
            if val.arity != arity:
                raise ArityMismatch(f"coefficient of arity {val.arity} in a form of arity {arity}")
            if mode == FORMAL:
                if order is None:
                    order = val.order
                elif val.order != order:
                    raise OrderMismatch(f"coefficient order {val.order} vs {order}")
            stored[key] = val
        if mode == FORMAL and order is None:
            raise OrderMismatch("formal form without coefficients needs an explicit order")
        self.degree = degree
        self.arity = arity
        self.mode = mode
        self.order = order if mode == FORMAL else None
        self._coeffs = stored

    # access
    def zero_value(self, order: int | None = None):
        if self.mode == FORMAL:
            return TruncatedSeries.zero(self.arity, self.order if order is None else order)
        return SeparableFunction.zero(self.arity)

    def __getitem__(self, key) -> object:
        key = tuple(key) if not isinstance(key, int) else (key,)
        val = self._coeffs.get(key)
        return self.zero_value() if val is None else val

    def tuples(self) -> list:
        return list(combinations(range(1, self.arity + 1), self.degree))

    def items(self):
        return [(t, self[t]) for t in self.tuples()]

    def truncate(self, order: int) -> "PolarizedForm":
        if self.mode != FORMAL:
            return self
        return PolarizedForm(
            self.degree, self.arity, {k: v.truncate(order) for k, v in self._coeffs.items()}, FORMAL, order
        )

    def scale_max(self) -> float:
        vals = [_magnitude(v) for v in self._coeffs.values()]
        return max(vals, default=0.0)

    def __repr__(self):
        return f"PolarizedForm(degree={self.degree}, arity={self.arity}, mode={self.mode}, order={self.order})"


def _magnitude(v) -> float:
    return v.max_abs() if isinstance(v, TruncatedSeries) else v.scale_max()


def _residual(v) -> float:
    return v.max_abs() if isinstance(v, TruncatedSeries) else v.residual_max()


def _D(j: int, v):
    """``(X_j - i h_j) v`` in either representation."""
    if isinstance(v, TruncatedSeries):
        return cohom_operator(j, v)
    return v.cohom(j)


def _tol_for(scale: float, tol: float) -> float:
    return tol * max(1.0, scale)


def _clean(v, tol: float):
    if isinstance(v, TruncatedSeries):
        return v.chop(tol)
    return v.simplify()


def apply_dnabla(beta: PolarizedForm) -> PolarizedForm:
    """The coboundary of a ``k``-form (``k < n``) as a ``(k+1)``-form."""
    k, n = beta.degree, beta.arity
    if k >= n:
        raise DegreeOverflow(f"d of a {k}-form in arity {n}")
    out = {}
    for tup in combinations(range(1, n + 1), k + 1):
        acc = None
        for r, ir in enumerate(tup):
            src = tup[:r] + tup[r + 1:]
            if src not in beta._coeffs:
                continue
            term = _D(ir, beta._coeffs[src])
            term = term if r % 2 == 0 else -term
            acc = term if acc is None else acc + term
        if acc is not None:
            if isinstance(acc, SeparableFunction):
                acc = acc.simplify()
            out[tup] = acc
    return PolarizedForm(k + 1, n, out, beta.mode, beta.order)


def check_closed(alpha: PolarizedForm, tol: float = DEFAULT_TOL) -> ResidualReport:
    """Residual of ``d alpha``; a top-degree form is closed trivially.

    ``symbolic_max`` is the largest canonical coefficient of any component of
    ``d alpha`` (0.0 exactly when the algebra cancels completely); the
    tolerance is scaled by the size of ``alpha``.
    """
    if alpha.degree < 1:
        raise DegreeOverflow("closedness is checked for degree >= 1")
    tol_used = _tol_for(alpha.scale_max(), tol)
    if alpha.degree == alpha.arity:
        return ResidualReport("check_closed", tol_used, symbolic_max=0.0, exact_zero=True)
    d = apply_dnabla(alpha)
    worst = max((_residual(v) for v in d._coeffs.values()), default=0.0)
    return ResidualReport("check_closed", tol_used, symbolic_max=worst, exact_zero=worst == 0.0)


# ---------------------------------------------------------------- pair solvers

def _solve_pair_formal(j: int, f: TruncatedSeries, tol: float) -> TruncatedSeries:
    n, M = f.arity, f.order
    N = M - 2
    if N < 0:
        raise OrderMismatch(f"solving needs input order >= 2, got {M}")
    ix, iy = 2 * j - 2, 2 * j - 1
    groups: dict = {}
    for key, v in f.items():
        param = key[:ix] + key[iy + 1:]
        groups.setdefault(param, {})[(key[ix], key[iy])] = v
    out = {}
    for param, pair in groups.items():
        dp = sum(param)
        c00 = pair.get((0, 0), 0)
        if abs(c00) > tol:
            raise NonzeroConstantTerm(f"pair-{j} constant term {c00!r} at parameter monomial {param}")
        Np = N - dp
        if Np < 0:
            continue
        dense = np.zeros((Np + 3, Np + 3), dtype=complex)
        for (k, l), v in pair.items():
            if k + l <= Np + 2:
                dense[k, l] = v
        g = _kernels.jet_recursion(dense, Np)
        for k, l in zip(*np.nonzero(g)):
            if k + l <= Np:
                out[param[:ix] + (int(k), int(l)) + param[ix:]] = g[k, l]
    return TruncatedSeries(n, N, out)


def solve_pair(j: int, f, tol: float = 0.0):
    """Solve ``(X_j - i h_j) g = f`` in pair ``j``, other pairs as parameters.

    Formal input of order ``M`` yields order ``M - 2``. ``tol`` bounds the
    pair-``j`` constant terms accepted as zero.
    """
    if not 1 <= j <= f.arity:
        raise IndexOutOfRange(f"pair index {j} outside 1..{f.arity}")
    if isinstance(f, TruncatedSeries):
        return _solve_pair_formal(j, f, tol)
    return f.solve_in_pair(j, max(tol, DEFAULT_TOL))


def solve_preserving(j: int, f, constraints, tol: float = DEFAULT_TOL):
    """``solve_pair(j, f)`` for ``f`` with ``(X_l - i h_l) f = 0`` for ``l`` in ``constraints``.

    The solve acts termwise in pair ``j`` and commutes with ``X_l - i h_l``
    for ``l != j``, so the output satisfies the same constraints; this is
    re-checked before returning.
    """
    constraints = sorted(set(int(l) for l in constraints))
    if j in constraints:
        raise PreconditionViolated(f"pair {j} cannot be both solved and constrained")
    tol_used = _tol_for(_magnitude(f), tol)
    for l in constraints:
        res = _residual(_D(l, f))
        if res > tol_used:
            raise PreconditionViolated(f"(X_{l} - i h_{l}) f has residual {res:.3e}", residual=res)
    g = solve_pair(j, f, tol_used)
    tol_g = _tol_for(_magnitude(g), tol)
    for l in constraints:
        res = _residual(_D(l, g))
        if res > tol_g:
            raise AssertionError(f"solve in pair {j} broke constraint {l}: residual {res:.3e}")
    return g


def _truncate_to(v, order):
    if isinstance(v, TruncatedSeries) and order is not None and v.order > order:
        return v.truncate(order)
    return v


def _require_closed(alpha: PolarizedForm, tol: float):
    rep = check_closed(alpha, tol)
    if not rep.ok:
        raise NotClosed(f"d alpha has residual {rep.symbolic_max:.3e}", residual=rep.symbolic_max)


def _transport_check(f, pairs, tol: float, what: str):
    tol_used = _tol_for(_magnitude(f), tol)
    for l in pairs:
        res = _residual(_D(l, f))
        if res > tol_used:
            raise AssertionError(f"{what} fails the pair-{l} constraint: residual {res:.3e}")


def _correct(g, alpha_k, k: int, done: list, tol: float):
    """One step of the sequential scheme: make ``g`` solve the pair-``k`` equation too."""
    f = _D(k, g) - _truncate_to(alpha_k, getattr(g, "order", None))
    if isinstance(f, SeparableFunction):
        f = f.simplify()
    _transport_check(f, done, tol, f"intermediate datum for pair {k}")
    scale = max(_magnitude(g), _magnitude(alpha_k))
    if isinstance(f, TruncatedSeries):
        # formal kernel is trivial: the datum must vanish up to rounding
        if f.max_abs() > _tol_for(scale, tol):
            raise AssertionError(f"formal intermediate datum for pair {k} is {f.max_abs():.3e}, expected 0")
        f = f.chop(_tol_for(scale, tol))
    g_tilde = solve_preserving(k, f, done, tol)
    return _truncate_to(g, getattr(g_tilde, "order", None)) - g_tilde


def solve_h1(alpha: PolarizedForm, tol: float = DEFAULT_TOL) -> SectionCoefficient:
    """Primitive ``g`` of a closed 1-form: ``(X_j - i h_j) g = alpha(X_j)`` for all ``j``.

    Pair 1 is solved first; each further pair ``k`` is fixed by subtracting a
    solution of the residual datum that keeps pairs ``1..k-1`` untouched.
    Formal input of order ``N`` gives order ``N - 2n``.
    """
    if alpha.degree != 1:
        raise DegreeOverflow(f"solve_h1 needs a 1-form, got degree {alpha.degree}")
    _require_closed(alpha, tol)
    scale_tol = _tol_for(alpha.scale_max(), tol)
    g = solve_pair(1, alpha[(1,)], scale_tol)
    for k in range(2, alpha.arity + 1):
        g = _correct(g, alpha[(k,)], k, list(range(1, k)), tol)
    return SectionCoefficient(_clean(g, 0.0))


def solve_top(alpha: PolarizedForm, tol: float = DEFAULT_TOL) -> PolarizedForm:
    """``beta`` with ``iota_{X_1} beta = 0`` and ``d beta = alpha`` for a top-degree ``alpha``.

    Only ``beta(X_2, ..., X_n)`` is nonzero; it solves
    ``(X_1 - i h_1) beta(X_2, ..., X_n) = alpha(X_1, ..., X_n)``.
    """
    n = alpha.arity
    if alpha.degree != n:
        raise DegreeOverflow(f"solve_top needs degree {n}, got {alpha.degree}")
    top = tuple(range(1, n + 1))
    b = solve_pair(1, alpha[top], _tol_for(alpha.scale_max(), tol))
    order = getattr(b, "order", None)
    return PolarizedForm(n - 1, n, {top[1:]: b}, alpha.mode, order)


def solve_h2_dim6(alpha: PolarizedForm, tol: float = DEFAULT_TOL) -> PolarizedForm:
    """``beta`` with ``d beta = alpha`` for a closed 2-form in arity 3.

    Takes ``beta(X_1) = 0``; ``beta(X_2)`` solves the (1,2) equation in pair 1;
    ``beta(X_3)`` solves the pair-1 and pair-2 equations left over, by the
    sequential scheme. Formal input of order ``N`` gives order ``N - 4``.
    """
    if alpha.arity != 3:
        raise InvalidSpec(f"solve_h2_dim6 needs arity 3, got {alpha.arity}")
    if alpha.degree != 2:
        raise DegreeOverflow(f"solve_h2_dim6 needs a 2-form, got degree {alpha.degree}")
    _require_closed(alpha, tol)
    scale_tol = _tol_for(alpha.scale_max(), tol)
    b2 = solve_pair(1, alpha[(1, 2)], scale_tol)
    order = getattr(b2, "order", None)
    g13 = solve_pair(1, alpha[(1, 3)], scale_tol)
    f23 = _truncate_to(alpha[(2, 3)], order) + _D(3, b2)
    b3 = _correct(g13, f23, 2, [1], tol)
    order = getattr(b3, "order", None)
    b2 = _truncate_to(b2, order) if order is not None else b2
    out = {(2,): _clean(b2, 0.0), (3,): _clean(b3, 0.0)}
    return PolarizedForm(1, 3, out, alpha.mode, order)
