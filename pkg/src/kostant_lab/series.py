"""Truncated multivariate power series in (x_1, y_1, ..., x_n, y_n).

A :class:`TruncatedSeries` stores complex coefficients keyed by exponent
tuples ``(k_1, l_1, ..., k_n, l_n)``; ``k_j`` is the ``x_j`` exponent and
``l_j`` the ``y_j`` exponent. Pair indices ``j`` in the public functions are
1-based, matching the usual labelling of the vector fields ``X_1, ..., X_n``.
"""
from __future__ import annotations

import cmath
from collections.abc import Iterable, Mapping
from types import MappingProxyType

from .errors import ArityMismatch, IndexOutOfRange, OrderMismatch

__all__ = [
    "TruncatedSeries",
    "series_ring_ops",
    "apply_X",
    "mul_h",
    "cohom_operator",
]


def _check_scalar(c: complex) -> complex:
    c = complex(c)
    if not (cmath.isfinite(c)):
        raise ValueError(f"non-finite coefficient {c!r}")
    return c


class TruncatedSeries:
    """Immutable truncated power series with complex coefficients.

    Parameters
    ----------
    arity : int
        Number of symplectic pairs ``n``; exponent tuples have length ``2n``.
    order : int
        Truncation order ``N``; monomials of total degree above ``N`` are dropped.
    coeffs : mapping, optional
        Exponent tuple -> coefficient. Zero coefficients are pruned.
    """

    __slots__ = ("arity", "order", "_coeffs")

    def __init__(self, arity: int, order: int, coeffs: Mapping | None = None, *, _trusted=False):
        if arity < 1:
            raise ValueError("arity must be positive")
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.arity = int(arity)
        self.order = int(order)
        if _trusted:
            store = {k: v for k, v in coeffs.items() if v != 0}
        else:
            store = {}
            width = 2 * self.arity
            for key, val in (coeffs or {}).items():
                key = tuple(int(e) for e in key)
                if len(key) != width or min(key) < 0:
                    raise ValueError(f"bad exponent tuple {key} for arity {arity}")
                if sum(key) > self.order:
                    continue
                val = _check_scalar(val)
                if val != 0:
                    store[key] = store.get(key, 0) + val
            store = {k: v for k, v in store.items() if v != 0}
        self._coeffs = MappingProxyType(store)

    # construction helpers
    @classmethod
    def zero(cls, arity: int, order: int) -> "TruncatedSeries":
        return cls(arity, order, {}, _trusted=True)

    @classmethod
    def monomial(cls, arity: int, order: int, exponents: Iterable[int], coeff: complex = 1.0):
        return cls(arity, order, {tuple(exponents): coeff})

    @classmethod
    def constant(cls, arity: int, order: int, value: complex = 1.0):
        return cls(arity, order, {(0,) * (2 * arity): value})

    @classmethod
    def hamiltonian(cls, arity: int, order: int, j: int) -> "TruncatedSeries":
        """The hyperbolic component ``h_j = x_j y_j``."""
        _check_pair(arity, j)
        e = [0] * (2 * arity)
        e[2 * j - 2] = e[2 * j - 1] = 1
        return cls(arity, order, {tuple(e): 1.0})

    @property
    def coeffs(self) -> Mapping:
        return self._coeffs

    def __getitem__(self, exponents) -> complex:
        return self._coeffs.get(tuple(exponents), 0j)

    def items(self):
        return self._coeffs.items()

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self._coeffs.values())

    def max_abs(self) -> float:
        return max((abs(v) for v in self._coeffs.values()), default=0.0)

    def degree(self) -> int:
        """Largest total degree carrying a nonzero coefficient (-1 for zero)."""
        return max((sum(k) for k in self._coeffs), default=-1)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderMismatch(f"cannot raise truncation order {self.order} -> {order}")
        return TruncatedSeries(
            self.arity, order,
            {k: v for k, v in self._coeffs.items() if sum(k) <= order}, _trusted=True,
        )

    def chop(self, tol: float) -> "TruncatedSeries":
        """Drop coefficients with modulus at most ``tol``."""
        return TruncatedSeries(
            self.arity, self.order,
            {k: v for k, v in self._coeffs.items() if abs(v) > tol}, _trusted=True,
        )

    # arithmetic
    def _compatible(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.arity != self.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")
        if other.order != self.order:
            raise OrderMismatch(f"order {self.order} vs {other.order}")

    def __add__(self, other):
        self._compatible(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0) + v
        return TruncatedSeries(self.arity, self.order, out, _trusted=True)

    def __sub__(self, other):
        self._compatible(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0) - v
        return TruncatedSeries(self.arity, self.order, out, _trusted=True)

    def __neg__(self):
        return TruncatedSeries(
            self.arity, self.order, {k: -v for k, v in self._coeffs.items()}, _trusted=True
        )

    def scale(self, c: complex) -> "TruncatedSeries":
        c = _check_scalar(c)
        return TruncatedSeries(
            self.arity, self.order, {k: c * v for k, v in self._coeffs.items()}, _trusted=True
        )

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if other.arity != self.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")
        order = min(self.order, other.order)
        out: dict = {}
        b_items = [(k, sum(k), v) for k, v in other._coeffs.items()]
        for ka, va in self._coeffs.items():
            da = sum(ka)
            if da > order:
                continue
            for kb, db, vb in b_items:
                if da + db > order:
                    continue
                key = tuple(p + q for p, q in zip(ka, kb))
                out[key] = out.get(key, 0) + va * vb
        return TruncatedSeries(self.arity, order, out, _trusted=True)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.order == other.order
            and dict(self._coeffs) == dict(other._coeffs)
        )

    def __hash__(self):
        return hash((self.arity, self.order, frozenset(self._coeffs.items())))

    def __repr__(self):
        if not self._coeffs:
            body = "0"
        else:
            body = " + ".join(f"({v:.6g})*{_mono_str(k)}" for k, v in sorted(self._coeffs.items()))
        return f"TruncatedSeries(n={self.arity}, N={self.order}: {body})"


def _mono_str(key) -> str:
    parts = []
    for idx, e in enumerate(key):
        if e:
            name = ("x", "y")[idx % 2] + str(idx // 2 + 1)
            parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) or "1"


def _check_pair(arity: int, j: int):
    if not 1 <= j <= arity:
        raise IndexOutOfRange(f"pair index {j} outside 1..{arity}")


def series_ring_ops(a: TruncatedSeries, b: TruncatedSeries | None, op: str, c: complex | None = None):
    """Dispatch ``add``, ``sub``, ``mul`` or ``scale`` (``c`` required)."""
    if op == "scale":
        return a.scale(c)
    if b is None:
        raise TypeError(f"operation {op!r} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if a.order != b.order:
            raise OrderMismatch(f"order {a.order} vs {b.order}")
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def apply_X(j: int, f: TruncatedSeries) -> TruncatedSeries:
    """Apply ``X_j = -x_j d/dx_j + y_j d/dy_j``; scales each monomial by ``l_j - k_j``."""
    _check_pair(f.arity, j)
    ix, iy = 2 * j - 2, 2 * j - 1
    out = {k: (k[iy] - k[ix]) * v for k, v in f.items() if k[iy] != k[ix]}
    return TruncatedSeries(f.arity, f.order, out, _trusted=True)


def mul_h(j: int, f: TruncatedSeries) -> TruncatedSeries:
    """Multiply by ``h_j = x_j y_j``, discarding terms beyond the order."""
    _check_pair(f.arity, j)
    ix, iy = 2 * j - 2, 2 * j - 1
    out = {}
    for k, v in f.items():
        if sum(k) + 2 > f.order:
            continue
        key = list(k)
        key[ix] += 1
        key[iy] += 1
        out[tuple(key)] = v
    return TruncatedSeries(f.arity, f.order, out, _trusted=True)


def cohom_operator(j: int, f: TruncatedSeries) -> TruncatedSeries:
    """``g -> X_j(g) - i h_j g`` in the truncated algebra."""
    return apply_X(j, f) - mul_h(j, f).scale(1j)
