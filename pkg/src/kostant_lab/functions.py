"""Explicitly evaluable function classes for the exact/smooth regime.

Every function is a finite sum of products over symplectic pairs. A pair
factor has the shape ``x^a y^b R(h) E`` where ``h = x y``, ``R`` is a
rational function of ``h`` whose denominator is a product of ``(m - i h)``
with nonzero integers ``m`` (never vanishing for real ``h``), and ``E`` is
one of

* ``None`` (the factor is a rational term),
* :class:`FlatFactor` ``exp(-c/h^2)``,
* :class:`QuadrantKernel`, a solution of ``X(u) = i h u`` built from four
  flat one-variable profiles,
* :class:`FlatHomotopy`, ``exp(-c/h^2)`` times the homotopy integral
  ``K_m = int_{-ln gamma}^0 exp((m - i h) t) dt``.

The key algebraic facts used throughout are ``X(h) = 0``,
``X(x^a y^b) = (b - a) x^a y^b``, ``X(K_m) = (i h - m) K_m + 1`` and
``X(E) = i h E`` for a quadrant kernel.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from itertools import product as iproduct

import numpy as np
from numpy.polynomial import polynomial as P

from . import _kernels
from .errors import ArityMismatch, IndexOutOfRange, NonzeroConstantTerm, UnsolvableFactor
from .series import TruncatedSeries

__all__ = [
    "HRational",
    "FlatFactor",
    "QuadrantKernel",
    "FlatHomotopy",
    "PairFactor",
    "SeparableTerm",
    "SeparableFunction",
]


def _strip(coeffs) -> tuple:
    c = [complex(v) for v in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _pmul(p, q) -> tuple:
    if not p or not q:
        return ()
    return _strip(P.polymul(np.asarray(p, complex), np.asarray(q, complex)))


def _padd(p, q) -> tuple:
    if not p:
        return tuple(q)
    if not q:
        return tuple(p)
    return _strip(P.polyadd(np.asarray(p, complex), np.asarray(q, complex)))


def _linear_pow(m: int, e: int) -> tuple:
    out = (1 + 0j,)
    for _ in range(e):
        out = _pmul(out, (complex(m), -1j))
    return out


@dataclass(frozen=True)
class HRational:
    """``num(h) / prod (m - i h)^e``; ``num`` ascending, ``den`` sorted ``(m, e)``."""

    num: tuple = ()
    den: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "num", _strip(self.num))
        den = {}
        for m, e in self.den:
            m, e = int(m), int(e)
            if m == 0:
                raise ValueError("denominator factor (0 - i h) would vanish at h = 0")
            if e > 0:
                den[m] = den.get(m, 0) + e
        object.__setattr__(self, "den", tuple(sorted(den.items())))

    @classmethod
    def one(cls):
        return cls((1.0,))

    @classmethod
    def power(cls, k: int, c: complex = 1.0):
        return cls((0,) * k + (c,))

    def is_zero(self) -> bool:
        return not self.num

    def scale(self, c: complex) -> "HRational":
        return HRational(tuple(c * v for v in self.num), self.den)

    def mul_h(self, k: int = 1) -> "HRational":
        if k == 0 or not self.num:
            return self
        return HRational((0,) * k + self.num, self.den)

    def mul_linear(self, m: int) -> "HRational":
        """Multiply by ``(m - i h)``, cancelling against the denominator when possible."""
        if m == 0:
            return HRational(tuple(-1j * v for v in self.num), self.den).mul_h()
        den = dict(self.den)
        if den.get(m, 0) > 0:
            den[m] -= 1
            return HRational(self.num, tuple(den.items()))
        return HRational(_pmul(self.num, (complex(m), -1j)), self.den)

    def div_linear(self, m: int) -> "HRational":
        return HRational(self.num, self.den + ((m, 1),))

    def div_h(self, tol: float = 0.0) -> "HRational":
        """Exact division by ``h``; the numerator must vanish at ``h = 0``."""
        if not self.num:
            return self
        scale = max(abs(v) for v in self.num)
        if abs(self.num[0]) > tol * scale:
            raise NonzeroConstantTerm(f"value {self.value_at_zero()!r} at h = 0 is not divisible by h")
        return HRational(self.num[1:], self.den)

    def value_at_zero(self) -> complex:
        if not self.num:
            return 0j
        d = 1.0
        for m, e in self.den:
            d *= m ** e
        return self.num[0] / d

    def __mul__(self, other: "HRational") -> "HRational":
        return HRational(_pmul(self.num, other.num), self.den + other.den)

    def numerator_over(self, den: dict) -> tuple:
        """Numerator after rewriting over the (multiple) denominator ``den``."""
        out = self.num
        mine = dict(self.den)
        for m, e in den.items():
            extra = e - mine.get(m, 0)
            if extra < 0:
                raise ValueError("target denominator is not a multiple")
            if extra:
                out = _pmul(out, _linear_pow(m, extra))
        return out

    def __add__(self, other: "HRational") -> "HRational":
        if not self.num:
            return other
        if not other.num:
            return self
        den = dict(self.den)
        for m, e in other.den:
            den[m] = max(den.get(m, 0), e)
        num = _padd(self.numerator_over(den), other.numerator_over(den))
        return HRational(num, tuple(den.items()))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        if not self.num:
            return np.zeros(h.shape, dtype=complex)
        val = P.polyval(h, np.asarray(self.num, complex))
        for m, e in self.den:
            val = val / (m - 1j * h) ** e
        return val

    def taylor(self, order: int) -> np.ndarray:
        """Coefficients of the expansion in ``h`` through ``h^order``."""
        out = np.zeros(order + 1, dtype=complex)
        n = min(len(self.num), order + 1)
        out[:n] = self.num[:n]
        for m, e in self.den:
            # (m - i h)^(-e) = m^(-e) sum_k C(e+k-1, k) (i h / m)^k
            ser = np.array(
                [math.comb(e + k - 1, k) * (1j / m) ** k for k in range(order + 1)], dtype=complex
            ) / m ** e
            out = P.polymul(out, ser)[: order + 1]
        res = np.zeros(order + 1, dtype=complex)
        res[: len(out)] = out
        return res


def _flat_profile(c: float, pre: tuple, z):
    z = np.asarray(z, dtype=float)
    safe = np.where(z == 0, 1.0, z)
    val = np.exp(-c / (safe * safe)) * P.polyval(z, np.asarray(pre, complex))
    return np.where(z == 0, 0j, val)


@dataclass(frozen=True)
class FlatFactor:
    """``z -> pre(z) exp(-c/z^2)`` (zero at ``z = 0``), applied at ``z = h``."""

    c: float
    pre: tuple = (1.0,)

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("flat factor rate c must be positive")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "pre", _strip(self.pre) or (0j,))

    def __call__(self, z):
        return _flat_profile(self.c, self.pre, z)


@dataclass(frozen=True)
class QuadrantKernel:
    """Four flat profiles ``a_1..a_4``, one per open quadrant (``None`` = zero).

    Quadrants follow the order (x>0,y>0), (x>0,y<0), (x<0,y>0), (x<0,y<0). In
    quadrant ``q`` the function is ``a_q(h) exp((i/2) h ln|y/x|)``; it vanishes
    on the axes and solves ``X(u) = i h u``.
    """

    parts: tuple = (None, None, None, None)

    def __post_init__(self):
        if len(self.parts) != 4:
            raise ValueError("a quadrant kernel needs exactly four profiles")

    def is_zero(self) -> bool:
        return all(p is None or all(v == 0 for v in p.pre) for p in self.parts)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = x * y
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        off_axes = h != 0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            phase = np.exp(0.5j * h * np.log(np.abs(y) / np.abs(x)))
        phase = np.where(off_axes, phase, 0)
        masks = ((x > 0) & (y > 0), (x > 0) & (y < 0), (x < 0) & (y > 0), (x < 0) & (y < 0))
        for prof, mask in zip(self.parts, masks):
            if prof is None:
                continue
            out = np.where(mask, prof(h) * phase, out)
        return out


@dataclass(frozen=True)
class FlatHomotopy:
    """``exp(-c/h^2) * K_m`` with ``K_m = int_{-ln gamma}^0 exp((m - i h) t) dt``."""

    c: float
    m: int

    def __call__(self, x, y, method: str = "exact", tol: float = 1e-10):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        h = x * y
        off = h != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            L = np.where(off, 0.5 * np.log(np.abs(y) / np.abs(x)), 0.0)
        flat = _flat_profile(self.c, (1.0,), h)
        if method == "exact":
            K = _kernels.homotopy_exact(np.where(off, h, 0.0), L, self.m)
        else:
            K, _, _ = _kernels.homotopy_quad(np.where(off, h, 0.0), L, self.m, tol)
        return np.where(off, flat * K, 0j)


@dataclass(frozen=True)
class PairFactor:
    """``x^a y^b R(h) E`` in one symplectic pair; normalised so ``min(a, b) = 0``."""

    a: int = 0
    b: int = 0
    rat: HRational = field(default_factory=HRational.one)
    extra: object = None

    def __post_init__(self):
        a, b = int(self.a), int(self.b)
        if a < 0 or b < 0:
            raise ValueError("negative exponent")
        s = min(a, b)
        rat = self.rat.mul_h(s) if s else self.rat
        extra = self.extra
        if isinstance(extra, FlatFactor) and extra.pre != (1 + 0j,):
            rat = rat * HRational(extra.pre)
            extra = FlatFactor(extra.c)
        if isinstance(extra, QuadrantKernel) and extra.is_zero():
            rat = HRational()
            extra = None
        object.__setattr__(self, "a", a - s)
        object.__setattr__(self, "b", b - s)
        object.__setattr__(self, "rat", rat)
        object.__setattr__(self, "extra", extra)

    @property
    def offset(self) -> int:
        return self.b - self.a

    def is_zero(self) -> bool:
        return self.rat.is_zero()

    @property
    def kind(self) -> str:
        e = self.extra
        if e is None:
            return "rational"
        if isinstance(e, FlatFactor):
            return "flat"
        if isinstance(e, QuadrantKernel):
            return "kernel"
        return "homotopy"

    def with_rat(self, rat: HRational) -> "PairFactor":
        return replace(self, a=self.a, b=self.b, rat=rat)

    def mul_h(self) -> "PairFactor":
        return self.with_rat(self.rat.mul_h())

    def __call__(self, x, y, **kw):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        val = (x ** self.a) * (y ** self.b) * self.rat(x * y)
        e = self.extra
        if e is None:
            return val
        if isinstance(e, FlatFactor):
            return val * e(x * y)
        if isinstance(e, FlatHomotopy):
            return val * e(x, y, **kw)
        return val * e(x, y)

    def apply_X(self) -> list:
        """``X(self)`` as a list of ``(coeff, PairFactor)``."""
        m = self.offset
        out = [(complex(m), self)] if m else []
        if isinstance(self.extra, QuadrantKernel):
            out.append((1j, self.mul_h()))
        elif isinstance(self.extra, FlatHomotopy):
            hom = self.extra
            if hom.m:
                out.append((complex(-hom.m), self))
            out.append((1j, self.mul_h()))
            out.append((1 + 0j, PairFactor(self.a, self.b, self.rat, FlatFactor(hom.c))))
        return out

    def cohom(self) -> list:
        """``(X - i h)(self)`` as a list of ``(coeff, PairFactor)``."""
        m = self.offset
        e = self.extra
        if e is None or isinstance(e, FlatFactor):
            return [(1 + 0j, self.with_rat(self.rat.mul_linear(m)))]
        if isinstance(e, QuadrantKernel):
            return [(complex(m), self)] if m else []
        out = [(complex(m - e.m), self)] if m != e.m else []
        out.append((1 + 0j, PairFactor(self.a, self.b, self.rat, FlatFactor(e.c))))
        return out

    def solve(self, tol: float = 1e-12) -> list:
        """A particular solution of ``(X - i h) g = self`` as ``(coeff, PairFactor)`` list."""
        m = self.offset
        e = self.extra
        if e is None:
            if m:
                return [(1 + 0j, self.with_rat(self.rat.div_linear(m)))]
            return [(1j, self.with_rat(self.rat.div_h(tol)))]
        if isinstance(e, FlatFactor):
            return [(1 + 0j, PairFactor(self.a, self.b, self.rat, FlatHomotopy(e.c, m)))]
        if isinstance(e, QuadrantKernel):
            if m:
                return [(1.0 / m, self)]
            raise UnsolvableFactor("kernel factor with zero offset has no smooth preimage")
        if m != e.m:
            return [(1.0 / (m - e.m), PairFactor(self.a, self.b, self.rat, e))] + [
                (-c / (m - e.m), f) for c, f in PairFactor(self.a, self.b, self.rat, FlatFactor(e.c)).solve(tol)
            ]
        raise UnsolvableFactor("homotopy factor with matching offset has no representable preimage")

    def taylor(self, order: int) -> dict:
        """Jet at the origin as ``{(k, l): coeff}``; flat classes contribute nothing."""
        if self.extra is not None or self.rat.is_zero():
            return {}
        base = self.a + self.b
        if base > order:
            return {}
        coeffs = self.rat.taylor((order - base) // 2)
        return {
            (self.a + s, self.b + s): c for s, c in enumerate(coeffs) if c != 0 and base + 2 * s <= order
        }


@dataclass(frozen=True)
class SeparableTerm:
    coeff: complex
    factors: tuple

    def signature(self) -> tuple:
        return tuple((f.a, f.b, f.extra) for f in self.factors)


def _unit(arity: int) -> tuple:
    return tuple(PairFactor() for _ in range(arity))


class SeparableFunction:
    """Finite sum of products of pair factors over ``n`` symplectic pairs."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms=()):
        self.arity = int(arity)
        kept = []
        for t in terms:
            if len(t.factors) != self.arity:
                raise ArityMismatch(f"term with {len(t.factors)} factors in arity {self.arity}")
            if t.coeff != 0 and not any(f.is_zero() for f in t.factors):
                kept.append(t)
        self.terms = tuple(kept)

    # constructors
    @classmethod
    def zero(cls, arity: int):
        return cls(arity, ())

    @classmethod
    def constant(cls, arity: int, c: complex = 1.0):
        return cls(arity, (SeparableTerm(complex(c), _unit(arity)),))

    @classmethod
    def monomial(cls, exponents, c: complex = 1.0):
        exps = tuple(int(e) for e in exponents)
        if len(exps) % 2:
            raise ValueError("exponent tuple must have even length")
        arity = len(exps) // 2
        facs = tuple(PairFactor(exps[2 * j], exps[2 * j + 1]) for j in range(arity))
        return cls(arity, (SeparableTerm(complex(c), facs),))

    @classmethod
    def from_series(cls, s: TruncatedSeries) -> "SeparableFunction":
        terms = []
        for key, c in sorted(s.items()):
            facs = tuple(PairFactor(key[2 * j], key[2 * j + 1]) for j in range(s.arity))
            terms.append(SeparableTerm(c, facs))
        return cls(s.arity, terms)

    @classmethod
    def from_factor(cls, arity: int, j: int, factor: PairFactor, c: complex = 1.0):
        _check_pair(arity, j)
        facs = list(_unit(arity))
        facs[j - 1] = factor
        return cls(arity, (SeparableTerm(complex(c), tuple(facs)),))

    # algebra
    def _same(self, other):
        if not isinstance(other, SeparableFunction):
            raise TypeError(f"expected SeparableFunction, got {type(other).__name__}")
        if other.arity != self.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")

    def __add__(self, other):
        self._same(other)
        return SeparableFunction(self.arity, self.terms + other.terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: complex) -> "SeparableFunction":
        return SeparableFunction(self.arity, (replace(t, coeff=c * t.coeff) for t in self.terms))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        self._same(other)
        out = []
        for s, t in iproduct(self.terms, other.terms):
            facs = []
            for f, g in zip(s.factors, t.factors):
                if f.extra is not None and g.extra is not None:
                    raise UnsolvableFactor("product of two non-rational factors in one pair")
                facs.append(PairFactor(f.a + g.a, f.b + g.b, f.rat * g.rat, f.extra or g.extra))
            out.append(SeparableTerm(s.coeff * t.coeff, tuple(facs)))
        return SeparableFunction(self.arity, out)

    __rmul__ = __mul__

    def _map_pair(self, j: int, fn) -> "SeparableFunction":
        _check_pair(self.arity, j)
        out = []
        for t in self.terms:
            for c, f in fn(t.factors[j - 1]):
                facs = list(t.factors)
                facs[j - 1] = f
                out.append(SeparableTerm(c * t.coeff, tuple(facs)))
        return SeparableFunction(self.arity, out)

    def apply_X(self, j: int) -> "SeparableFunction":
        return self._map_pair(j, PairFactor.apply_X)

    def mul_h(self, j: int) -> "SeparableFunction":
        return self._map_pair(j, lambda f: [(1 + 0j, f.mul_h())])

    def cohom(self, j: int) -> "SeparableFunction":
        """``(X_j - i h_j)`` applied termwise."""
        return self._map_pair(j, PairFactor.cohom).simplify()

    def solve_in_pair(self, j: int, tol: float = 1e-12) -> "SeparableFunction":
        """Termwise particular solution of ``(X_j - i h_j) g = self``; other pairs are parameters."""
        return self._map_pair(j, lambda f: f.solve(tol)).simplify()

    def simplify(self) -> "SeparableFunction":
        """Merge terms that differ only in one pair's rational part."""
        terms = list(self.terms)
        for j in range(self.arity):
            groups: dict = {}
            order = []
            for t in terms:
                f = t.factors[j]
                key = (t.factors[:j], t.factors[j + 1:], f.a, f.b, f.extra)
                if key not in groups:
                    groups[key] = HRational()
                    order.append(key)
                groups[key] = groups[key] + f.rat.scale(t.coeff)
            terms = []
            for key in order:
                rat = groups[key]
                if rat.is_zero():
                    continue
                left, right, a, b, extra = key
                mid = PairFactor(a, b, rat, extra)
                terms.append(SeparableTerm(1 + 0j, left + (mid,) + right))
        return SeparableFunction(self.arity, terms)

    def residual_max(self) -> float:
        """Max coefficient of the canonical numerator; 0.0 iff the function is identically zero."""
        groups = defaultdict(list)
        for t in self.terms:
            groups[t.signature()].append(t)
        worst = 0.0
        for members in groups.values():
            lcms = [dict() for _ in range(self.arity)]
            for t in members:
                for j, f in enumerate(t.factors):
                    for m, e in f.rat.den:
                        lcms[j][m] = max(lcms[j].get(m, 0), e)
            tensors = []
            shape = [1] * self.arity
            for t in members:
                arr = np.array(t.coeff, dtype=complex)
                for j, f in enumerate(t.factors):
                    num = np.asarray(f.rat.numerator_over(lcms[j]) or (0j,), complex)
                    shape[j] = max(shape[j], len(num))
                    arr = np.multiply.outer(arr, num)
                tensors.append(arr)
            total = np.zeros(shape, dtype=complex)
            for arr in tensors:
                total[tuple(slice(0, s) for s in arr.shape)] += arr
            worst = max(worst, float(np.max(np.abs(total))) if total.size else 0.0)
        return worst

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.residual_max() <= tol

    def scale_max(self) -> float:
        """Largest coefficient magnitude in the stored representation (a size for relative tests)."""
        best = 0.0
        for t in self.terms:
            mag = abs(t.coeff)
            for f in t.factors:
                mag *= max((abs(v) for v in f.rat.num), default=0.0)
            best = max(best, mag)
        return best

    def has_transcendental(self) -> bool:
        return any(f.extra is not None for t in self.terms for f in t.factors)

    def pair_is_rational(self, j: int) -> bool:
        return all(t.factors[j - 1].extra is None for t in self.terms)

    def __call__(self, points, **kw):
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != 2 * self.arity:
            raise ArityMismatch(f"points of width {pts.shape[-1]} for arity {self.arity}")
        out = np.zeros(pts.shape[:-1], dtype=complex)
        for t in self.terms:
            val = np.full(pts.shape[:-1], t.coeff, dtype=complex)
            for j, f in enumerate(t.factors):
                val = val * f(pts[..., 2 * j], pts[..., 2 * j + 1], **kw)
            out = out + val
        return out

    def taylor(self, order: int) -> TruncatedSeries:
        out: dict = {}
        for t in self.terms:
            per_pair = [f.taylor(order) for f in t.factors]
            if any(not d for d in per_pair):
                continue
            for combo in iproduct(*(list(d.items()) for d in per_pair)):
                deg = sum(k + l for (k, l), _ in combo)
                if deg > order:
                    continue
                key = tuple(e for (kl, _) in combo for e in kl)
                val = t.coeff
                for _, c in combo:
                    val *= c
                out[key] = out.get(key, 0) + val
        return TruncatedSeries(self.arity, order, out)

    def __repr__(self):
        return f"SeparableFunction(arity={self.arity}, terms={len(self.terms)})"


def _check_pair(arity: int, j: int):
    if not 1 <= j <= arity:
        raise IndexOutOfRange(f"pair index {j} outside 1..{arity}")
