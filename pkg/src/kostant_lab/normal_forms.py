"""Williamson normal forms: model Hamiltonians, their vector fields and flows.

Coordinates are ordered ``(x_1, y_1, ..., x_n, y_n)`` and the symplectic form
is ``sum dx_i ^ dy_i``. Blocks are laid out elliptic first, then hyperbolic,
then focus-focus pairs. Component indices ``j`` are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import IndexOutOfRange, InvalidSpec, UndefinedOnAxes
from .series import TruncatedSeries

__all__ = [
    "WilliamsonSpec",
    "Block",
    "ModelSystem",
    "build_model",
    "flow",
    "log_gamma",
    "connection_potential",
    "apply_field",
]

ELLIPTIC, HYPERBOLIC, FOCUS_FOCUS = "elliptic", "hyperbolic", "focus-focus"


@dataclass(frozen=True)
class WilliamsonSpec:
    ke: int = 0
    kh: int = 0
    kf: int = 0

    def __post_init__(self):
        if min(self.ke, self.kh, self.kf) < 0:
            raise InvalidSpec(f"negative block count in {self}")
        if self.n < 1:
            raise InvalidSpec("Williamson type must have at least one component")

    @property
    def n(self) -> int:
        return self.ke + self.kh + 2 * self.kf

    @property
    def purely_hyperbolic(self) -> bool:
        return self.ke == 0 and self.kf == 0


@dataclass(frozen=True)
class Block:
    kind: str
    indices: tuple  # 1-based component indices covered by the block


@dataclass(frozen=True)
class ModelSystem:
    spec: WilliamsonSpec
    blocks: tuple

    @property
    def n(self) -> int:
        return self.spec.n

    def block_of(self, j: int) -> Block:
        if not 1 <= j <= self.n:
            raise IndexOutOfRange(f"component {j} outside 1..{self.n}")
        for b in self.blocks:
            if j in b.indices:
                return b
        raise AssertionError("blocks do not cover all components")

    def kind(self, j: int) -> str:
        return self.block_of(j).kind

    @cached_property
    def field_matrices(self) -> tuple:
        """Matrices ``A_j`` with ``X_j(p) = A_j p`` (all catalog fields are linear)."""
        return tuple(_field_matrix(self, j) for j in range(1, self.n + 1))

    def field_matrix(self, j: int) -> np.ndarray:
        self.block_of(j)
        return self.field_matrices[j - 1]

    def vector_field(self, j: int, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return p @ self.field_matrix(j).T

    def hamiltonian(self, j: int, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        b = self.block_of(j)
        if b.kind == ELLIPTIC:
            x, y = _pair(p, j)
            return x * x + y * y
        if b.kind == HYPERBOLIC:
            x, y = _pair(p, j)
            return x * y
        i = b.indices[0]
        xi, yi = _pair(p, i)
        xk, yk = _pair(p, i + 1)
        if j == i:
            return xi * yi + xk * yk
        return xi * yk - xk * yi


def _pair(p: np.ndarray, j: int):
    return p[..., 2 * j - 2], p[..., 2 * j - 1]


def _field_matrix(model: ModelSystem, j: int) -> np.ndarray:
    n2 = 2 * model.n
    A = np.zeros((n2, n2))
    b = model.block_of(j)
    ix, iy = 2 * j - 2, 2 * j - 1
    if b.kind == ELLIPTIC:
        # X = 2(-y d/dx + x d/dy)
        A[ix, iy] = -2.0
        A[iy, ix] = 2.0
    elif b.kind == HYPERBOLIC:
        A[ix, ix] = -1.0
        A[iy, iy] = 1.0
    else:
        i = b.indices[0]
        xi, yi, xk, yk = 2 * i - 2, 2 * i - 1, 2 * i, 2 * i + 1
        if j == i:
            A[xi, xi] = A[xk, xk] = -1.0
            A[yi, yi] = A[yk, yk] = 1.0
        else:
            # -x_i d/dx_{i+1} + y_{i+1} d/dy_i + x_{i+1} d/dx_i - y_i d/dy_{i+1}
            A[xk, xi] = -1.0
            A[yi, yk] = 1.0
            A[xi, xk] = 1.0
            A[yk, yi] = -1.0
    return A


def build_model(spec: WilliamsonSpec) -> ModelSystem:
    """Assemble the Williamson model for ``spec``."""
    if not isinstance(spec, WilliamsonSpec):
        spec = WilliamsonSpec(*spec)
    blocks = []
    j = 1
    for _ in range(spec.ke):
        blocks.append(Block(ELLIPTIC, (j,)))
        j += 1
    for _ in range(spec.kh):
        blocks.append(Block(HYPERBOLIC, (j,)))
        j += 1
    for _ in range(spec.kf):
        blocks.append(Block(FOCUS_FOCUS, (j, j + 1)))
        j += 2
    return ModelSystem(spec, tuple(blocks))


def flow(model: ModelSystem, j: int, t, p) -> np.ndarray:
    """Time-``t`` flow of ``X_j`` applied to ``p`` (closed form).

    ``t`` broadcasts against the leading dimensions of ``p``.
    """
    p = np.array(p, dtype=float)
    t = np.asarray(t, dtype=float)
    b = model.block_of(j)
    out = np.broadcast_to(p, np.broadcast_shapes(p.shape, t.shape + (p.shape[-1],))).copy()
    if b.kind == HYPERBOLIC:
        x, y = _pair(p, j)
        out[..., 2 * j - 2] = np.exp(-t) * x
        out[..., 2 * j - 1] = np.exp(t) * y
    elif b.kind == ELLIPTIC:
        x, y = _pair(p, j)
        c, s = np.cos(2 * t), np.sin(2 * t)
        out[..., 2 * j - 2] = c * x - s * y
        out[..., 2 * j - 1] = s * x + c * y
    else:
        i = b.indices[0]
        xi, yi = _pair(p, i)
        xk, yk = _pair(p, i + 1)
        if j == i:
            e_m, e_p = np.exp(-t), np.exp(t)
            out[..., 2 * i - 2] = e_m * xi
            out[..., 2 * i] = e_m * xk
            out[..., 2 * i - 1] = e_p * yi
            out[..., 2 * i + 1] = e_p * yk
        else:
            c, s = np.cos(t), np.sin(t)
            out[..., 2 * i - 2] = c * xi + s * xk
            out[..., 2 * i] = -s * xi + c * xk
            out[..., 2 * i - 1] = c * yi + s * yk
            out[..., 2 * i + 1] = -s * yi + c * yk
    return out


def log_gamma(model: ModelSystem, j: int, p) -> np.ndarray:
    """Flow time from the (anti)diagonal to ``p`` along ``X_j``: ``0.5*ln|y_j/x_j|``."""
    if model.kind(j) != HYPERBOLIC:
        raise IndexOutOfRange(f"component {j} is {model.kind(j)}, not hyperbolic")
    p = np.asarray(p, dtype=float)
    x, y = _pair(p, j)
    if np.any(x * y == 0):
        raise UndefinedOnAxes("log_gamma is undefined where x_j*y_j = 0")
    return 0.5 * np.log(np.abs(y / x))


def connection_potential(model: ModelSystem, p) -> np.ndarray:
    """Pairings ``Theta(X_j)(p)`` for ``Theta = 1/2 sum (x dy - y dx)``, j = 1..n."""
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0::2], p[..., 1::2]
    vals = []
    for j in range(1, model.n + 1):
        v = model.vector_field(j, p)
        vals.append(0.5 * np.sum(x * v[..., 1::2] - y * v[..., 0::2], axis=-1))
    return np.stack(vals, axis=-1).astype(complex)


def apply_field(model: ModelSystem, j: int, f: TruncatedSeries) -> TruncatedSeries:
    """Apply the linear field ``X_j`` to a polynomial series (degree preserving)."""
    A = model.field_matrix(j)
    if f.arity != model.n:
        raise IndexOutOfRange(f"series arity {f.arity} vs model {model.n}")
    out: dict = {}
    nz = np.argwhere(A != 0)
    for key, c in f.items():
        # X = sum_a (A p)_a d/dp_a = sum_{a,b} A[a,b] p_b d/dp_a
        for a, b in nz:
            if key[a] == 0:
                continue
            k = list(key)
            k[a] -= 1
            k[b] += 1
            k = tuple(k)
            out[k] = out.get(k, 0) + c * key[a] * A[a, b]
    return TruncatedSeries(f.arity, f.order, out)
