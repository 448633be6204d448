"""Grid-based residual checks and series comparison.

Derivatives are taken along the exact flow of ``X_j``: ``X_j(G)(p)`` is the
derivative of ``s -> G(phi_s(p))`` at ``s = 0``, approximated by a central
difference stencil.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ArityMismatch, EvaluationFailure
from .normal_forms import ModelSystem, flow
from .series import TruncatedSeries

__all__ = ["GridSpec", "DerivativeProbe", "ResidualReport", "flow_residual", "compare_series"]


@dataclass(frozen=True)
class GridSpec:
    box: tuple
    points_per_axis: int = 41
    exclude_abs_h_below: float = 0.0

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if not box or any(not lo <= hi for lo, hi in box):
            raise ValueError(f"empty interval in box {self.box}")
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be at least 2")
        if self.exclude_abs_h_below < 0:
            raise ValueError("exclusion threshold must be nonnegative")
        object.__setattr__(self, "box", box)

    @classmethod
    def default(cls, arity: int, points: int = 41, delta: float = 0.05):
        return cls(((-1.0, 1.0),) * (2 * arity), points, delta)

    def points(self, j: int | None = None) -> np.ndarray:
        """Grid points ``(P, 2n)``; drops ``|x_j y_j| < delta`` on pair ``j``."""
        axes = [np.linspace(lo, hi, self.points_per_axis) for lo, hi in self.box]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        if j is not None and self.exclude_abs_h_below > 0:
            h = pts[:, 2 * j - 2] * pts[:, 2 * j - 1]
            pts = pts[np.abs(h) >= self.exclude_abs_h_below]
        return pts

    def describe(self) -> dict:
        return {
            "box": [list(b) for b in self.box],
            "points": self.points_per_axis,
            "exclude_abs_h_below": self.exclude_abs_h_below,
        }


@dataclass(frozen=True)
class DerivativeProbe:
    step: float = 1e-4
    order: int = 4

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("probe step must be positive")
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")


@dataclass
class ResidualReport:
    label: str
    tolerance_used: float
    symbolic_max: float | None = None
    exact_zero: bool | None = None
    grid_max: float | None = None
    grid_mean: float | None = None
    grid: dict | None = field(default=None)
    samples: int | None = None

    @property
    def ok(self) -> bool:
        checks = [v for v in (self.symbolic_max, self.grid_max) if v is not None]
        return all(math.isfinite(v) and v <= self.tolerance_used for v in checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def _eval(fn, pts):
    if fn is None:
        return np.zeros(pts.shape[:-1], dtype=complex)
    try:
        val = np.asarray(fn(pts), dtype=complex)
    except Exception as exc:  # noqa: BLE001 - report any evaluator failure uniformly
        raise EvaluationFailure(f"evaluation failed: {exc}") from exc
    if val.shape != pts.shape[:-1]:
        val = np.broadcast_to(val, pts.shape[:-1])
    if not np.all(np.isfinite(val)):
        raise EvaluationFailure("evaluator returned non-finite values")
    return val


def flow_derivative(model: ModelSystem, j: int, G, pts, probe: DerivativeProbe) -> np.ndarray:
    s = probe.step
    if probe.order == 2:
        return (_eval(G, flow(model, j, s, pts)) - _eval(G, flow(model, j, -s, pts))) / (2 * s)
    return (
        -_eval(G, flow(model, j, 2 * s, pts))
        + 8 * _eval(G, flow(model, j, s, pts))
        - 8 * _eval(G, flow(model, j, -s, pts))
        + _eval(G, flow(model, j, -2 * s, pts))
    ) / (12 * s)


def flow_residual(
    model: ModelSystem,
    j: int,
    G,
    F,
    grid: GridSpec,
    probe: DerivativeProbe = DerivativeProbe(),
    tolerance: float = 1e-6,
    label: str = "flow_residual",
) -> ResidualReport:
    """Max/mean of ``|X_j(G) - i h_j G - F|`` over the grid (``F=None`` means 0)."""
    if len(grid.box) != 2 * model.n:
        raise ArityMismatch(f"grid of dimension {len(grid.box)} for model arity {model.n}")
    pts = grid.points(j)
    if len(pts) == 0:
        return ResidualReport(label, tolerance, grid_max=0.0, grid_mean=0.0, grid=grid.describe(), samples=0)
    h = model.hamiltonian(j, pts)
    R = flow_derivative(model, j, G, pts, probe) - 1j * h * _eval(G, pts) - _eval(F, pts)
    absR = np.abs(R)
    return ResidualReport(
        label,
        tolerance,
        grid_max=float(absR.max()),
        grid_mean=float(absR.mean()),
        grid=grid.describe() | {"step": probe.step, "stencil": probe.order, "pair": j},
        samples=int(len(pts)),
    )


def compare_series(
    a: TruncatedSeries, b: TruncatedSeries, rel_tol: float = 1e-12, label: str = "compare_series",
    abs_floor: float = 0.0,
) -> ResidualReport:
    """Max relative coefficient discrepancy over the union of supports.

    The reference magnitude at an index is ``|a_k|`` (or ``|b_k|`` where
    ``a_k = 0``), floored by ``abs_floor``; zero against zero counts as equal.
    """
    if a.arity != b.arity:
        raise ArityMismatch(f"arity {a.arity} vs {b.arity}")
    worst = 0.0
    for key in set(a.coeffs) | set(b.coeffs):
        va, vb = a[key], b[key]
        if va == vb:
            continue
        ref = max(abs(va) if va != 0 else abs(vb), abs_floor)
        worst = max(worst, abs(va - vb) / ref)
    return ResidualReport(label, rel_tol, symbolic_max=worst, exact_zero=worst == 0.0)
