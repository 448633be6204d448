import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kostant_lab.errors import ArityMismatch, EvaluationFailure
from kostant_lab.functions import FlatFactor, QuadrantKernel, SeparableFunction as S
from kostant_lab.hyperbolic2d import flat_section_build, solve_poly_exact
from kostant_lab.normal_forms import WilliamsonSpec, build_model
from kostant_lab.series import TruncatedSeries as T
from kostant_lab.verify import DerivativeProbe, GridSpec, compare_series, flow_derivative, flow_residual

MODEL = build_model(WilliamsonSpec(0, 1, 0))
GRID = GridSpec.default(1)
Y = S.monomial((0, 1))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(((1.0, -1.0),))
    with pytest.raises(ValueError):
        GridSpec(((-1.0, 1.0),), points_per_axis=1)
    with pytest.raises(ValueError):
        GridSpec(((-1.0, 1.0),), exclude_abs_h_below=-0.1)
    with pytest.raises(ValueError):
        DerivativeProbe(step=0.0)
    with pytest.raises(ValueError):
        DerivativeProbe(order=3)
    assert GRID.describe() == {"box": [[-1.0, 1.0], [-1.0, 1.0]], "points": 41, "exclude_abs_h_below": 0.05}


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.floats(0.0, 0.8), st.integers(1, 2))
def test_grid_exclusion_is_respected(points, delta, j):
    grid = GridSpec(((-1.0, 1.0), (-0.5, 1.5), (-1.0, 0.3), (-2.0, 2.0)), points, delta)
    pts = grid.points(j)
    assert pts.shape[1] == 4
    assert np.all(np.abs(pts[:, 2 * j - 2] * pts[:, 2 * j - 1]) >= delta)
    assert len(grid.points()) == points ** 4


def test_flow_residual_examples():
    rep = flow_residual(MODEL, 1, solve_poly_exact(Y), Y, GRID, DerivativeProbe(1e-4, 4), tolerance=1e-8)
    assert rep.ok and rep.grid_max <= 1e-8
    zero = flow_residual(MODEL, 1, None, None, GRID)
    assert zero.grid_max == 0.0 and zero.grid_mean == 0.0
    u = flat_section_build(QuadrantKernel((FlatFactor(1.0), FlatFactor(2.0), None, FlatFactor(0.5, (1.0, 0.0)))))
    assert flow_residual(MODEL, 1, u, None, GRID, tolerance=1e-8).ok


def test_flow_residual_detects_wrong_solution():
    rep = flow_residual(MODEL, 1, Y, Y, GRID, tolerance=1e-6)
    assert not rep.ok and rep.grid_max > 0.1


def test_flow_residual_arity_and_failures():
    with pytest.raises(ArityMismatch):
        flow_residual(MODEL, 1, Y, Y, GridSpec.default(2, 3))

    def boom(p):
        raise RuntimeError("no")

    with pytest.raises(EvaluationFailure):
        flow_residual(MODEL, 1, boom, None, GRID)
    with pytest.raises(EvaluationFailure):
        flow_residual(MODEL, 1, lambda p: np.full(p.shape[:-1], np.nan), None, GRID)


@pytest.mark.parametrize("order", [2, 4])
def test_stencil_convergence_rate(order):
    G = solve_poly_exact(Y)
    coarse = flow_residual(MODEL, 1, G, Y, GRID, DerivativeProbe(0.1, order)).grid_max
    fine = flow_residual(MODEL, 1, G, Y, GRID, DerivativeProbe(0.05, order)).grid_max
    ratio = coarse / fine
    assert 0.7 * 2 ** order <= ratio <= 1.3 * 2 ** order


def test_report_is_partition_independent():
    G = solve_poly_exact(Y)
    rep = flow_residual(MODEL, 1, G, Y, GRID)
    pts = GRID.points(1)
    probe = DerivativeProbe()
    R = np.abs(flow_derivative(MODEL, 1, G, pts, probe) - 1j * pts[:, 0] * pts[:, 1] * G(pts) - Y(pts))
    parts = np.array_split(R, 7)
    assert rep.samples == len(pts)
    assert rep.grid_max == max(p.max() for p in parts)
    assert rep.grid_mean == pytest.approx(sum(p.sum() for p in parts) / len(R), rel=1e-12)
    d = rep.to_dict()
    assert d["ok"] and d["grid"]["stencil"] == 4 and d["grid"]["pair"] == 1


def test_compare_series_examples():
    a = T.monomial(1, 6, (1, 0))
    assert compare_series(a, a).symbolic_max == 0.0
    rep = compare_series(a, T.monomial(1, 6, (1, 0), 2.0))
    assert rep.symbolic_max == 1.0 and not rep.ok
    assert compare_series(T.zero(1, 4), T.zero(1, 4)).exact_zero
    with pytest.raises(ArityMismatch):
        compare_series(a, T.zero(2, 6))
    # missing coefficient in a measured against b
    assert compare_series(T.zero(1, 4), T.monomial(1, 4, (0, 1), 3.0)).symbolic_max == 1.0
