import math

import numpy as np
import pytest
from scipy.linalg import expm

from kostant_lab.errors import IndexOutOfRange, InvalidSpec, UndefinedOnAxes
from kostant_lab.normal_forms import (
    ELLIPTIC,
    FOCUS_FOCUS,
    HYPERBOLIC,
    WilliamsonSpec,
    apply_field,
    build_model,
    connection_potential,
    flow,
    log_gamma,
)
from kostant_lab.series import TruncatedSeries as T
from kostant_lab.series import apply_X

SPECS = [WilliamsonSpec(*s) for s in [(0, 1, 0), (1, 0, 0), (0, 0, 1), (1, 2, 0), (1, 1, 1), (0, 3, 0)]]


def test_invalid_spec():
    with pytest.raises(InvalidSpec):
        WilliamsonSpec(0, 0, 0)
    with pytest.raises(InvalidSpec):
        WilliamsonSpec(-1, 2, 0)


def test_hyperbolic_catalog():
    m = build_model(WilliamsonSpec(0, 1, 0))
    p = np.array([2.0, 3.0])
    assert m.n == 1 and m.kind(1) == HYPERBOLIC
    assert m.hamiltonian(1, p) == 6.0
    np.testing.assert_array_equal(m.vector_field(1, p), [-2.0, 3.0])


def test_elliptic_catalog():
    m = build_model(WilliamsonSpec(1, 0, 0))
    p = np.array([2.0, 3.0])
    assert m.kind(1) == ELLIPTIC
    assert m.hamiltonian(1, p) == 13.0
    np.testing.assert_array_equal(m.vector_field(1, p), [-6.0, 4.0])


def test_focus_focus_catalog():
    m = build_model(WilliamsonSpec(0, 0, 1))
    assert m.n == 2 and m.kind(1) == m.kind(2) == FOCUS_FOCUS
    x1, y1, x2, y2 = p = np.array([0.3, -0.7, 1.1, 0.4])
    assert m.hamiltonian(1, p) == pytest.approx(x1 * y1 + x2 * y2)
    assert m.hamiltonian(2, p) == pytest.approx(x1 * y2 - x2 * y1)
    np.testing.assert_allclose(m.vector_field(1, p), [-x1, y1, -x2, y2])
    np.testing.assert_allclose(m.vector_field(2, p), [x2, y2, -x1, -y1])


@pytest.mark.parametrize("spec", SPECS)
def test_fields_are_hamiltonian(spec):
    # X_j = J grad h_j with omega = sum dx ^ dy, i.e. X = (dh/dy, -dh/dx) up to the catalog sign
    m = build_model(spec)
    rng = np.random.default_rng(1)
    p = rng.normal(size=2 * m.n)
    eps = 1e-6
    for j in range(1, m.n + 1):
        grad = np.array([
            (m.hamiltonian(j, p + eps * e) - m.hamiltonian(j, p - eps * e)) / (2 * eps)
            for e in np.eye(2 * m.n)
        ])
        X = m.vector_field(j, p)
        # i_X omega = -dh: components (X_x, X_y) = (-dh/dy, dh/dx) for the hyperbolic sign convention
        sym = np.empty_like(grad)
        sym[0::2] = -grad[1::2]
        sym[1::2] = grad[0::2]
        assert np.allclose(X, sym, atol=1e-6) or np.allclose(X, -sym, atol=1e-6)


def test_flow_examples():
    m = build_model(WilliamsonSpec(0, 1, 0))
    np.testing.assert_allclose(flow(m, 1, math.log(2), [1.0, 1.0]), [0.5, 2.0])
    me = build_model(WilliamsonSpec(1, 0, 0))
    np.testing.assert_allclose(flow(me, 1, math.pi / 2, [1.0, 0.0]), [-1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(flow(me, 1, math.pi, [0.3, 0.2]), [0.3, 0.2], atol=1e-15)


@pytest.mark.parametrize("spec", SPECS)
def test_flow_matches_matrix_exponential(spec):
    m = build_model(spec)
    rng = np.random.default_rng(2)
    for j in range(1, m.n + 1):
        A = m.field_matrix(j)
        for _ in range(5):
            p = rng.normal(size=2 * m.n)
            t = rng.uniform(-2, 2)
            np.testing.assert_allclose(flow(m, j, t, p), expm(t * A) @ p, rtol=1e-12, atol=1e-12)
        np.testing.assert_array_equal(flow(m, j, 0.0, p), p)


@pytest.mark.parametrize("spec", SPECS)
def test_flow_group_law_and_conserved_hamiltonians(spec):
    m = build_model(spec)
    rng = np.random.default_rng(3)
    for j in range(1, m.n + 1):
        p = rng.normal(size=(50, 2 * m.n))
        t, s = rng.uniform(-5, 5, size=(2, 50))
        np.testing.assert_allclose(flow(m, j, t, flow(m, j, s, p)), flow(m, j, t + s, p), rtol=1e-10, atol=1e-10)
        q = flow(m, j, t, p)
        for l in range(1, m.n + 1):
            np.testing.assert_allclose(m.hamiltonian(l, q), m.hamiltonian(l, p), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("spec", SPECS)
def test_catalog_fields_commute(spec):
    m = build_model(spec)
    for j in range(1, m.n + 1):
        for l in range(1, m.n + 1):
            A, B = m.field_matrix(j), m.field_matrix(l)
            np.testing.assert_array_equal(A @ B, B @ A)


def test_apply_field_matches_series_apply_X_and_commutes():
    m = build_model(WilliamsonSpec(0, 2, 0))
    rng = np.random.default_rng(4)
    f = T(2, 6, {tuple(int(v) for v in rng.integers(0, 3, 4)): complex(*rng.integers(-3, 4, 2)) for _ in range(6)})
    for j in (1, 2):
        assert apply_field(m, j, f) == apply_X(j, f)
    mf = build_model(WilliamsonSpec(1, 0, 1))
    g = T(3, 5, {tuple(int(v) for v in rng.integers(0, 2, 6)): 1.0 for _ in range(6)})
    for j in range(1, 4):
        for l in range(1, 4):
            assert (apply_field(mf, j, apply_field(mf, l, g)) - apply_field(mf, l, apply_field(mf, j, g))).max_abs() < 1e-12


def test_log_gamma_examples_and_errors():
    m = build_model(WilliamsonSpec(0, 1, 0))
    assert log_gamma(m, 1, [1.0, 1.0]) == 0.0
    assert log_gamma(m, 1, [1.0, math.e ** 2]) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(UndefinedOnAxes):
        log_gamma(m, 1, [1.0, 0.0])
    with pytest.raises(IndexOutOfRange):
        log_gamma(build_model(WilliamsonSpec(1, 0, 0)), 1, [1.0, 1.0])


def test_log_gamma_identities():
    m = build_model(WilliamsonSpec(0, 2, 0))
    rng = np.random.default_rng(5)
    p = rng.uniform(-2, 2, size=(500, 4))
    s = rng.uniform(-3, 3, size=500)
    for j in (1, 2):
        lg = log_gamma(m, j, p)
        np.testing.assert_allclose(log_gamma(m, j, flow(m, j, s, p)), lg + s, atol=1e-12)
        q = flow(m, j, -lg, p)
        r = np.sqrt(np.abs(m.hamiltonian(j, p)))
        np.testing.assert_allclose(np.abs(q[:, 2 * j - 2]), r, rtol=1e-10)
        np.testing.assert_allclose(np.abs(q[:, 2 * j - 1]), r, rtol=1e-10)
        np.testing.assert_array_equal(np.sign(q[:, 2 * j - 2:2 * j]), np.sign(p[:, 2 * j - 2:2 * j]))


def test_connection_potential():
    m = build_model(WilliamsonSpec(0, 1, 0))
    assert connection_potential(m, [2.0, 3.0])[0] == 6.0
    me = build_model(WilliamsonSpec(1, 0, 0))
    assert connection_potential(me, [1.0, 0.0])[0] == 1.0
    for spec in SPECS:
        mm = build_model(spec)
        assert np.all(connection_potential(mm, np.zeros(2 * mm.n)) == 0)
        p = np.random.default_rng(6).normal(size=2 * mm.n)
        hs = [mm.hamiltonian(j, p) for j in range(1, mm.n + 1)]
        np.testing.assert_allclose(connection_potential(mm, p).real, hs, atol=1e-14)


def test_block_index_errors():
    m = build_model(WilliamsonSpec(0, 1, 0))
    with pytest.raises(IndexOutOfRange):
        flow(m, 2, 0.0, [1.0, 1.0])
