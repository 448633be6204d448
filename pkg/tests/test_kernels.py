import os
import subprocess
import sys

import numpy as np
import pytest

from kostant_lab import _kernels
from kostant_lab.errors import QuadratureFailure
from kostant_lab.quadrature import adaptive_gk, gk15

needs_numba = pytest.mark.skipif(_kernels.numba_impl is None, reason="numba not installed")


def test_gauss_kronrod_rules_are_exact_on_polynomials():
    for deg in range(23):
        exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
        assert np.dot(_kernels.KW, _kernels.NODES ** deg) == pytest.approx(exact, abs=1e-14)
    for deg in range(14):
        exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
        assert np.dot(_kernels.GW, _kernels.NODES ** deg) == pytest.approx(exact, abs=1e-14)


def _cases(rng, size=300):
    h = rng.uniform(-1, 1, size)
    L = rng.uniform(-4, 4, size)
    h[:5] = 0.0
    L[5:8] = 0.0
    L[8:12] = rng.uniform(-1e-6, 1e-6, 4)
    return h, L


@pytest.mark.parametrize("impl", ["numpy", pytest.param("numba", marks=needs_numba)])
@pytest.mark.parametrize("m", [-3, 0, 1, 2])
def test_homotopy_exact_against_direct_formula(impl, m):
    ns = _kernels.numpy_impl if impl == "numpy" else _kernels.numba_impl
    h, L = _cases(np.random.default_rng(0))
    z = m - 1j * h
    with np.errstate(all="ignore"):
        direct = np.where(z * L != 0, (1 - np.exp(-z * L)) / np.where(z == 0, 1, z), L)
    big = np.abs(z * L) > 1e-2
    np.testing.assert_allclose(ns.homotopy_exact(h, L, m)[big], direct[big], rtol=1e-12)
    small = ~big
    # near zero compare with the Taylor polynomial of the primitive
    w = -z * L
    series = L * (1 + w / 2 + w ** 2 / 6 + w ** 3 / 24 + w ** 4 / 120 + w ** 5 / 720)
    np.testing.assert_allclose(ns.homotopy_exact(h, L, m)[small], series[small], rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("impl", ["numpy", pytest.param("numba", marks=needs_numba)])
@pytest.mark.parametrize("m", [-2, 0, 3])
def test_homotopy_quad_matches_exact(impl, m):
    ns = _kernels.numpy_impl if impl == "numpy" else _kernels.numba_impl
    h, L = _cases(np.random.default_rng(1), 200)
    vals, err, ok = ns.homotopy_quad(h, L, m, np.full(h.shape, 1e-11))
    assert ok.all()
    exact = _kernels.numpy_impl.homotopy_exact(h, L, m)
    assert np.max(np.abs(vals - exact)) < 1e-10 * max(1.0, np.max(np.abs(exact)))


@needs_numba
def test_numba_and_numpy_paths_agree():
    rng = np.random.default_rng(2)
    h, L = _cases(rng, 500)
    for m in (-1, 0, 2):
        a = _kernels.numba_impl.homotopy_exact(h, L, m)
        b = _kernels.numpy_impl.homotopy_exact(h, L, m)
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-300)
        qa = _kernels.numba_impl.homotopy_quad(h, L, m, 1e-10)
        qb = _kernels.numpy_impl.homotopy_quad(h, L, m, 1e-10)
        np.testing.assert_allclose(qa[0], qb[0], rtol=1e-13, atol=1e-15)
        np.testing.assert_array_equal(qa[2], qb[2])
    f = rng.normal(size=(19, 19)) + 1j * rng.normal(size=(19, 19))
    # complex division may round differently by one ulp between the two backends
    np.testing.assert_allclose(
        _kernels.numba_impl.jet_recursion(f, 16), _kernels.numpy_impl.jet_recursion(f, 16), rtol=1e-15, atol=0
    )


def test_env_flag_selects_numpy_backend():
    code = "from kostant_lab import _kernels as k; print(k.BACKEND, k.active is k.numpy_impl)"
    env = dict(os.environ, KOSTANT_LAB_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


@needs_numba
def test_default_backend_is_numba():
    code = "from kostant_lab import _kernels as k; print(k.BACKEND)"
    env = {k: v for k, v in os.environ.items() if k != "KOSTANT_LAB_DISABLE_NUMBA"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_gk15_and_adaptive():
    val, err = gk15(np.exp, 0.0, 1.0)
    assert abs(val - (np.e - 1)) < 1e-14
    val, err = adaptive_gk(lambda t: np.exp(1j * 40 * t), 0.0, 3.0, 1e-12)
    assert abs(val - (np.exp(120j) - 1) / 40j) < 1e-11
    rev, _ = adaptive_gk(np.cos, 1.0, 0.0)
    assert rev == pytest.approx(-np.sin(1.0), abs=1e-13)
    assert adaptive_gk(np.cos, 2.0, 2.0) == (0j, 0.0)


def test_adaptive_raises_on_budget_exhaustion():
    with pytest.raises(QuadratureFailure):
        adaptive_gk(lambda t: 1 / np.sqrt(np.abs(t - 0.3) + 1e-300), 0.0, 1.0, 1e-14, max_intervals=5)
