import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmcf import _kernels_py, kernels

needs_ext = pytest.mark.skipif("cython" not in kernels.backends(), reason="extension not built")


def _close(a, b, tol=1e-13):
    for x, y in zip(a, b):
        np.testing.assert_allclose(np.asarray(x), np.asarray(y), rtol=tol, atol=tol)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_env_forces_fallback():
    env = dict(os.environ, HMCF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import hmcf; print(hmcf.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_regular_polygon_geometry(backend):
    m, r = 64, 1.5
    th = 2 * np.pi * np.arange(m) / m
    tx, ty, nx, ny, turn, dmu, edge = backend.curve_geometry(r * np.cos(th), r * np.sin(th))
    np.testing.assert_allclose(turn, 2 * np.pi / m, rtol=1e-12)
    np.testing.assert_allclose(edge, 2 * r * np.sin(np.pi / m), rtol=1e-12)
    # inward normal points at the center
    np.testing.assert_allclose(nx, -np.cos(th), atol=1e-12)
    np.testing.assert_allclose(ny, -np.sin(th), atol=1e-12)


@needs_ext
@settings(max_examples=30, deadline=None)
@given(st.integers(8, 200), st.integers(0, 2 ** 31))
def test_curve_kernels_match(m, seed):
    ext = kernels.backends()["cython"]
    rng = np.random.default_rng(seed)
    th = np.sort(rng.uniform(0, 2 * np.pi, m)) + np.linspace(0, 1e-3, m)
    r = 1 + 0.2 * rng.uniform(-1, 1) * np.cos(3 * th)
    x, y = r * np.cos(th), r * np.sin(th)
    _close(_kernels_py.curve_geometry(x, y), ext.curve_geometry(x, y))
    xs, ys = np.stack([x, 2 * x]), np.stack([y, y])
    _close(_kernels_py.curve_geometry(xs, ys), ext.curve_geometry(xs, ys))
    v = np.stack([x, y], axis=1)
    s = rng.normal(size=m)
    _close(_kernels_py.curve_rhs(v, s), ext.curve_rhs(v, s), tol=1e-12)


@needs_ext
@pytest.mark.parametrize("scheme", [kernels.LAX_FRIEDRICHS, kernels.RUSANOV])
@pytest.mark.parametrize("periodic", [True, False])
def test_fv_kernels_match(scheme, periodic):
    ext = kernels.backends()["cython"]
    rng = np.random.default_rng(7)
    s, b = 0.3 * rng.normal(size=50), 0.3 * rng.normal(size=50)
    _close(_kernels_py.fv_rhs_1d(s, b, 0.1, scheme, periodic, 1.0),
           ext.fv_rhs_1d(s, b, 0.1, scheme, periodic, 1.0), tol=1e-12)
    _close(_kernels_py.fv_rhs_1d(s, b, 0.1, scheme, periodic, 2.0),
           ext.fv_rhs_1d(s, b, 0.1, scheme, periodic, 2.0), tol=1e-12)
    s2, p2, q2 = (0.3 * rng.normal(size=(12, 9)) for _ in range(3))
    _close(_kernels_py.fv_rhs_2d(s2, p2, q2, 0.1, 0.2, scheme, periodic),
           ext.fv_rhs_2d(s2, p2, q2, 0.1, 0.2, scheme, periodic), tol=1e-12)
    _close(_kernels_py.wave_speed_2d(s2, p2, q2), ext.wave_speed_2d(s2, p2, q2))
    _close((_kernels_py.wave_speed_1d(s, b),), (ext.wave_speed_1d(s, b),))


def test_fv_rhs_constant_state_is_zero(backend):
    s = np.full(16, 0.3)
    b = np.full(16, -0.2)
    rs, rb, amax = backend.fv_rhs_1d(s, b, 0.1, kernels.RUSANOV, False, 1.0)
    assert np.max(np.abs(rs)) < 1e-14 and np.max(np.abs(rb)) < 1e-14
    assert amax > 0
