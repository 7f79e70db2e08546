import numpy as np
import pytest

from hmcf.errors import DegenerateGeometryError
from hmcf.geometry import (
    GraphField,
    PlaneCurve,
    curve_geometry,
    energy_density,
    graph_inverse_metric,
    graph_mean_curvature,
    graph_metric,
    graph_w,
    signed_area,
)


def test_energy_density_values():
    assert energy_density(0.0, 1) == 0.5
    assert energy_density(1.0, 2) == 1.5


def test_graph_w_and_metrics():
    b = np.array([0.3, -0.4])
    assert graph_w(b) == pytest.approx(np.sqrt(1.25))
    np.testing.assert_allclose(graph_inverse_metric(b) @ graph_metric(b), np.eye(2), atol=1e-14)


@pytest.mark.parametrize("x", [np.array([0.0, 0.0]), np.array([0.3, -0.2]), np.array([0.6, 0.5])])
def test_lower_hemisphere_has_constant_mean_curvature(x):
    # u = -sqrt(R^2 - |x|^2) is a piece of a sphere: H = n / R everywhere
    R = 1.3
    q = R * R - x @ x
    u = -np.sqrt(q)
    b = -x / u
    hess = (np.eye(2) + np.outer(b, b)) / (-u)
    g = graph_mean_curvature(hess, b)
    assert g.H == pytest.approx(2.0 / R, rel=1e-12)
    np.testing.assert_allclose(g.h, hess / g.w)


def test_graph_field_validation():
    with pytest.raises(ValueError):
        GraphField(1, (4,), (0.1,), "periodic", np.zeros(4), np.zeros((1, 4)))
    with pytest.raises(ValueError):
        GraphField(3, (8, 8, 8), (1, 1, 1), "periodic", np.zeros((8, 8, 8)), np.zeros((3, 8, 8, 8)))
    with pytest.raises(ValueError):
        GraphField(1, (8,), (-0.1,), "periodic", np.zeros(8), np.zeros((1, 8)))
    s = np.zeros(8)
    s[3] = np.nan
    with pytest.raises(ValueError):
        GraphField(1, (8,), (0.1,), "periodic", s, np.zeros((1, 8)))
    f = GraphField(2, (8, 10), (0.5, 0.25), "outflow", np.zeros((8, 10)), np.zeros((2, 8, 10)))
    x, y = f.centers()
    assert x.shape == (8, 10) and y[0, 0] == 0.125 and f.cell_volume == 0.125


def _circle(m, r=1.0, reverse=False):
    th = 2 * np.pi * np.arange(m) / m
    v = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    return v[::-1] if reverse else v


def test_plane_curve_requires_eight_vertices():
    with pytest.raises(ValueError):
        PlaneCurve(_circle(7))


def test_plane_curve_rejects_repeated_vertex():
    v = _circle(12)
    v[4] = v[3]
    with pytest.raises(DegenerateGeometryError):
        PlaneCurve(v)


def test_clockwise_input_is_reoriented():
    v = _circle(16, reverse=True)
    s = np.arange(16.0)
    c = PlaneCurve(v, s)
    assert signed_area(c.vertices) > 0
    # sigma travels with its vertex
    for i in range(16):
        j = np.flatnonzero(np.all(v == c.vertices[i], axis=1))[0]
        assert c.sigma[i] == s[j]


def test_regular_polygon_curvature():
    m, r = 32, 2.0
    g = curve_geometry(PlaneCurve(_circle(m, r)))
    expected = (2 * np.pi / m) / (2 * r * np.sin(np.pi / m))
    np.testing.assert_allclose(g.H, expected, rtol=1e-12)
    assert np.sum(g.dmu) == pytest.approx(2 * m * r * np.sin(np.pi / m))
    np.testing.assert_allclose(np.sum(g.nu * g.tangent, axis=1), 0.0, atol=1e-14)
    np.testing.assert_allclose(g.e_dmu, 0.5 * g.dmu)


def test_curvature_converges_on_ellipse():
    a, b = 2.0, 1.0
    errs = []
    for m in (128, 256, 512):
        th = 2 * np.pi * np.arange(m) / m
        c = PlaneCurve(np.stack([a * np.cos(th), b * np.sin(th)], axis=1))
        exact = a * b / (a * a * np.sin(th) ** 2 + b * b * np.cos(th) ** 2) ** 1.5
        errs.append(np.max(np.abs(curve_geometry(c).H - exact)))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0
