import numpy as np
import pytest

from hmcf import curve_flow as cf
from hmcf import sphere_ode as so
from hmcf.errors import BlowUpError, DegenerateGeometryError
from hmcf.geometry import PlaneCurve, energy_density


@pytest.mark.parametrize("r,expected", [(1.0, 0.5), (2.0, 0.25)])
def test_rhs_on_static_circle(r, expected):
    vel, sdot = cf.curve_rhs(cf.circle_initial(r, 0.0, 512))
    assert np.max(np.abs(vel)) == 0.0
    np.testing.assert_allclose(sdot, expected, rtol=1e-5)


def test_rhs_velocity_is_sigma_nu():
    c = cf.ellipse_initial(2.0, 1.0, 64, sigma0=0.3)
    vel, _ = cf.curve_rhs(c)
    np.testing.assert_allclose(np.linalg.norm(vel, axis=1), 0.3)
    # inward: pointing toward the center on the axes
    assert vel[0, 0] < 0 and vel[16, 1] < 0


def test_rhs_zero_sigma_is_stationary():
    c = cf.polar_initial(lambda th: 1 + 0.3 * np.cos(2 * th), 40)
    vel, _ = cf.curve_rhs(c)
    assert not vel.any()


def test_rhs_degenerate_curve():
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    v = np.stack([np.cos(th), np.sin(th)], axis=1)
    v[5] = v[4] + 1e-17
    with pytest.raises(DegenerateGeometryError):
        cf.curve_rhs(PlaneCurve(v, np.zeros(16)))


def test_initial_constructors_validate():
    with pytest.raises(ValueError):
        cf.circle_initial(0.0, 0.0, 16)
    with pytest.raises(ValueError):
        cf.circle_initial(1.0, 0.0, 4)
    with pytest.raises(ValueError):
        cf.ellipse_initial(-1.0, 1.0, 16)
    with pytest.raises(ValueError):
        cf.run_curve(cf.circle_initial(1.0, 0.0, 16), 0.0, 1.0)


def test_circle_collapse_matches_ode():
    rec = cf.run_curve(cf.circle_initial(1.0, 0.0, 128), 1e-3, 3.0, output_every=5)
    assert rec.termination == cf.COLLAPSE
    r = rec.mean_radius()
    ode = so.integrate_sphere(1, 1.0, 0.0, 1e-4)
    m = r > 0.2
    np.testing.assert_allclose(r[m], np.interp(rec.times[m], ode.t, ode.r), rtol=2e-3)
    assert r[-1] < 0.2


def test_expanding_circle_turns_around():
    rec = cf.run_curve(cf.circle_initial(1.0, -0.5, 128), 1e-3, 0.8)
    r = rec.mean_radius()
    assert r.max() > 1.0 and rec.termination == cf.T_END


def test_nonfinite_state_raises(monkeypatch):
    def bad(v, s):
        return np.full_like(v, np.nan), np.zeros_like(s)

    monkeypatch.setattr(cf, "_rhs", bad)
    with pytest.raises(BlowUpError):
        cf.run_curve(cf.circle_initial(1.0, 0.0, 16), 1e-3, 0.1)


def test_kinematics_normal_flow(circle_run):
    k = 100
    kin = cf.decompose_kinematics(circle_run, k)
    assert np.max(np.abs(kin.S)) < 1e-6
    e = energy_density(circle_run.sigma[k], 1)
    H = circle_run.geometry()["H"][k]
    np.testing.assert_allclose(kin.alpha / (e * H), 1.0, atol=1e-3)
    np.testing.assert_allclose(kin.sigma, circle_run.sigma[k], atol=1e-6)


def test_kinematics_at_rest_snapshot(circle_run):
    kin = cf.decompose_kinematics(circle_run, 0)
    H = circle_run.geometry()["H"][0]
    np.testing.assert_allclose(kin.alpha, 0.5 * H, rtol=1e-3)


def test_identities_small_on_circle(circle_run):
    res = cf.verify_normal_flow_identities(circle_run)
    assert res.max_dmu < 1e-4 and res.max_H < 1e-4


def test_identities_vanish_for_static_polygon():
    v = cf.circle_initial(1.0, 0.0, 16).vertices
    rec = cf.CurveRunRecord(times=np.array([0.0, 0.1, 0.2]), vertices=np.stack([v, v, v]),
                            sigma=np.zeros((3, 16)))
    res = cf.verify_normal_flow_identities(rec)
    assert res.max_dmu == 0.0
    # a static polygon is not a flat segment: H != 0 but sigma = 0
    assert res.max_H == 0.0


def test_identities_need_three_snapshots():
    c = cf.circle_initial(1.0, 0.0, 16)
    rec = cf.CurveRunRecord(times=np.array([0.0, 0.1]), vertices=np.stack([c.vertices] * 2),
                            sigma=np.zeros((2, 16)))
    with pytest.raises(ValueError):
        cf.verify_normal_flow_identities(rec)


def test_compatibility_relation(wobbly_run):
    k = wobbly_run.n_snapshots // 2
    scale = np.max(np.abs(wobbly_run.sigma[k])) * np.mean(wobbly_run.geometry()["edge"][k])
    assert cf.compatibility_residual(wobbly_run, k) < 1e-2 * scale


def test_redistribution_equalizes_edges():
    c = cf.ellipse_initial(3.0, 1.0, 128, sigma0=0.2)
    r = cf.redistribute_arclength(c)
    e = np.hypot(*(np.roll(r.vertices, -1, axis=0) - r.vertices).T)
    assert e.std() / e.mean() < 1e-2
    np.testing.assert_allclose(r.sigma, 0.2)


def test_curve_csv(tmp_path):
    rec = cf.run_curve(cf.circle_initial(1.0, 0.0, 16), 1e-2, 0.02)
    rec.write_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "t,vertex,x,y,sigma,H,dmu"
    assert len(lines) == 1 + 16 * rec.n_snapshots


def test_snapshots_carry_geometry(circle_run):
    t, curve, geom = circle_run.snapshots[3]
    assert t == circle_run.times[3]
    np.testing.assert_allclose(geom.H, circle_run.geometry()["H"][3])
