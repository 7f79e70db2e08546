import math

import numpy as np
import pytest

from hmcf.errors import DomainError
from hmcf.sphere_ode import (
    blowup_time_n2,
    cycloid_residual_n1,
    exact_radius_n2,
    integrate_sphere,
    max_radius,
    sphere_accel,
    sphere_rdot_firstorder,
    turning_time_n1,
)


def test_accel_formula():
    assert sphere_accel(1.0, 0.0, 2) == -2.0
    assert sphere_accel(2.0, 1.0, 1) == pytest.approx(-0.5)
    with pytest.raises(DomainError):
        sphere_accel(0.0, 1.0, 1)


def test_blowup_times():
    assert blowup_time_n2(1.0, 0.0) == pytest.approx(1 / math.sqrt(2))
    assert blowup_time_n2(1.0, -1.0) == pytest.approx((1 + math.sqrt(3)) / 2)
    with pytest.raises(DomainError):
        blowup_time_n2(-1.0, 0.0)


def test_exact_radius_domain():
    assert exact_radius_n2(0.0, 1.0, 0.0) == 1.0
    with pytest.raises(DomainError):
        exact_radius_n2(1.0, 1.0, 0.0)


def test_first_order_branch_and_turning_radius():
    assert sphere_rdot_firstorder(1.0, 1.0, 0.5, 2) == pytest.approx(-0.5)
    assert sphere_rdot_firstorder(1.0, 1.0, -0.5, 2) == pytest.approx(0.5)
    rmax = max_radius(1.0, -1.0, 2)
    assert rmax == pytest.approx(math.sqrt(1.5))
    assert sphere_rdot_firstorder(rmax, 1.0, -1.0, 2) == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(DomainError):
        sphere_rdot_firstorder(1.1 * rmax, 1.0, -1.0, 2)


@pytest.fixture(scope="module")
def n2_run():
    return integrate_sphere(2, 1.0, 0.0, 1e-4)


def test_n2_exact_solution(n2_run):
    m = n2_run.t <= 0.69
    err = np.abs(n2_run.r[m] - exact_radius_n2(n2_run.t[m], 1.0, 0.0))
    assert err.max() < 1e-10
    assert n2_run.termination == "collapse"
    assert n2_run.collapse_time == pytest.approx(1 / math.sqrt(2), abs=1e-4)


def test_first_integral_away_from_collapse(n2_run):
    m = n2_run.r >= 0.2
    assert np.max(np.abs(n2_run.energy_ratio()[m] - 1.0)) < 1e-10


def test_t_max_stop():
    tr = integrate_sphere(1, 1.0, 0.0, 1e-3, t_max=0.5)
    assert tr.termination == "t_max" and tr.collapse_time is None
    assert tr.t[-1] == pytest.approx(0.5)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        integrate_sphere(1, 1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        integrate_sphere(1, -1.0, 0.0, 1e-3)


def test_cycloid_branches():
    tr = integrate_sphere(1, 1.0, -0.5, 1e-4)
    t_star = turning_time_n1(1.0, -0.5)
    k = np.argmax(tr.r)
    assert tr.t[k] == pytest.approx(t_star, abs=2e-4)
    res = [cycloid_residual_n1(t, r, 1.0, -0.5) for t, r in zip(tr.t[::50], tr.r[::50])]
    assert max(res) < 1e-6
    # the wrong branch would give an O(1) residual right after the start
    assert turning_time_n1(1.0, 0.3) == 0.0


def test_cycloid_residual_rejects_large_radius():
    with pytest.raises(DomainError):
        cycloid_residual_n1(0.0, 3.0, 1.0, 0.0)


def test_csv_round_trip(tmp_path):
    tr = integrate_sphere(2, 1.0, 0.0, 1e-2, t_max=0.1)
    p = tmp_path / "s.csv"
    tr.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "t,r,rdot"
    assert float(rows[1].split(",")[1]) == 1.0
    assert len(rows) == tr.t.size + 1
