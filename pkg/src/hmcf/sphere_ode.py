"""Round spheres under the normal flow: the radius ODE and its exact solutions.

A sphere of radius r with inward normal has sigma = -rdot and H = n/r, so the
flow reduces to r r'' + (n/2) r'^2 + n^2/2 = 0 with r(0) = r0, r'(0) = -sigma0.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass
class SphereTrajectory:
    n: int
    r0: float
    sigma0: float
    t: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    collapse_time: float = None
    termination: str = ""

    def energy_ratio(self):
        """(n + rdot^2) r^n / ((n + sigma0^2) r0^n); identically 1 for exact solutions."""
        n = self.n
        return (n + self.rdot ** 2) * self.r ** n / ((n + self.sigma0 ** 2) * self.r0 ** n)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "r", "rdot"])
            for row in zip(self.t, self.r, self.rdot):
                wr.writerow([repr(float(v)) for v in row])


def sphere_accel(r, rdot, n):
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    return -(n / (2.0 * r)) * (rdot * rdot + n)


def sphere_rdot_firstorder(r, r0, sigma0, n):
    """rdot from the first integral; positive branch iff sigma0 < 0."""
    if r <= 0:
        raise DomainError("radius must be positive")
    rad = (n + sigma0 * sigma0) * (r0 / r) ** n - n
    if rad < 0:
        if rad > -1e-14 * n:
            rad = 0.0
        else:
            raise DomainError(f"r={r} lies beyond the turning radius")
    root = math.sqrt(rad)
    return root if sigma0 < 0 else -root


def max_radius(r0, sigma0, n):
    """Turning radius where the first-integral radicand vanishes."""
    return r0 * ((n + sigma0 * sigma0) / n) ** (1.0 / n)


def integrate_sphere(n, r0, sigma0, dt, t_max=None, min_radius_fraction=1e-6):
    """Classical RK4 on (r, rdot) until collapse.

    The run stops when r drops below ``min_radius_fraction * r0``, when the
    next step could no longer be resolved (|rdot| dt > r / 8), or at
    ``t_max``. The collapse time is estimated by fitting a quadratic to r^2
    through the last three samples and taking its next root.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if r0 <= 0:
        raise DomainError("r0 must be positive")

    def f(r, v):
        return v, -(n / (2.0 * r)) * (v * v + n)

    ts, rs, vs = [0.0], [float(r0)], [float(-sigma0)]
    t, r, v = 0.0, float(r0), float(-sigma0)
    termination = "t_max"
    k = 0
    while t_max is None or t < t_max - 0.5 * dt:
        if r < min_radius_fraction * r0:
            termination = "collapse"
            break
        if abs(v) * dt > r / 8.0:
            termination = "collapse"
            break
        k1r, k1v = f(r, v)
        r2 = r + 0.5 * dt * k1r
        if r2 <= 0:
            termination = "collapse"
            break
        k2r, k2v = f(r2, v + 0.5 * dt * k1v)
        r3 = r + 0.5 * dt * k2r
        if r3 <= 0:
            termination = "collapse"
            break
        k3r, k3v = f(r3, v + 0.5 * dt * k2v)
        r4 = r + dt * k3r
        if r4 <= 0:
            termination = "collapse"
            break
        k4r, k4v = f(r4, v + dt * k3v)
        rn = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
        vn = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (math.isfinite(rn) and math.isfinite(vn)) or rn <= 0:
            termination = "collapse"
            break
        k += 1
        t = k * dt
        r, v = rn, vn
        ts.append(t)
        rs.append(r)
        vs.append(v)

    traj = SphereTrajectory(n=n, r0=float(r0), sigma0=float(sigma0),
                            t=np.array(ts), r=np.array(rs), rdot=np.array(vs),
                            termination=termination)
    if termination == "collapse" and len(ts) >= 3:
        traj.collapse_time = _extrapolate_collapse(traj.t[-3:], traj.r[-3:] ** 2)
    return traj


def _extrapolate_collapse(t, r2):
    c2, c1, c0 = np.polyfit(t - t[-1], r2, 2)
    roots = np.roots([c2, c1, c0]) if abs(c2) > 0 else np.array([-c0 / c1])
    roots = roots[np.isreal(roots)].real
    ahead = roots[roots >= -1e-12]
    if ahead.size == 0:
        # no real root ahead: fall back to the linear extrapolation of r^2
        return float(t[-1] - c0 / c1) if c1 != 0 else float(t[-1])
    return float(t[-1] + ahead.min())


def exact_radius_n2(t, r0, sigma0):
    rad = r0 * r0 - 2.0 * r0 * sigma0 * t - 2.0 * t * t
    if np.any(np.asarray(rad) < 0):
        raise DomainError("time beyond collapse")
    return np.sqrt(rad)


def blowup_time_n2(r0, sigma0):
    if r0 <= 0:
        raise DomainError("r0 must be positive")
    return 0.5 * r0 * (-sigma0 + math.sqrt(sigma0 * sigma0 + 2.0))


def turning_time_n1(r0, sigma0):
    """Time at which an initially expanding n=1 circle reaches its maximal radius."""
    if sigma0 >= 0:
        return 0.0
    c = r0 * (1.0 + sigma0 * sigma0)
    return -r0 * sigma0 - c * math.atan(sigma0)


def cycloid_residual_n1(t, r, r0, sigma0):
    """Residual of the implicit cycloid relation for the n=1 circle.

    Uses the expanding branch for sigma0 < 0 up to the turning time and the
    contracting branch everywhere else.
    """
    c = r0 * (1.0 + sigma0 * sigma0)
    if r <= 0:
        raise DomainError("radius must be positive")
    if r > c * (1.0 + 1e-14):
        raise DomainError(f"r={r} exceeds c={c}")
    s = math.sqrt(max(c / r - 1.0, 0.0))
    lhs = r * s + c * math.atan(s)
    rhs = t + r0 * sigma0 + c * math.atan(sigma0)
    if sigma0 < 0 and t < turning_time_n1(r0, sigma0):
        rhs = -rhs
    return abs(lhs - rhs)
