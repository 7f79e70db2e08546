"""Normal hyperbolic flow of closed plane curves.

State is the vertex array F (m, 2) and the normal speed sigma (m,). The flow
is dF/dt = sigma nu, dsigma/dt = e H with e = (sigma^2 + 1)/2, integrated with
classical RK4 at fixed dt. Vertices are material points: index i tracks the
same parameter value across all snapshots.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BlowUpError, DegenerateGeometryError
from .geometry import PlaneCurve, curve_geometry, energy_density, polygon_geometry, signed_area

T_END = "t_end"
COLLAPSE = "collapse"
QUALITY = "quality"
BLOWUP = "blowup"


def circle_initial(r0, sigma0, m, center=(0.0, 0.0)):
    """Regular m-gon of radius ``r0`` with sigma = sigma0 at every vertex."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    if m < 8:
        raise ValueError("m must be at least 8")
    th = 2.0 * np.pi * np.arange(m) / m
    v = np.stack([center[0] + r0 * np.cos(th), center[1] + r0 * np.sin(th)], axis=1)
    return PlaneCurve(v, np.full(m, float(sigma0)))


def ellipse_initial(ax, by, m, sigma0=0.0):
    """Ellipse x = ax cos t, y = by sin t sampled at equal parameter steps."""
    if ax <= 0 or by <= 0:
        raise ValueError("semi-axes must be positive")
    th = 2.0 * np.pi * np.arange(m) / m
    v = np.stack([ax * np.cos(th), by * np.sin(th)], axis=1)
    return PlaneCurve(v, np.full(m, float(sigma0)))


def polar_initial(radius, m, sigma=0.0):
    """Star-shaped curve r = radius(theta); ``sigma`` is a constant or a callable of theta."""
    th = 2.0 * np.pi * np.arange(m) / m
    r = np.asarray(radius(th), dtype=float)
    v = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    s = sigma(th) if callable(sigma) else np.full(m, float(sigma))
    return PlaneCurve(v, s)


def _rhs(v, sigma):
    vel, sdot, _, emin, emean = kernels.curve_rhs(v, sigma)
    if not emin >= 1e-14 * emean:
        raise DegenerateGeometryError("degenerate edge in curve")
    return vel, sdot


def curve_rhs(curve):
    """Velocity sigma nu and sigma_dot = e H at every vertex."""
    return _rhs(curve.vertices, curve.sigma)


def redistribute_arclength(curve):
    """Resample vertices and sigma at equal arclength (periodic linear interpolation)."""
    v = curve.vertices
    seg = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    L = s[-1]
    target = np.arange(curve.m) * (L / curve.m)
    vv = np.vstack([v, v[:1]])
    ss = np.concatenate([curve.sigma, curve.sigma[:1]])
    out = np.stack([np.interp(target, s, vv[:, 0]), np.interp(target, s, vv[:, 1])], axis=1)
    return PlaneCurve(out, np.interp(target, s, ss))


@dataclass
class CurveRunRecord:
    """Snapshots of a curve run; geometry is computed on demand."""

    times: np.ndarray
    vertices: np.ndarray
    sigma: np.ndarray
    termination: str = T_END
    message: str = ""
    dt: float = 0.0
    _geom: dict = field(default=None, repr=False)

    @property
    def n_snapshots(self):
        return len(self.times)

    def curve(self, k):
        return PlaneCurve(self.vertices[k], self.sigma[k])

    def geometry(self):
        """Stacked (tx, ty, nx, ny, H, dmu, turn, edge), each of shape (K, m)."""
        if self._geom is None:
            out = polygon_geometry(self.vertices[..., 0], self.vertices[..., 1], check=False)
            self._geom = dict(zip(("tx", "ty", "nx", "ny", "H", "dmu", "turn", "edge"), out))
        return self._geom

    @property
    def snapshots(self):
        return [(float(t), self.curve(k), curve_geometry(self.curve(k)))
                for k, t in enumerate(self.times)]

    def mean_radius(self):
        c = self.vertices.mean(axis=1, keepdims=True)
        return np.mean(np.hypot(*(self.vertices - c).transpose(2, 0, 1)), axis=1)

    def write_csv(self, path):
        g = self.geometry()
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "vertex", "x", "y", "sigma", "H", "dmu"])
            for k, t in enumerate(self.times):
                for i in range(self.vertices.shape[1]):
                    wr.writerow([repr(float(t)), i, repr(float(self.vertices[k, i, 0])),
                                 repr(float(self.vertices[k, i, 1])), repr(float(self.sigma[k, i])),
                                 repr(float(g["H"][k, i])), repr(float(g["dmu"][k, i]))])


def run_curve(initial, dt, t_end, output_every=1, h_max=1e6, edge_fraction=1e-6,
              redistribute_every=None):
    """Integrate the flow with RK4 at fixed ``dt``.

    Stops at ``t_end`` or on collapse: min edge below ``edge_fraction`` times the
    initial mean edge, max |H| above ``h_max``, or a step too large to resolve
    (|sigma H| dt > 1/8, or sqrt(e) dt above the shortest edge). A stage with
    degenerate or inverted geometry ends the run with ``termination = "quality"``.

    Raises
    ------
    BlowUpError
        If the state becomes non-finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    v = initial.vertices.copy()
    s = initial.sigma.copy()
    edge0 = float(np.mean(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))
    area_sign = math.copysign(1.0, signed_area(v))
    times, verts, sigs = [0.0], [v.copy()], [s.copy()]
    termination, message = T_END, ""
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    k = 0
    t = 0.0
    while k < n_steps:
        k1v, k1s, H, emin, emean = kernels.curve_rhs(v, s)
        if emin < edge_fraction * edge0 or not emin >= 1e-14 * emean:
            termination, message = COLLAPSE, f"edge {emin:.3g} at t={t:.6g}"
            break
        hmax = float(np.max(np.abs(H)))
        if hmax > h_max:
            termination, message = COLLAPSE, f"|H| = {hmax:.3g} at t={t:.6g}"
            break
        if (dt * float(np.max(np.abs(s * H))) > 0.125
                or dt * math.sqrt(float(np.max(energy_density(s, 1)))) > emin):
            termination, message = COLLAPSE, f"step unresolved at t={t:.6g}"
            break
        h = min(dt, t_end - k * dt)
        try:
            k2v, k2s = _rhs(v + 0.5 * h * k1v, s + 0.5 * h * k1s)
            k3v, k3s = _rhs(v + 0.5 * h * k2v, s + 0.5 * h * k2s)
            k4v, k4s = _rhs(v + h * k3v, s + h * k3s)
        except DegenerateGeometryError as exc:
            termination, message = QUALITY, str(exc)
            break
        vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        sn = s + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        tn = (k + 1) * dt if k + 1 < n_steps else t_end
        if not (np.all(np.isfinite(vn)) and np.all(np.isfinite(sn))):
            raise BlowUpError(tn, "nonfinite", "curve state became non-finite")
        if math.copysign(1.0, signed_area(vn)) != area_sign:
            termination, message = QUALITY, f"orientation flipped at t={tn:.6g}"
            break
        k += 1
        v, s, t = vn, sn, tn
        if redistribute_every and k % redistribute_every == 0:
            c = redistribute_arclength(PlaneCurve(v, s))
            v, s = c.vertices, c.sigma
        if k % output_every == 0 or k == n_steps:
            times.append(t)
            verts.append(v.copy())
            sigs.append(s.copy())
    if times[-1] != t:
        # keep the last accepted state
        times.append(t)
        verts.append(v.copy())
        sigs.append(s.copy())
    return CurveRunRecord(times=np.array(times), vertices=np.array(verts),
                          sigma=np.array(sigs), termination=termination,
                          message=message, dt=float(dt))


def _stencil(times, k):
    """Indices and weights (first, second derivative) about snapshot k."""
    K = len(times)
    if K < 3:
        raise ValueError("need at least 3 snapshots")
    if k < 0:
        k += K
    c = min(max(k, 1), K - 2)
    idx = (c - 1, c, c + 1)
    tm, t0, tp = (times[i] for i in idx)
    x = times[k]
    pts = np.array([tm, t0, tp])
    # Lagrange weights for first and second derivative at x
    d1 = np.empty(3)
    d2 = np.empty(3)
    for j in range(3):
        others = [pts[i] for i in range(3) if i != j]
        den = np.prod([pts[j] - o for o in others])
        d1[j] = ((x - others[0]) + (x - others[1])) / den
        d2[j] = 2.0 / den
    return idx, d1, d2


@dataclass(frozen=True)
class FlowKinematics:
    """Normal/tangential split of the discrete velocity and acceleration."""

    sigma: np.ndarray
    S: np.ndarray
    alpha: np.ndarray
    A: np.ndarray


def decompose_kinematics(record, index):
    """Finite-difference velocity and acceleration at snapshot ``index``.

    Three-point differences over neighbouring snapshots are projected onto the
    inward normal and the unit tangent of the curve at ``index``.
    """
    idx, d1, d2 = _stencil(record.times, index)
    F = record.vertices
    vel = sum(w * F[i] for w, i in zip(d1, idx))
    acc = sum(w * F[i] for w, i in zip(d2, idx))
    g = record.geometry()
    k = index
    tang = np.stack([g["tx"][k], g["ty"][k]], axis=1)
    nu = np.stack([g["nx"][k], g["ny"][k]], axis=1)
    return FlowKinematics(
        sigma=np.sum(vel * nu, axis=1),
        S=np.sum(vel * tang, axis=1),
        alpha=np.sum(acc * nu, axis=1),
        A=np.sum(acc * tang, axis=1),
    )


@dataclass(frozen=True)
class IdentityResiduals:
    """Residuals of d(dmu)/dt = -sigma H dmu (relative to dmu) and dH/dt = lap sigma + sigma H^2."""

    dmu: np.ndarray
    H: np.ndarray
    times: np.ndarray

    @property
    def max_dmu(self):
        return float(np.max(self.dmu))

    @property
    def max_H(self):
        return float(np.max(self.H))


def arclength_laplacian(sigma, dmu):
    return (np.roll(sigma, -1, axis=-1) - 2.0 * sigma + np.roll(sigma, 1, axis=-1)) / dmu ** 2


def verify_normal_flow_identities(record, t_max=None):
    """Per-snapshot max residuals of the two normal-flow evolution identities.

    Interior snapshots only; time derivatives are three-point differences.
    """
    K = record.n_snapshots
    if K < 3:
        raise ValueError("need at least 3 snapshots")
    g = record.geometry()
    t = record.times
    rd, rh, ts = [], [], []
    for k in range(1, K - 1):
        if t_max is not None and t[k] > t_max:
            break
        idx, d1, _ = _stencil(t, k)
        ddmu = sum(w * g["dmu"][i] for w, i in zip(d1, idx))
        dH = sum(w * g["H"][i] for w, i in zip(d1, idx))
        s, H, dmu = record.sigma[k], g["H"][k], g["dmu"][k]
        rd.append(float(np.max(np.abs(ddmu + s * H * dmu) / dmu)))
        rh.append(float(np.max(np.abs(dH - arclength_laplacian(s, dmu) - s * H * H))))
        ts.append(float(t[k]))
    return IdentityResiduals(dmu=np.array(rd), H=np.array(rh), times=np.array(ts))


def compatibility_residual(record, index):
    """Max over edges of |d/dt (F_{i+1} - F_i) - (sigma nu)_{i+1} + (sigma nu)_i|.

    The time derivative is a three-point difference of snapshots; the velocity
    difference is evaluated at snapshot ``index``.
    """
    idx, d1, _ = _stencil(record.times, index)
    dF = np.roll(record.vertices, -1, axis=1) - record.vertices
    lhs = sum(w * dF[i] for w, i in zip(d1, idx))
    g = record.geometry()
    vel = record.sigma[index][:, None] * np.stack([g["nx"][index], g["ny"][index]], axis=1)
    rhs = np.roll(vel, -1, axis=0) - vel
    return float(np.max(np.hypot(*(lhs - rhs).T)))
