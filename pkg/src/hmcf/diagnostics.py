"""Conservation laws, balance laws and curvature budgets for curve runs.

Signs: ``nu`` is the inward normal and H > 0 on counterclockwise convex
curves. All time integrals use the trapezoid rule over snapshots, and vertex
``i`` is tracked by index across snapshots.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .curve_flow import _stencil, decompose_kinematics
from .geometry import energy_density, polygon_geometry


def gamma(sigma, n=1):
    """gamma(sigma) = (2/sqrt n) atan(sigma/sqrt n); its derivative is 1/e."""
    rn = math.sqrt(n)
    return (2.0 / rn) * np.arctan(np.asarray(sigma, dtype=float) / rn)


def cumulative_trapezoid(f, t):
    """Running trapezoid integral along axis 0, starting from 0."""
    f = np.asarray(f, dtype=float)
    dt = np.diff(t).reshape((-1,) + (1,) * (f.ndim - 1))
    inc = 0.5 * (f[1:] + f[:-1]) * dt
    return np.concatenate([np.zeros((1,) + f.shape[1:]), np.cumsum(inc, axis=0)])


def max_drift(series):
    """max_t |X(t) - X(0)| (Euclidean norm for vector series)."""
    s = np.asarray(series, dtype=float)
    d = s - s[0]
    if d.ndim > 1:
        d = np.linalg.norm(d.reshape(d.shape[0], -1), axis=1)
    return float(np.max(np.abs(d)))


def curve_scale(record):
    """Perimeter of the initial curve."""
    return float(np.sum(record.geometry()["edge"][0]))


def _nu(g):
    return np.stack([g["nx"], g["ny"]], axis=-1)


def total_energy(record):
    """E_M(t) = sum of e dmu over vertices, one value per snapshot."""
    g = record.geometry()
    return np.sum(energy_density(record.sigma, 1) * g["dmu"], axis=1)


def linear_momentum(record):
    """Integral of sigma nu dmu; shape (K, 2)."""
    g = record.geometry()
    w = (record.sigma * g["dmu"])[..., None]
    return np.sum(w * _nu(g), axis=1)


def angular_momentum(record):
    """Integral of <sigma nu, Y(F)> dmu with Y(y) = (-y2, y1)."""
    g = record.geometry()
    F = record.vertices
    y = np.stack([-F[..., 1], F[..., 0]], axis=-1)
    return np.sum(record.sigma * g["dmu"] * np.sum(_nu(g) * y, axis=-1), axis=1)


def _parameter_derivative(F):
    m = F.shape[-2]
    h = 2.0 * np.pi / m
    return (np.roll(F, -1, axis=-2) - np.roll(F, 1, axis=-2)) / (2.0 * h)


def tangential_momentum(record, X):
    """p(t, X) = integral of S(X) dmu for a parameter-space field X.

    ``X`` holds one coefficient per vertex along d/dx, with parameter x in
    [0, 2 pi) at spacing 2 pi / m, so S(X) = X <dF/dt, F_x>. The velocity is
    the three-point time difference of the snapshots.
    """
    X = np.broadcast_to(np.asarray(X, dtype=float), (record.vertices.shape[1],))
    g = record.geometry()
    out = np.empty(record.n_snapshots)
    for k in range(record.n_snapshots):
        kin = decompose_kinematics(record, k)
        speed = np.linalg.norm(_parameter_derivative(record.vertices[k]), axis=-1)
        out[k] = float(np.sum(X * kin.S * speed * g["dmu"][k]))
    return out


def momentum_balance_residual(record):
    """d/dt integral <dF/dt, F> dmu minus integral (3e - 2) dmu, per snapshot.

    The closed-curve balance law for n = 1; dF/dt = sigma nu is taken from the
    state and the time derivative from three-point differences.
    """
    g = record.geometry()
    F = record.vertices
    G = np.sum(record.sigma * np.sum(_nu(g) * F, axis=-1) * g["dmu"], axis=1)
    rhs = np.sum((3.0 * energy_density(record.sigma, 1) - 2.0) * g["dmu"], axis=1)
    out = np.empty(record.n_snapshots)
    for k in range(record.n_snapshots):
        idx, d1, _ = _stencil(record.times, k)
        out[k] = sum(w * G[i] for w, i in zip(d1, idx)) - rhs[k]
    return out


def rotation_number(curve):
    """(1/2 pi) times the sum of H dmu, i.e. the total turning over 2 pi."""
    v = curve.vertices
    _, _, _, _, _, _, turn, _ = polygon_geometry(v[:, 0], v[:, 1])
    return float(np.sum(turn)) / (2.0 * np.pi)


def winding_number(curve, p):
    """Winding number of the curve around ``p``.

    Computed as -(1/2 pi) times the integral of <F - p, nu>/|F - p|^2 dmu. The
    minus sign compensates the inward normal, so a counterclockwise loop
    around ``p`` gives +1.
    """
    v = curve.vertices
    _, _, nx, ny, _, dmu, _, _ = polygon_geometry(v[:, 0], v[:, 1])
    d = v - np.asarray(p, dtype=float)
    r2 = np.sum(d * d, axis=1)
    if np.any(r2 == 0.0):
        raise ValueError("p lies on the curve")
    integrand = (d[:, 0] * nx + d[:, 1] * ny) / r2
    return -float(np.sum(integrand * dmu)) / (2.0 * np.pi)


@dataclass
class CurvatureBudget:
    """Curvature budget over a vertex subset U for every snapshot.

    ``H_time_integral`` and ``He_time_integral`` are cumulative from t = 0;
    ``pointwise_H_integral`` has one column per vertex of U.
    """

    n: int
    times: np.ndarray
    gamma: np.ndarray
    f_U: np.ndarray
    E_U: np.ndarray
    sigma_U: np.ndarray
    H_time_integral: np.ndarray
    He_time_integral: np.ndarray
    pointwise_H_integral: np.ndarray
    full_curve: bool = True

    @property
    def E_U0(self):
        return float(self.E_U[0])

    @property
    def E_U_drift(self):
        return max_drift(self.E_U) / abs(self.E_U0)

    @property
    def bu3_holds(self):
        bound = math.pi / math.sqrt(self.n) * self.E_U
        return bool(np.all(np.abs(self.f_U) < bound))

    @property
    def bu4_holds(self):
        return bool(np.all(np.abs(self.sigma_U) <= self.E_U / math.sqrt(self.n)))

    @property
    def bu1_bound(self):
        return 2.0 * math.pi / (self.n * math.sqrt(self.n)) * self.E_U0

    @property
    def bu1_discrepancy(self):
        """max_t | (1/n)|f_U(t) - f_U(0)| - |int int_U H dmu dt| |."""
        lhs = np.abs(self.f_U - self.f_U[0]) / self.n
        return float(np.max(np.abs(lhs - np.abs(self.H_time_integral))))

    @property
    def pointwise_gamma_residual(self):
        """max over snapshots and vertices of |int H dt - (gamma(t) - gamma(0))|."""
        dg = self.gamma - self.gamma[0]
        return float(np.max(np.abs(self.pointwise_H_integral - dg)))

    def flags(self):
        return {
            "bu1_within_bound": bool(np.max(np.abs(self.H_time_integral)) <= self.bu1_bound),
            "bu3": self.bu3_holds,
            "bu4": self.bu4_holds,
            "pointwise_bound": bool(np.max(np.abs(self.pointwise_H_integral))
                                    <= 2.0 * math.pi / math.sqrt(self.n)),
        }


def curvature_budget(record, U=None, k_max=None):
    """Curvature budget of a curve run over the vertex subset ``U`` (default all).

    ``k_max`` truncates the record to the first ``k_max`` snapshots.
    """
    n = 1
    m = record.vertices.shape[1]
    idx = np.arange(m) if U is None else np.unique(np.asarray(U, dtype=int))
    if idx.size == 0:
        raise ValueError("U must be nonempty")
    K = record.n_snapshots if k_max is None else int(k_max)
    g = record.geometry()
    t = record.times[:K]
    s = record.sigma[:K][:, idx]
    H = g["H"][:K][:, idx]
    dmu = g["dmu"][:K][:, idx]
    e = energy_density(s, n)
    gam = gamma(s, n)
    return CurvatureBudget(
        n=n,
        times=t,
        gamma=gam,
        f_U=np.sum((s + gam * e) * dmu, axis=1),
        E_U=np.sum(e * dmu, axis=1),
        sigma_U=np.sum(s * dmu, axis=1),
        H_time_integral=cumulative_trapezoid(np.sum(H * dmu, axis=1), t),
        He_time_integral=cumulative_trapezoid(np.sum(H * e * dmu, axis=1), t),
        pointwise_H_integral=cumulative_trapezoid(H, t),
        full_curve=idx.size == m,
    )


def pointwise_curvature_bound(record, vertex, k_max=None):
    """Time integral of H at one tracked vertex over the record.

    Equals gamma(t_end) - gamma(0) at that vertex up to quadrature error and is
    bounded by 2 pi / sqrt(n).
    """
    K = record.n_snapshots if k_max is None else int(k_max)
    H = record.geometry()["H"][:K, vertex]
    return float(cumulative_trapezoid(H, record.times[:K])[-1])


@dataclass
class ConservationReport:
    times: np.ndarray
    series: dict
    scale: float
    drifts: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, vals in self.series.items():
            if name == "momentum_balance_residual":
                self.drifts[name] = float(np.max(np.abs(vals)))
            else:
                self.drifts[name] = max_drift(vals)

    def columns(self):
        cols = {"t": self.times}
        for name, vals in self.series.items():
            vals = np.asarray(vals)
            if vals.ndim == 2:
                for j in range(vals.shape[1]):
                    cols[f"{name}_{'xy'[j]}"] = vals[:, j]
            else:
                cols[name] = vals
        return cols

    def write_csv(self, path):
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(list(cols))
            for row in zip(*cols.values()):
                wr.writerow([repr(float(v)) for v in row])

    def summary(self, flags=None):
        out = {"scale": self.scale, "max_drift": dict(self.drifts)}
        if flags:
            out["flags"] = dict(flags)
        return out

    def write_summary(self, path, flags=None):
        with open(path, "w") as fh:
            json.dump(self.summary(flags), fh, indent=2, sort_keys=True)
            fh.write("\n")


def conservation_report(record, X=None, point=(0.0, 0.0)):
    """Every conservation and balance diagnostic of a curve run."""
    m = record.vertices.shape[1]
    if X is None:
        X = np.cos(2.0 * np.pi * np.arange(m) / m)
    curves = [record.curve(k) for k in range(record.n_snapshots)]
    series = {
        "energy": total_energy(record),
        "linear_momentum": linear_momentum(record),
        "angular_momentum": angular_momentum(record),
        "tangential_momentum": tangential_momentum(record, X),
        "momentum_balance_residual": momentum_balance_residual(record),
        "rotation_number": np.array([rotation_number(c) for c in curves]),
        "winding_number": np.array([winding_number(c, point) for c in curves]),
    }
    return ConservationReport(times=record.times.copy(), series=series, scale=curve_scale(record))
