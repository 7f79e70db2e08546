"""Conservative finite-volume integration of the graph system.

The system is U_t + sum_j d_j f^j(U) = 0 with U = (sigma, b_1, .., b_n) and
fluxes from :func:`hmcf.graph_system.flux`. Interface fluxes are
Lax-Friedrichs (one global wave-speed bound per axis and step) or Rusanov
(local bound from the two adjacent cells). The 2D update is unsplit.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BlowUpError, CFLViolation, ConvexityGuardError
from .geometry import OUTFLOW, PERIODIC, GraphField
from .graph_system import CONVEXITY_BOUND

LAX_FRIEDRICHS = "lax_friedrichs"
RUSANOV = "rusanov"
FORWARD_EULER = "forward_euler"
SSPRK2 = "ssprk2"

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

_SCHEME_CODE = {LAX_FRIEDRICHS: kernels.LAX_FRIEDRICHS, RUSANOV: kernels.RUSANOV}


@dataclass
class SolverConfig:
    flux_scheme: str = LAX_FRIEDRICHS
    cfl: float = 0.45
    integrator: str = FORWARD_EULER
    t_end: float = 1.0
    output_every: int = 1
    hyperbolicity_eps: float = 0.005
    # fixed time step; None selects dt from the CFL number every step
    dt: float = None
    # constant n in e = (sigma^2 + n)/2; None uses the field dimension
    energy_dim: int = None
    sigma_max: float = 1e6
    dt_min: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.flux_scheme not in _SCHEME_CODE:
            raise ValueError(f"unknown flux scheme {self.flux_scheme!r}")
        if self.integrator not in (FORWARD_EULER, SSPRK2):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")
        if self.hyperbolicity_eps <= 0:
            raise ValueError("hyperbolicity_eps must be positive")


def _n_e(field, energy_dim):
    return float(field.dim if energy_dim is None else energy_dim)


def max_wave_speed(field, energy_dim=None):
    """Largest characteristic speed per axis over all cells."""
    if not (np.all(np.isfinite(field.sigma)) and np.all(np.isfinite(field.b))):
        raise BlowUpError(0.0, "nonfinite", "non-finite state in max_wave_speed")
    if field.dim == 1:
        rho = kernels.wave_speed_1d(field.sigma, field.b[0], _n_e(field, energy_dim))
        return (float(np.max(rho)),)
    rx, ry = kernels.wave_speed_2d(field.sigma, field.b[0], field.b[1])
    return float(np.max(rx)), float(np.max(ry))


def _rhs(field, scheme, energy_dim):
    periodic = field.boundary == PERIODIC
    code = _SCHEME_CODE[scheme]
    if field.dim == 1:
        rs, rb, amax = kernels.fv_rhs_1d(field.sigma, field.b[0], field.spacing[0],
                                         code, periodic, _n_e(field, energy_dim))
        return rs, rb[None, :], (amax,)
    if energy_dim not in (None, 2):
        raise ValueError("2D fields use energy_dim = 2")
    rs, r1, r2, ax, ay = kernels.fv_rhs_2d(field.sigma, field.b[0], field.b[1],
                                          field.spacing[0], field.spacing[1],
                                          code, periodic)
    return rs, np.stack([r1, r2]), (ax, ay)


def stable_dt(field, config, speeds=None):
    """Largest step allowed by the CFL number (sum of axis rates in 2D)."""
    if speeds is None:
        speeds = max_wave_speed(field, config.energy_dim)
    rate = sum(a / h for a, h in zip(speeds, field.spacing))
    return math.inf if rate == 0.0 else config.cfl / rate


def _check_finite(sigma, b, t):
    if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(b))):
        raise BlowUpError(t, "nonfinite")


def step(field, config, dt, t=0.0):
    """Advance one step of size ``dt``.

    Raises
    ------
    CFLViolation
        If ``dt`` exceeds the CFL-admissible step of ``field``.
    BlowUpError
        If the update produces NaN or Inf; ``time`` is ``t + dt``.
    """
    rs, rb, speeds = _rhs(field, config.flux_scheme, config.energy_dim)
    limit = stable_dt(field, config, speeds)
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.6g} exceeds CFL limit {limit:.6g}")
    s1 = field.sigma + dt * rs
    b1 = field.b + dt * rb
    if config.integrator == SSPRK2:
        _check_finite(s1, b1, t + dt)
        stage = field.with_state(s1, b1)
        rs2, rb2, _ = _rhs(stage, config.flux_scheme, config.energy_dim)
        s1 = 0.5 * field.sigma + 0.5 * (s1 + dt * rs2)
        b1 = 0.5 * field.b + 0.5 * (b1 + dt * rb2)
    _check_finite(s1, b1, t + dt)
    return field.with_state(s1, b1)


def bv_norm(field):
    """TV(sigma) + TV(b); wraps around for periodic fields."""
    if field.dim != 1:
        raise ValueError("bv_norm is defined for 1D fields")
    total = 0.0
    for u in (field.sigma, field.b[0]):
        d = np.diff(u)
        total += float(np.sum(np.abs(d)))
        if field.boundary == PERIODIC:
            total += abs(float(u[0] - u[-1]))
    return total


def _total_variation(field):
    if field.dim == 1:
        return bv_norm(field)
    dx, dy = field.spacing
    total = 0.0
    for u in (field.sigma, field.b[0], field.b[1]):
        for axis, h_other in ((0, dy), (1, dx)):
            d = np.diff(u, axis=axis)
            s = float(np.sum(np.abs(d)))
            if field.boundary == PERIODIC:
                first = np.take(u, 0, axis=axis)
                last = np.take(u, -1, axis=axis)
                s += float(np.sum(np.abs(first - last)))
            total += s * h_other
    return total


def entropy_density(field, energy_dim=None):
    """Cellwise E(sigma, b) = (sigma^2 + n)/2 * w."""
    n = _n_e(field, energy_dim)
    return 0.5 * (field.sigma ** 2 + n) * field.w()


def total_entropy(field, energy_dim=None):
    return math.fsum(entropy_density(field, energy_dim).ravel()) * field.cell_volume


def field_diagnostics(field, energy_dim=None):
    vol = field.cell_volume
    out = {
        "mass_sigma": math.fsum(field.sigma.ravel()) * vol,
    }
    for i in range(field.dim):
        out[f"mass_b{i + 1}"] = math.fsum(field.b[i].ravel()) * vol
    out["entropy"] = total_entropy(field, energy_dim)
    out["bv"] = _total_variation(field)
    out["maxb2"] = float(np.max(field.b_squared()))
    return out


@dataclass
class SimulationRecord:
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    step_times: list = field(default_factory=list)
    step_entropy: list = field(default_factory=list)
    termination: str = ""
    message: str = ""
    n_steps: int = 0
    config: SolverConfig = None

    @property
    def snapshots(self):
        return list(zip(self.times, self.fields))

    def diagnostic(self, name):
        return np.array([d[name] for d in self.diagnostics])

    def snapshot_rows(self):
        """Rows of ``t,x[,y],sigma,b1[,b2]`` for every snapshot and cell."""
        for t, f in self.snapshots:
            coords = [c.ravel() for c in f.centers()]
            cols = coords + [f.sigma.ravel()] + [f.b[i].ravel() for i in range(f.dim)]
            for vals in zip(*cols):
                yield (t,) + vals

    def write_snapshots(self, path):
        dim = self.fields[0].dim
        header = ["t", "x"] + (["y"] if dim == 2 else []) + ["sigma", "b1"] + (["b2"] if dim == 2 else [])
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for row in self.snapshot_rows():
                wr.writerow([repr(float(v)) for v in row])

    def write_diagnostics(self, path):
        dim = self.fields[0].dim
        keys = ["mass_sigma"] + [f"mass_b{i + 1}" for i in range(dim)] + ["entropy", "bv", "maxb2"]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t"] + keys)
            for t, d in zip(self.times, self.diagnostics):
                wr.writerow([repr(float(t))] + [repr(float(d[k])) for k in keys])


def _guard_ok(field, eps):
    return float(np.max(field.b_squared())) < CONVEXITY_BOUND - eps


def run(initial, config):
    """Integrate from ``initial`` to ``config.t_end``.

    The returned record's ``termination`` is one of ``"t_end"``, ``"guard"``
    (left the certified convexity region), ``"blowup_nonfinite"``,
    ``"blowup_sigma"`` or ``"blowup_dt"``.
    """
    if not _guard_ok(initial, config.hyperbolicity_eps):
        raise ConvexityGuardError(
            f"initial |b|^2 must stay below 1/2 - eps = {CONVEXITY_BOUND - config.hyperbolicity_eps}")
    rec = SimulationRecord(config=config)
    ed = config.energy_dim
    cur = initial.copy()
    t = 0.0
    rec.times.append(t)
    rec.fields.append(cur)
    rec.diagnostics.append(field_diagnostics(cur, ed))
    rec.step_times.append(t)
    rec.step_entropy.append(rec.diagnostics[-1]["entropy"])
    k = 0
    tol = 1e-12 * config.t_end
    while t < config.t_end - tol:
        if config.dt is not None:
            dt = min(config.dt, config.t_end - t)
        else:
            dt = min(stable_dt(cur, config), config.t_end - t)
        if dt < config.dt_min and config.t_end - t > config.dt_min:
            rec.termination = "blowup_dt"
            rec.message = f"time step collapsed to {dt:.3g}"
            break
        try:
            nxt = step(cur, config, dt, t)
        except BlowUpError as exc:
            rec.termination = "blowup_nonfinite"
            rec.message = str(exc)
            break
        k += 1
        t = config.t_end if config.t_end - (t + dt) <= tol else t + dt
        cur = nxt
        rec.step_times.append(t)
        rec.step_entropy.append(total_entropy(cur, ed))
        stop = ""
        if float(np.max(np.abs(cur.sigma))) > config.sigma_max:
            stop = "blowup_sigma"
        elif not _guard_ok(cur, config.hyperbolicity_eps):
            stop = "guard"
        last = t >= config.t_end - tol
        if stop or last or k % config.output_every == 0:
            rec.times.append(t)
            rec.fields.append(cur)
            rec.diagnostics.append(field_diagnostics(cur, ed))
        if stop:
            rec.termination = stop
            rec.message = f"{stop} at t={t:.6g}"
            break
    else:
        rec.termination = "t_end"
    if not rec.termination:
        rec.termination = "t_end"
    rec.n_steps = k
    return rec


def uniform_grid_field(cells, length=1.0, boundary=PERIODIC, sigma=0.0, b=0.0, lower=0.0):
    """Field on a uniform grid from constants or callables of the cell centers."""
    cells = tuple(int(c) for c in np.atleast_1d(cells))
    dim = len(cells)
    length = np.broadcast_to(np.atleast_1d(np.asarray(length, dtype=float)), (dim,))
    lower = np.broadcast_to(np.atleast_1d(np.asarray(lower, dtype=float)), (dim,))
    spacing = tuple(float(L) / c for L, c in zip(length, cells))
    probe = GraphField(dim, cells, spacing, boundary, np.zeros(cells), np.zeros((dim,) + cells),
                       tuple(lower))
    xs = probe.centers()
    s = sigma(*xs) if callable(sigma) else np.full(cells, float(sigma))
    if callable(b):
        bv = np.asarray(b(*xs), dtype=float).reshape((dim,) + cells)
    else:
        bv = np.asarray(b, dtype=float).reshape((-1,) + (1,) * dim)
        bv = np.broadcast_to(bv, (dim,) + cells).copy()
    return probe.with_state(np.broadcast_to(s, cells).copy(), bv)


def sine_initial(cells, length=2.0 * np.pi, sigma_amplitude=0.1, b_amplitude=0.1,
                 wavenumber=1, boundary=PERIODIC):
    """1D data sigma = A sin(k x), b = B sin(k x) with k = 2 pi wavenumber / length."""
    k = 2.0 * np.pi * wavenumber / length
    return uniform_grid_field(cells, length, boundary,
                              sigma=lambda x: sigma_amplitude * np.sin(k * x),
                              b=lambda x: b_amplitude * np.sin(k * x))


def sine_initial_2d(cells, lengths=(2.0 * np.pi, 2.0 * np.pi), sigma_amplitude=0.1,
                    b_amplitude=(0.1, 0.1), wavenumber=1, boundary=PERIODIC):
    """2D data sigma = A sin(k x) sin(k y), b = (B1 sin(k x), B2 sin(k y))."""
    kx = 2.0 * np.pi * wavenumber / lengths[0]
    ky = 2.0 * np.pi * wavenumber / lengths[1]
    b1, b2 = b_amplitude
    return uniform_grid_field(cells, lengths, boundary,
                              sigma=lambda x, y: sigma_amplitude * np.sin(kx * x) * np.sin(ky * y),
                              b=lambda x, y: np.stack([b1 * np.sin(kx * x), b2 * np.sin(ky * y)]))


def riemann_initial(left, right, cells, length=1.0, boundary=OUTFLOW, lower=0.0):
    """Piecewise-constant 1D field with the jump at mid-domain.

    Both states must lie in the convexity region |b|^2 < 1/2.
    """
    for name, st in (("left", left), ("right", right)):
        if not st.hyperbolic_convex:
            raise ConvexityGuardError(f"{name} state violates |b|^2 < 1/2")
        if st.n != 1:
            raise ValueError("riemann_initial builds 1D fields")
    f = uniform_grid_field(cells, length, boundary, lower=lower)
    mid = lower + 0.5 * length
    x = f.centers()[0]
    sig = np.where(x < mid, left.sigma, right.sigma)
    b = np.where(x < mid, left.b[0], right.b[0])
    return f.with_state(sig, b[None, :])


def restrict(field, factor):
    """Block-average a field onto a grid coarser by ``factor`` per axis."""
    factor = int(factor)
    if factor == 1:
        return field.copy()
    if any(c % factor for c in field.cells):
        raise ValueError("cell counts must be divisible by the restriction factor")
    cells = tuple(c // factor for c in field.cells)

    def avg(u):
        if field.dim == 1:
            return u.reshape(cells[0], factor).mean(axis=1)
        return u.reshape(cells[0], factor, cells[1], factor).mean(axis=(1, 3))

    b = np.stack([avg(field.b[i]) for i in range(field.dim)])
    return GraphField(field.dim, cells, tuple(h * factor for h in field.spacing),
                      field.boundary, avg(field.sigma), b, field.lower)


@dataclass(frozen=True)
class TensorBump:
    """theta(t, x) = psi((t - t0)/tau) * prod_d psi((x_d - c_d)/l_d).

    ``psi(s) = exp(-1/(1 - s^2))`` on |s| < 1, zero outside.
    """

    t0: float
    tau: float
    centers: tuple
    widths: tuple

    @staticmethod
    def _psi(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        dout = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        q = 1.0 - s[inside] ** 2
        v = np.exp(-1.0 / q)
        out[inside] = v
        dout[inside] = v * (-2.0 * s[inside] / q ** 2)
        return out, dout

    def value(self, t, coords):
        """theta at time ``t`` on the points ``coords`` (one array per axis)."""
        out = self._psi((t - self.t0) / self.tau)[0] * np.ones_like(coords[0])
        for x, c, l in zip(coords, self.centers, self.widths):
            out = out * self._psi((x - c) / l)[0]
        return out

    def evaluate(self, t, coords):
        """Return (theta, theta_t, [theta_x_d]) on the cell centers ``coords``."""
        pt, dpt = self._psi((t - self.t0) / self.tau)
        vals = []
        for x, c, l in zip(coords, self.centers, self.widths):
            p, dp = self._psi((x - c) / l)
            vals.append((p, dp / l))
        space = np.ones_like(coords[0])
        for p, _ in vals:
            space = space * p
        grads = []
        for d in range(len(coords)):
            g = vals[d][1]
            for e, (p, _) in enumerate(vals):
                if e != d:
                    g = g * p
            grads.append(float(pt) * g)
        return float(pt) * space, float(dpt) / self.tau * space, grads


def bump_family(field, t_end, count=3):
    """Deterministic family of bumps supported inside (0, t_end) x domain."""
    dom = [(lo, lo + c * h) for lo, c, h in zip(field.lower, field.cells, field.spacing)]
    out = []
    for k in range(count):
        frac = (k + 1.0) / (count + 1.0)
        centers = tuple(a + (0.3 + 0.4 * frac) * (b - a) for a, b in dom)
        widths = tuple(0.25 * (b - a) for a, b in dom)
        out.append(TensorBump(t0=0.5 * t_end, tau=0.45 * t_end, centers=centers, widths=widths))
    return out


def weak_residual(record, test_functions=None):
    """Largest weak-form residual of the recorded solution.

    For each test function theta and each equation this evaluates the
    space-time integral of ``U theta_t + sum_j f^j(U) theta_j``. The
    quadrature telescopes: on each snapshot interval U theta_t becomes
    (U_k + U_{k+1})/2 * (theta_{k+1} - theta_k), and on each cell f^j theta_j
    becomes f^j times the increment of theta across the cell, integrated in
    time with the trapezoid rule. Constant states therefore give zero up to
    roundoff, and the result converges at the order of the scheme.
    """
    if not record.fields:
        raise ValueError("empty record")
    f0 = record.fields[0]
    t = np.asarray(record.times)
    if test_functions is None:
        test_functions = bump_family(f0, t[-1])
    ed = record.config.energy_dim if record.config is not None else None
    n_e = _n_e(f0, ed)
    dim = f0.dim
    coords = f0.centers()
    vol = f0.cell_volume
    faces = []
    for j in range(dim):
        hi = [c + (0.5 * f0.spacing[j] if d == j else 0.0) for d, c in enumerate(coords)]
        lo = [c - (0.5 * f0.spacing[j] if d == j else 0.0) for d, c in enumerate(coords)]
        faces.append((hi, lo))
    states = [np.concatenate([fk.sigma[None], fk.b]) for fk in record.fields]
    fluxes = []
    for fk in record.fields:
        w = fk.w()
        e = 0.5 * (fk.sigma ** 2 + n_e)
        per_axis = []
        for j in range(dim):
            fj = np.zeros((dim + 1,) + fk.cells)
            fj[0] = -e * fk.b[j] / w
            fj[1 + j] = -fk.sigma * w
            per_axis.append(fj)
        fluxes.append(per_axis)
    worst = 0.0
    for theta in test_functions:
        th = [theta.value(tk, coords) for tk in t]
        time_part = np.zeros(dim + 1)
        for k in range(len(t) - 1):
            u = 0.5 * (states[k] + states[k + 1])
            d = th[k + 1] - th[k]
            time_part += np.array([math.fsum((u[q] * d).ravel()) for q in range(dim + 1)])
        space = np.zeros((len(t), dim + 1))
        for k, tk in enumerate(t):
            for j, (hi, lo) in enumerate(faces):
                inc = theta.value(tk, hi) - theta.value(tk, lo)
                fj = fluxes[k][j]
                space[k] += np.array([math.fsum((fj[q] * inc).ravel()) for q in range(dim + 1)]) / f0.spacing[j]
        total = vol * (time_part + _trapezoid(space, t, axis=0))
        worst = max(worst, float(np.max(np.abs(total))))
    return worst


@dataclass(frozen=True)
class EntropyProduction:
    increments: np.ndarray
    admissible: bool


def entropy_production(record, slack=1e-12):
    """Per-step change of the total entropy; admissible if none exceeds ``slack`` relative."""
    if record.fields and record.fields[0].boundary != PERIODIC:
        raise ValueError("entropy production is tracked for periodic boundaries")
    s = np.asarray(record.step_entropy)
    inc = np.diff(s)
    ok = bool(np.all(inc <= slack * np.abs(s[1:])))
    return EntropyProduction(increments=inc, admissible=ok)


def relative_entropy_density(field, reference, eps=0.005, energy_dim=None):
    """Cellwise Q = E(U) - E(V) - DE(V).(U - V) with V the reference."""
    if field.cells != reference.cells or field.spacing != reference.spacing:
        raise ValueError("fields must share a grid")
    bound = 0.5 * (1.0 - eps)
    if np.max(field.b_squared()) > bound or np.max(reference.b_squared()) > bound:
        raise ConvexityGuardError(f"|b|^2 must not exceed (1 - eps)/2 = {bound}")
    n = _n_e(field, energy_dim)
    E = entropy_density(field, energy_dim)
    Ev = entropy_density(reference, energy_dim)
    wv = reference.w()
    ev = 0.5 * (reference.sigma ** 2 + n)
    q = E - Ev - reference.sigma * wv * (field.sigma - reference.sigma)
    for i in range(field.dim):
        q = q - ev * reference.b[i] / wv * (field.b[i] - reference.b[i])
    return q


def relative_entropy_distance(field, reference, eps=0.005, energy_dim=None):
    q = relative_entropy_density(field, reference, eps, energy_dim)
    return math.fsum(q.ravel()) * field.cell_volume


def l1_distance(field, reference):
    d = np.abs(field.sigma - reference.sigma) + np.sum(np.abs(field.b - reference.b), axis=0)
    return math.fsum(d.ravel()) * field.cell_volume
