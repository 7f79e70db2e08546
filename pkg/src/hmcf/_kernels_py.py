"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_kernels_ext`` (Cython) must agree with
them to rounding. All curve kernels operate along the last axis so that a
stack of snapshots can be processed in one call.
"""

import numpy as np

LAX_FRIEDRICHS = 0
RUSANOV = 1


def curve_geometry(x, y):
    """Discrete tangent, inward normal, turning angle, lumped arclength.

    Parameters
    ----------
    x, y : ndarray, shape (..., m)
        Vertex coordinates of closed counterclockwise polygons.

    Returns
    -------
    tx, ty, nx, ny, turn, dmu, edge : ndarray, shape (..., m)
        ``edge[..., i]`` is the length of the edge from vertex i to i+1.
    """
    ex = np.roll(x, -1, axis=-1) - x
    ey = np.roll(y, -1, axis=-1) - y
    edge = np.hypot(ex, ey)
    # previous edge (i-1 -> i)
    px = np.roll(ex, 1, axis=-1)
    py = np.roll(ey, 1, axis=-1)
    pedge = np.roll(edge, 1, axis=-1)
    cross = px * ey - py * ex
    dot = px * ex + py * ey
    turn = np.arctan2(cross, dot)
    dmu = 0.5 * (pedge + edge)
    cx = px + ex
    cy = py + ey
    cn = np.hypot(cx, cy)
    tx = cx / cn
    ty = cy / cn
    return tx, ty, -ty, tx, turn, dmu, edge


def wave_speed_1d(sigma, b, n_e=1.0):
    """Per-cell spectral radius of the 1D flux Jacobian.

    ``n_e`` is the internal-energy constant in e = (sigma^2 + n_e)/2; it is
    2 when the 1D field is the cross-section of a plane wave in 2D.
    """
    w = np.sqrt(1.0 + b * b)
    e = 0.5 * (sigma * sigma + n_e)
    return (np.abs(sigma * b) + np.sqrt(e)) / w


def wave_speed_2d(sigma, b1, b2):
    """Per-cell spectral radii of the x- and y-directional flux Jacobians."""
    w = np.sqrt(1.0 + b1 * b1 + b2 * b2)
    e = 0.5 * (sigma * sigma + 2.0)
    rx = (np.abs(sigma * b1) + np.sqrt(e * (1.0 + b2 * b2))) / w
    ry = (np.abs(sigma * b2) + np.sqrt(e * (1.0 + b1 * b1))) / w
    return rx, ry


def _pad(a, axis, periodic):
    mode = "wrap" if periodic else "edge"
    width = [(0, 0)] * a.ndim
    width[axis] = (1, 1)
    return np.pad(a, width, mode=mode)


def _interface_alpha(rho, axis, scheme, periodic):
    if scheme == LAX_FRIEDRICHS:
        return np.max(rho)
    rp = _pad(rho, axis, periodic)
    lo = [slice(None)] * rho.ndim
    hi = [slice(None)] * rho.ndim
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    return np.maximum(rp[tuple(lo)], rp[tuple(hi)])


def _flux_difference(states, fluxes, alpha, axis, periodic, h):
    """-(F_{i+1/2} - F_{i-1/2}) / h for each component along ``axis``."""
    out = []
    nd = states[0].ndim
    lo = [slice(None)] * nd
    hi = [slice(None)] * nd
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    lo = tuple(lo)
    hi = tuple(hi)
    for u, f in zip(states, fluxes):
        up = _pad(u, axis, periodic)
        fp = _pad(f, axis, periodic)
        num = 0.5 * (fp[lo] + fp[hi]) - 0.5 * alpha * (up[hi] - up[lo])
        out.append(-(num[hi] - num[lo]) / h)
    return out


def fv_rhs_1d(sigma, b, dx, scheme, periodic, n_e=1.0):
    """Semi-discrete right-hand side of the 1D (sigma, b) system.

    Returns ``(rhs_sigma, rhs_b, alpha_max)``.
    """
    w = np.sqrt(1.0 + b * b)
    e = 0.5 * (sigma * sigma + n_e)
    f_sigma = -e * b / w
    f_b = -sigma * w
    rho = (np.abs(sigma * b) + np.sqrt(e)) / w
    alpha = _interface_alpha(rho, 0, scheme, periodic)
    rs, rb = _flux_difference((sigma, b), (f_sigma, f_b), alpha, 0, periodic, dx)
    return rs, rb, float(np.max(rho))


def fv_rhs_2d(sigma, b1, b2, dx, dy, scheme, periodic):
    """Unsplit semi-discrete right-hand side of the 2D system.

    Arrays have shape (nx, ny). Returns ``(rs, rb1, rb2, ax_max, ay_max)``.
    """
    w = np.sqrt(1.0 + b1 * b1 + b2 * b2)
    e = 0.5 * (sigma * sigma + 2.0)
    sw = sigma * w
    zero = np.zeros_like(sigma)
    rx = (np.abs(sigma * b1) + np.sqrt(e * (1.0 + b2 * b2))) / w
    ry = (np.abs(sigma * b2) + np.sqrt(e * (1.0 + b1 * b1))) / w
    states = (sigma, b1, b2)
    ax = _interface_alpha(rx, 0, scheme, periodic)
    ay = _interface_alpha(ry, 1, scheme, periodic)
    xs = _flux_difference(states, (-e * b1 / w, -sw, zero), ax, 0, periodic, dx)
    ys = _flux_difference(states, (-e * b2 / w, zero, -sw), ay, 1, periodic, dy)
    return (xs[0] + ys[0], xs[1] + ys[1], xs[2] + ys[2],
            float(np.max(rx)), float(np.max(ry)))


def curve_rhs(v, sigma):
    """Right-hand side of the normal curve flow for vertices ``v`` of shape (m, 2).

    Returns ``(vel, sigma_dot, H, min_edge, mean_edge)`` with vel = sigma nu and
    sigma_dot = (sigma^2 + 1)/2 * H.
    """
    v = np.asarray(v, dtype=float)
    tx, ty, nx, ny, turn, dmu, edge = curve_geometry(v[:, 0], v[:, 1])
    H = turn / dmu
    vel = np.empty_like(v)
    vel[:, 0] = sigma * nx
    vel[:, 1] = sigma * ny
    return vel, 0.5 * (sigma * sigma + 1.0) * H, H, float(edge.min()), float(edge.mean())
