# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py``.

Same signatures and return conventions; curve geometry accepts 1D or 2D
(stacked snapshot) arrays.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, atan2

cnp.import_array()


cdef inline double _norm(double x, double y) noexcept nogil:
    # plain sqrt: inputs are O(1) coordinates, and libm hypot is several times slower
    return sqrt(x * x + y * y)

LAX_FRIEDRICHS = 0
RUSANOV = 1


cdef void _geom_row(const double* x, const double* y, Py_ssize_t m,
                    double* tx, double* ty, double* nx, double* ny,
                    double* turn, double* dmu, double* edge) noexcept nogil:
    cdef Py_ssize_t i, ip, im
    cdef double ex, ey, px, py, cx, cy, cn
    for i in range(m):
        ip = i + 1 if i + 1 < m else 0
        edge[i] = _norm(x[ip] - x[i], y[ip] - y[i])
    for i in range(m):
        ip = i + 1 if i + 1 < m else 0
        im = i - 1 if i > 0 else m - 1
        ex = x[ip] - x[i]
        ey = y[ip] - y[i]
        px = x[i] - x[im]
        py = y[i] - y[im]
        turn[i] = atan2(px * ey - py * ex, px * ex + py * ey)
        dmu[i] = 0.5 * (edge[im] + edge[i])
        cx = px + ex
        cy = py + ey
        cn = _norm(cx, cy)
        tx[i] = cx / cn
        ty[i] = cy / cn
        nx[i] = -ty[i]
        ny[i] = tx[i]


def curve_geometry(x, y):
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ya = np.ascontiguousarray(y, dtype=np.float64)
    shape = xa.shape
    cdef Py_ssize_t m = shape[len(shape) - 1]
    cdef const double[:, ::1] xv = xa.reshape(-1, m)
    cdef const double[:, ::1] yv = ya.reshape(-1, m)
    cdef Py_ssize_t rows = xv.shape[0]
    outs = [np.empty((rows, m)) for _ in range(7)]
    cdef double[:, ::1] tx = outs[0], ty = outs[1], nx = outs[2], ny = outs[3]
    cdef double[:, ::1] turn = outs[4], dmu = outs[5], edge = outs[6]
    cdef Py_ssize_t k
    if m > 0:
        with nogil:
            for k in range(rows):
                _geom_row(&xv[k, 0], &yv[k, 0], m, &tx[k, 0], &ty[k, 0], &nx[k, 0],
                          &ny[k, 0], &turn[k, 0], &dmu[k, 0], &edge[k, 0])
    return tuple(o.reshape(shape) for o in outs)


def wave_speed_1d(sigma, b, double n_e=1.0):
    cdef const double[::1] s = np.ascontiguousarray(sigma, dtype=np.float64).ravel()
    cdef const double[::1] bb = np.ascontiguousarray(b, dtype=np.float64).ravel()
    out = np.empty(s.shape[0])
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double w, e
    with nogil:
        for i in range(s.shape[0]):
            w = sqrt(1.0 + bb[i] * bb[i])
            e = 0.5 * (s[i] * s[i] + n_e)
            o[i] = (fabs(s[i] * bb[i]) + sqrt(e)) / w
    return out.reshape(np.shape(sigma))


def wave_speed_2d(sigma, b1, b2):
    shape = np.shape(sigma)
    cdef const double[::1] s = np.ascontiguousarray(sigma, dtype=np.float64).ravel()
    cdef const double[::1] p = np.ascontiguousarray(b1, dtype=np.float64).ravel()
    cdef const double[::1] q = np.ascontiguousarray(b2, dtype=np.float64).ravel()
    rx = np.empty(s.shape[0])
    ry = np.empty(s.shape[0])
    cdef double[::1] ox = rx
    cdef double[::1] oy = ry
    cdef Py_ssize_t i
    cdef double w, e
    with nogil:
        for i in range(s.shape[0]):
            w = sqrt(1.0 + p[i] * p[i] + q[i] * q[i])
            e = 0.5 * (s[i] * s[i] + 2.0)
            ox[i] = (fabs(s[i] * p[i]) + sqrt(e * (1.0 + q[i] * q[i]))) / w
            oy[i] = (fabs(s[i] * q[i]) + sqrt(e * (1.0 + p[i] * p[i]))) / w
    return rx.reshape(shape), ry.reshape(shape)


cdef inline Py_ssize_t _nbr(Py_ssize_t i, Py_ssize_t n, bint periodic, bint left) noexcept nogil:
    # cell on the left (left=True) or right of interface i (i = 0..n)
    if left:
        if i > 0:
            return i - 1
        return n - 1 if periodic else 0
    if i < n:
        return i
    return 0 if periodic else n - 1


def fv_rhs_1d(sigma, b, double dx, int scheme, bint periodic, double n_e=1.0):
    cdef const double[::1] s = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef const double[::1] bb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t i, l, r
    fs_a = np.empty(n)
    fb_a = np.empty(n)
    rho_a = np.empty(n)
    # interface i holds the flux at i-1/2, i = 0..n
    ns_a = np.empty(n + 1)
    nb_a = np.empty(n + 1)
    rs_a = np.empty(n)
    rb_a = np.empty(n)
    cdef double[::1] fs = fs_a, fb = fb_a, rho = rho_a
    cdef double[::1] ns = ns_a, nb = nb_a, rs = rs_a, rb = rb_a
    cdef double w, e, amax = 0.0, alpha
    with nogil:
        for i in range(n):
            w = sqrt(1.0 + bb[i] * bb[i])
            e = 0.5 * (s[i] * s[i] + n_e)
            fs[i] = -e * bb[i] / w
            fb[i] = -s[i] * w
            rho[i] = (fabs(s[i] * bb[i]) + sqrt(e)) / w
            if rho[i] > amax:
                amax = rho[i]
        for i in range(n + 1):
            # left cell l = i-1, right cell r = i
            l = _nbr(i, n, periodic, True)
            r = _nbr(i, n, periodic, False)
            if scheme == 0:
                alpha = amax
            else:
                alpha = rho[l] if rho[l] > rho[r] else rho[r]
            ns[i] = 0.5 * (fs[l] + fs[r]) - 0.5 * alpha * (s[r] - s[l])
            nb[i] = 0.5 * (fb[l] + fb[r]) - 0.5 * alpha * (bb[r] - bb[l])
        for i in range(n):
            rs[i] = -(ns[i + 1] - ns[i]) / dx
            rb[i] = -(nb[i + 1] - nb[i]) / dx
    return rs_a, rb_a, amax


def fv_rhs_2d(sigma, b1, b2, double dx, double dy, int scheme, bint periodic):
    cdef const double[:, ::1] s = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(b1, dtype=np.float64)
    cdef const double[:, ::1] q = np.ascontiguousarray(b2, dtype=np.float64)
    cdef Py_ssize_t nx = s.shape[0], ny = s.shape[1]
    cdef Py_ssize_t i, j, l, r
    shape = (nx, ny)
    f1_a = np.empty(shape); f2_a = np.empty(shape); sw_a = np.empty(shape)
    rx_a = np.empty(shape); ry_a = np.empty(shape)
    out_s = np.zeros(shape); out_p = np.zeros(shape); out_q = np.zeros(shape)
    cdef double[:, ::1] f1 = f1_a, f2 = f2_a, sw = sw_a, rx = rx_a, ry = ry_a
    cdef double[:, ::1] os = out_s, op = out_p, oq = out_q
    cdef double w, e, axm = 0.0, aym = 0.0, alpha
    cdef double n0, n1, n2, m0, m1, m2
    with nogil:
        for i in range(nx):
            for j in range(ny):
                w = sqrt(1.0 + p[i, j] * p[i, j] + q[i, j] * q[i, j])
                e = 0.5 * (s[i, j] * s[i, j] + 2.0)
                f1[i, j] = -e * p[i, j] / w
                f2[i, j] = -e * q[i, j] / w
                sw[i, j] = s[i, j] * w
                rx[i, j] = (fabs(s[i, j] * p[i, j]) + sqrt(e * (1.0 + q[i, j] * q[i, j]))) / w
                ry[i, j] = (fabs(s[i, j] * q[i, j]) + sqrt(e * (1.0 + p[i, j] * p[i, j]))) / w
                if rx[i, j] > axm:
                    axm = rx[i, j]
                if ry[i, j] > aym:
                    aym = ry[i, j]
        # x sweep: numerical flux at i-1/2 minus flux at i+1/2, accumulated per cell
        for j in range(ny):
            for i in range(nx):
                l = _nbr(i, nx, periodic, True)
                r = _nbr(i, nx, periodic, False)
                alpha = axm if scheme == 0 else (rx[l, j] if rx[l, j] > rx[r, j] else rx[r, j])
                n0 = 0.5 * (f1[l, j] + f1[r, j]) - 0.5 * alpha * (s[r, j] - s[l, j])
                n1 = 0.5 * (-sw[l, j] + -sw[r, j]) - 0.5 * alpha * (p[r, j] - p[l, j])
                n2 = 0.5 * (0.0 + 0.0) - 0.5 * alpha * (q[r, j] - q[l, j])
                l = _nbr(i + 1, nx, periodic, True)
                r = _nbr(i + 1, nx, periodic, False)
                alpha = axm if scheme == 0 else (rx[l, j] if rx[l, j] > rx[r, j] else rx[r, j])
                m0 = 0.5 * (f1[l, j] + f1[r, j]) - 0.5 * alpha * (s[r, j] - s[l, j])
                m1 = 0.5 * (-sw[l, j] + -sw[r, j]) - 0.5 * alpha * (p[r, j] - p[l, j])
                m2 = 0.5 * (0.0 + 0.0) - 0.5 * alpha * (q[r, j] - q[l, j])
                os[i, j] = -(m0 - n0) / dx
                op[i, j] = -(m1 - n1) / dx
                oq[i, j] = -(m2 - n2) / dx
        for i in range(nx):
            for j in range(ny):
                l = _nbr(j, ny, periodic, True)
                r = _nbr(j, ny, periodic, False)
                alpha = aym if scheme == 0 else (ry[i, l] if ry[i, l] > ry[i, r] else ry[i, r])
                n0 = 0.5 * (f2[i, l] + f2[i, r]) - 0.5 * alpha * (s[i, r] - s[i, l])
                n1 = 0.5 * (0.0 + 0.0) - 0.5 * alpha * (p[i, r] - p[i, l])
                n2 = 0.5 * (-sw[i, l] + -sw[i, r]) - 0.5 * alpha * (q[i, r] - q[i, l])
                l = _nbr(j + 1, ny, periodic, True)
                r = _nbr(j + 1, ny, periodic, False)
                alpha = aym if scheme == 0 else (ry[i, l] if ry[i, l] > ry[i, r] else ry[i, r])
                m0 = 0.5 * (f2[i, l] + f2[i, r]) - 0.5 * alpha * (s[i, r] - s[i, l])
                m1 = 0.5 * (0.0 + 0.0) - 0.5 * alpha * (p[i, r] - p[i, l])
                m2 = 0.5 * (-sw[i, l] + -sw[i, r]) - 0.5 * alpha * (q[i, r] - q[i, l])
                os[i, j] = os[i, j] + -(m0 - n0) / dy
                op[i, j] = op[i, j] + -(m1 - n1) / dy
                oq[i, j] = oq[i, j] + -(m2 - n2) / dy
    return out_s, out_p, out_q, axm, aym


def curve_rhs(v, sigma):
    cdef const double[:, ::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] s = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef Py_ssize_t m = vv.shape[0]
    vel_a = np.empty((m, 2))
    sd_a = np.empty(m)
    H_a = np.empty(m)
    cdef double[:, ::1] vel = vel_a
    cdef double[::1] sd = sd_a, H = H_a
    cdef Py_ssize_t i, ip, im
    cdef double ex, ey, px, py, cx, cy, cn, el, pl, emin = 1e300, esum = 0.0
    with nogil:
        for i in range(m):
            ip = i + 1 if i + 1 < m else 0
            im = i - 1 if i > 0 else m - 1
            ex = vv[ip, 0] - vv[i, 0]
            ey = vv[ip, 1] - vv[i, 1]
            px = vv[i, 0] - vv[im, 0]
            py = vv[i, 1] - vv[im, 1]
            el = _norm(ex, ey)
            pl = _norm(px, py)
            if el < emin:
                emin = el
            esum = esum + el
            H[i] = atan2(px * ey - py * ex, px * ex + py * ey) / (0.5 * (pl + el))
            cx = px + ex
            cy = py + ey
            cn = _norm(cx, cy)
            # inward normal is the unit tangent rotated by +90 degrees
            vel[i, 0] = -s[i] * (cy / cn)
            vel[i, 1] = s[i] * (cx / cn)
            sd[i] = 0.5 * (s[i] * s[i] + 1.0) * H[i]
    return vel_a, sd_a, H_a, emin, esum / m
