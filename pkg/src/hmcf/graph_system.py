"""Conservation-law structure of the graph flow.

Unknowns are sigma (normal speed) and b = Du. In 1D the quasilinear form is
U_t - A(a, b) U_x = 0 with a = sigma; see :func:`jacobian_1d`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonInvertibleStateError
from .geometry import energy_density

CONVEXITY_BOUND = 0.5


@dataclass(frozen=True)
class ConservedState:
    sigma: float
    b: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float)).copy()
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", float(self.sigma))
        if not (np.isfinite(self.sigma) and np.all(np.isfinite(b))):
            raise ValueError("state must be finite")

    @property
    def n(self):
        return self.b.size

    @property
    def hyperbolic_convex(self):
        return bool(self.b @ self.b < CONVEXITY_BOUND)

    def vector(self):
        return np.concatenate([[self.sigma], self.b])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1:])


@dataclass(frozen=True)
class SymmetricVariables:
    a: float
    c: np.ndarray


@dataclass(frozen=True)
class EigenStructure1D:
    lambda_plus: float
    lambda_minus: float
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    gnl: float
    dlambda_plus: np.ndarray
    dlambda_minus: np.ndarray


def _w(b):
    return float(np.sqrt(1.0 + b @ b))


def flux(state):
    """Physical fluxes f^j so that U_t + sum_j d_j f^j(U) = 0.

    Returns an array of shape (n, n+1): row j is the flux in direction j,
    ordered (sigma, b_1, ..., b_n).
    """
    n = state.n
    w = _w(state.b)
    e = energy_density(state.sigma, n)
    out = np.zeros((n, n + 1))
    for j in range(n):
        out[j, 0] = -e * state.b[j] / w
        out[j, 1 + j] = -state.sigma * w
    return out


def entropy(state):
    """Mathematical entropy E = e(sigma) w(b)."""
    return float(energy_density(state.sigma, state.n) * _w(state.b))


def entropy_gradient(state):
    """(dE/dsigma, dE/db) = (sigma w, e b / w)."""
    w = _w(state.b)
    e = energy_density(state.sigma, state.n)
    return np.concatenate([[state.sigma * w], e * state.b / w])


def entropy_hessian(state):
    s, b, n = state.sigma, state.b, state.n
    w = _w(b)
    e = energy_density(s, n)
    out = np.empty((n + 1, n + 1))
    out[0, 0] = w
    out[0, 1:] = out[1:, 0] = s * b / w
    out[1:, 1:] = (e / w) * (np.eye(n) - np.outer(b, b) / (w * w))
    return out


def is_strictly_convex(state, eps=0.005):
    """Certify strict convexity of E inside the region |b|^2 <= 1/2 - eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if state.b @ state.b > CONVEXITY_BOUND - eps:
        return False
    return bool(np.linalg.eigvalsh(entropy_hessian(state))[0] > 0.0)


def symmetric_variables(state):
    g = entropy_gradient(state)
    return SymmetricVariables(a=float(g[0]), c=g[1:].copy())


def invert_symmetric_variables(sym, n=None, tol=1e-13, max_iter=100):
    """Recover (sigma, b) from (a, c) = grad E by damped Newton iteration.

    Raises
    ------
    NonInvertibleStateError
        If the iteration does not converge within ``max_iter`` steps.
    """
    c = np.atleast_1d(np.asarray(sym.c, dtype=float))
    n = c.size if n is None else n
    target = np.concatenate([[sym.a], c])
    # a = sigma w and c = e b / w give a cheap starting point
    x = np.concatenate([[sym.a], c / energy_density(sym.a, n)])
    scale = max(1.0, float(np.max(np.abs(target))))
    for _ in range(max_iter):
        st = ConservedState.from_vector(x)
        r = entropy_gradient(st) - target
        if np.max(np.abs(r)) <= tol * scale:
            return st
        try:
            dx = np.linalg.solve(entropy_hessian(st), r)
        except np.linalg.LinAlgError as exc:
            raise NonInvertibleStateError("singular entropy Hessian") from exc
        damping = 0.5 if st.b @ st.b >= CONVEXITY_BOUND else 1.0
        x = x - damping * dx
        if not np.all(np.isfinite(x)):
            break
    raise NonInvertibleStateError(
        f"symmetric-variable inversion did not converge in {max_iter} iterations")


def _rotation_to_first_axis(v):
    """Orthogonal Q with Q @ v = |v| e_1 (Householder reflection)."""
    n = v.size
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.eye(n)
    target = np.zeros(n)
    target[0] = norm
    u = v - target
    un = float(u @ u)
    if un < 1e-300:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(u, u) / un


def hyperbolicity_matrix(sigma, du):
    """Principal-symbol matrix A^{alpha beta} of the second-order graph equation."""
    du = np.atleast_1d(np.asarray(du, dtype=float))
    n = du.size
    w2 = 1.0 + du @ du
    w = np.sqrt(w2)
    e = energy_density(sigma, n)
    ginv = np.eye(n) - np.outer(du, du) / w2
    A = np.empty((n + 1, n + 1))
    A[0, 0] = -1.0
    A[0, 1:] = A[1:, 0] = sigma * du / w
    A[1:, 1:] = (e + sigma * sigma) * ginv - sigma * sigma * np.eye(n)
    return A


def hyperbolicity_minors(sigma, du):
    """Leading principal minors d_0..d_n of A in a basis adapted to Du."""
    du = np.atleast_1d(np.asarray(du, dtype=float))
    n = du.size
    A = hyperbolicity_matrix(sigma, du)
    R = np.eye(n + 1)
    R[1:, 1:] = _rotation_to_first_axis(du)
    Ad = R @ A @ R.T
    return np.array([np.linalg.det(Ad[:k + 1, :k + 1]) for k in range(n + 1)])


def jacobian_1d(a, b):
    """Matrix A(a, b) of the 1D system (a, b)_t - A (a, b)_x = 0."""
    w = np.sqrt(1.0 + b * b)
    return np.array([[a * b, (1.0 + a * a) / (2.0 * (1.0 + b * b))],
                     [1.0 + b * b, a * b]]) / w


def eigenstructure_1d(a, b):
    w = np.sqrt(1.0 + b * b)
    q = np.sqrt(0.5 * (1.0 + a * a))
    lp = (a * b + q) / w
    lm = (a * b - q) / w
    m0 = np.sqrt(1.0 + a * a) / (np.sqrt(2.0) * (1.0 + b * b))
    mu_p = np.array([m0, 1.0])
    mu_m = np.array([-m0, 1.0])

    def grad(sign):
        return np.array([b + sign * a / (2.0 * q),
                         a - b / (1.0 + b * b) * (a * b + sign * q)]) / w

    return EigenStructure1D(
        lambda_plus=float(lp), lambda_minus=float(lm),
        mu_plus=mu_p, mu_minus=mu_m,
        gnl=float(3.0 * a / (2.0 * (1.0 + b * b) ** 1.5)),
        dlambda_plus=grad(1.0), dlambda_minus=grad(-1.0),
    )


def conserved_quantity_residual(eta, a, b, h=1e-4):
    """|eta_aa - 2(1+b^2)^2/(1+a^2) eta_bb| by central differences of step h."""
    if h <= 0:
        raise ValueError("h must be positive")
    ha = (a + h) - a
    hb = (b + h) - b
    f0 = eta(a, b)
    eta_aa = (eta(a + ha, b) - 2.0 * f0 + eta(a - ha, b)) / (ha * ha)
    eta_bb = (eta(a, b + hb) - 2.0 * f0 + eta(a, b - hb)) / (hb * hb)
    return abs(eta_aa - 2.0 * (1.0 + b * b) ** 2 / (1.0 + a * a) * eta_bb)
