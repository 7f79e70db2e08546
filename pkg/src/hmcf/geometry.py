"""Pointwise geometric quantities for graphs and discrete plane curves.

Sign conventions used throughout the package: the curve normal ``nu`` points
inward, and the curvature ``H`` is positive on a counterclockwise convex
curve. For graphs the normal is (-Du, 1)/w.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateGeometryError

PERIODIC = "periodic"
OUTFLOW = "outflow"


def energy_density(sigma, n):
    """Local energy density e = (sigma^2 + n) / 2."""
    sigma = np.asarray(sigma, dtype=float)
    return 0.5 * (sigma * sigma + n)


def graph_w(b):
    """w = sqrt(1 + |b|^2), ``b`` carried along the last axis."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return np.sqrt(1.0 + np.sum(b * b, axis=-1))


def graph_inverse_metric(b):
    """Inverse induced metric g^{ij} = delta^{ij} - b_i b_j / w^2 of a graph."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    w2 = 1.0 + b @ b
    return np.eye(b.size) - np.outer(b, b) / w2


def graph_metric(b):
    """Induced metric g_ij = delta_ij + b_i b_j."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return np.eye(b.size) + np.outer(b, b)


@dataclass(frozen=True)
class GraphGeometry:
    w: float
    inv_metric: np.ndarray
    h: np.ndarray
    H: float


def graph_mean_curvature(hess, b):
    """Second fundamental form and mean curvature of a graph at a point.

    Parameters
    ----------
    hess : array_like, shape (n, n)
        Second derivatives u_ij.
    b : array_like, shape (n,)
        Gradient Du.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    hess = np.atleast_2d(np.asarray(hess, dtype=float))
    w = float(np.sqrt(1.0 + b @ b))
    ginv = graph_inverse_metric(b)
    hw = float(np.sum(ginv * hess))
    return GraphGeometry(w=w, inv_metric=ginv, h=hess / w, H=hw / w)


@dataclass
class GraphField:
    """Cell averages of (sigma, b = Du) on a uniform grid.

    ``sigma`` has shape ``cells``; ``b`` has shape ``(dim, *cells)``.
    """

    dim: int
    cells: tuple
    spacing: tuple
    boundary: str
    sigma: np.ndarray
    b: np.ndarray
    lower: tuple = None

    def __post_init__(self):
        self.cells = tuple(int(c) for c in np.atleast_1d(self.cells))
        self.spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        if self.lower is None:
            self.lower = (0.0,) * self.dim
        self.lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.cells) != self.dim or len(self.spacing) != self.dim:
            raise ValueError("cells and spacing need one entry per axis")
        if min(self.cells) < 8:
            raise ValueError(f"need at least 8 cells per axis, got {self.cells}")
        if min(self.spacing) <= 0.0:
            raise ValueError("spacing must be positive")
        if self.boundary not in (PERIODIC, OUTFLOW):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        self.sigma = np.array(self.sigma, dtype=float).reshape(self.cells)
        self.b = np.array(self.b, dtype=float).reshape((self.dim,) + self.cells)
        if not (np.all(np.isfinite(self.sigma)) and np.all(np.isfinite(self.b))):
            raise ValueError("GraphField values must be finite")

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def centers(self):
        """Cell-center coordinates, one array per axis (``indexing='ij'``)."""
        axes = [self.lower[d] + (np.arange(self.cells[d]) + 0.5) * self.spacing[d]
                for d in range(self.dim)]
        if self.dim == 1:
            return axes
        return list(np.meshgrid(*axes, indexing="ij"))

    def b_squared(self):
        return np.sum(self.b * self.b, axis=0)

    def w(self):
        return np.sqrt(1.0 + self.b_squared())

    def copy(self):
        return GraphField(self.dim, self.cells, self.spacing, self.boundary,
                          self.sigma.copy(), self.b.copy(), self.lower)

    def with_state(self, sigma, b):
        return GraphField(self.dim, self.cells, self.spacing, self.boundary,
                          sigma, b, self.lower)


def signed_area(vertices):
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass
class PlaneCurve:
    """Closed polygon with a normal speed per vertex.

    Clockwise input is reindexed to counterclockwise order on construction
    (``sigma`` is reindexed with it).
    """

    vertices: np.ndarray
    sigma: np.ndarray = None
    orientation: bool = field(default=True, init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (m, 2)")
        m = v.shape[0]
        if m < 8:
            raise ValueError(f"need at least 8 vertices, got {m}")
        s = np.zeros(m) if self.sigma is None else np.array(self.sigma, dtype=float)
        s = np.broadcast_to(s, (m,)).copy()
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(s))):
            raise ValueError("curve data must be finite")
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise DegenerateGeometryError("consecutive vertices coincide")
        if signed_area(v) < 0.0:
            v = v[::-1].copy()
            s = s[::-1].copy()
        self.vertices = v
        self.sigma = s
        self.orientation = True

    @property
    def m(self):
        return self.vertices.shape[0]


@dataclass(frozen=True)
class CurveGeometry:
    tangent: np.ndarray
    nu: np.ndarray
    H: np.ndarray
    dmu: np.ndarray
    e_dmu: np.ndarray
    turning: np.ndarray
    edges: np.ndarray


def polygon_geometry(x, y, check=True):
    """Vectorised geometry for one or a stack of vertex arrays.

    Returns ``(tx, ty, nx, ny, H, dmu, turn, edge)`` with the shapes of ``x``.
    """
    tx, ty, nx, ny, turn, dmu, edge = kernels.curve_geometry(x, y)
    if check:
        mean = np.mean(edge, axis=-1, keepdims=True)
        if np.any(edge < 1e-14 * mean):
            raise DegenerateGeometryError("degenerate edge in curve")
    return tx, ty, nx, ny, turn / dmu, dmu, turn, edge


def curve_geometry(curve):
    """Tangent, inward normal, curvature and arclength weights of a curve.

    Curvature is the turning angle between the two incident edges divided by
    the lumped arclength ``dmu`` (half the sum of the incident edge lengths).
    Tangents are normalised central differences and ``nu`` is the tangent
    rotated by +90 degrees.
    """
    v = curve.vertices
    tx, ty, nx, ny, H, dmu, turn, edge = polygon_geometry(v[:, 0], v[:, 1])
    e = energy_density(curve.sigma, 1)
    return CurveGeometry(
        tangent=np.stack([tx, ty], axis=-1),
        nu=np.stack([nx, ny], axis=-1),
        H=H,
        dmu=dmu,
        e_dmu=e * dmu,
        turning=turn,
        edges=edge,
    )
