"""Kernel backend selection.

The compiled extension is used when it imports; set ``HMCF_PURE_PYTHON=1``
to force the numpy fallback. ``BACKEND`` names the active implementation.
"""

import os

from . import _kernels_py

LAX_FRIEDRICHS = _kernels_py.LAX_FRIEDRICHS
RUSANOV = _kernels_py.RUSANOV


def _load():
    if os.environ.get("HMCF_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py, "python"
    try:
        from . import _kernels_ext
    except ImportError:
        return _kernels_py, "python"
    return _kernels_ext, "cython"


_impl, BACKEND = _load()

curve_geometry = _impl.curve_geometry
wave_speed_1d = _impl.wave_speed_1d
wave_speed_2d = _impl.wave_speed_2d
fv_rhs_1d = _impl.fv_rhs_1d
fv_rhs_2d = _impl.fv_rhs_2d
curve_rhs = _impl.curve_rhs


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_ext
    except ImportError:
        pass
    else:
        out["cython"] = _kernels_ext
    return out
