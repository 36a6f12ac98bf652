"""Backend selection for the simulation hot loops.

``SUPEREFF_BACKEND=numpy`` forces the pure-numpy path; otherwise the numba
path is used when numba imports. Both read identical counter-based streams,
so they agree to rounding (transcendental functions may differ in the last
ulp between numba and numpy).
"""

from __future__ import annotations

import os

from . import _numpy

ORACLE, DIM, SYNTHETIC = _numpy.ORACLE, _numpy.DIM, _numpy.SYNTHETIC

_requested = os.environ.get("SUPEREFF_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"SUPEREFF_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

BACKENDS = {"numpy": _numpy.cell_estimates}
if _numba is not None:
    BACKENDS["numba"] = _numba.cell_estimates

BACKEND = _requested if _requested in BACKENDS else "numpy"


def cell_estimates(*args, backend: str | None = None, **kwargs):
    return BACKENDS[backend or BACKEND](*args, **kwargs)
