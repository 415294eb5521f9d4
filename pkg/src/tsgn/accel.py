"""Kernel backend selection.

The hot inner loops in this package ship in two forms: numba ``@njit``
kernels and vectorized pure-numpy fallbacks. Both produce identical edge
orderings so downstream results do not depend on the backend.

The active backend is chosen at import time from the ``TSGN_BACKEND``
environment variable (``numba`` or ``numpy``); when unset, numba is used
if importable. ``set_backend`` switches at runtime, which the tests and
the benchmark use to compare both paths in one process.
"""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
    NUMBA_VERSION: str | None = numba.__version__
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False
    NUMBA_VERSION = None

_VALID = ("numba", "numpy")


def _initial_backend() -> str:
    env = os.environ.get("TSGN_BACKEND", "").strip().lower()
    if env and env not in _VALID:
        raise ValueError(f"TSGN_BACKEND must be one of {_VALID}, got {env!r}")
    if env == "numba" and not HAS_NUMBA:
        raise ImportError("TSGN_BACKEND=numba but numba is not importable")
    if env:
        return env
    return "numba" if HAS_NUMBA else "numpy"


_backend = _initial_backend()


def backend() -> str:
    """Name of the active kernel backend."""
    return _backend


def use_numba() -> bool:
    return _backend == "numba"


def set_backend(name: str) -> None:
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise ImportError("numba backend requested but numba is not importable")
    _backend = name
