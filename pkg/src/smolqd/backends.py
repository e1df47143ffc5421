"""Backend selection for the hot numeric kernels.

Every performance-critical kernel in :mod:`smolqd.kernels` exists twice: a
vectorized pure-numpy reference implementation and a numba ``@njit`` loop
twin.  Which one the package dispatches to is decided once, at import time:

* numba importable and not disabled  -> jitted kernels,
* otherwise                          -> numpy fallbacks.

Set the environment variable ``SMOLQD_DISABLE_NUMBA`` to ``1`` (or ``true``,
``yes``, ``on``) before importing the package to force the numpy paths, e.g.
for debugging or on machines where numba misbehaves.  Results are equivalent
up to floating-point rounding; within a fixed backend all runs are
bit-reproducible.
"""

from __future__ import annotations

import os

_TRUTHY = ("1", "true", "yes", "on")


def _env_disabled() -> bool:
    return os.environ.get("SMOLQD_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


try:
    from numba import njit  # noqa: F401  (re-exported for kernels.py)

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only where numba is absent
    njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA: bool = NUMBA_AVAILABLE and not _env_disabled()


def backend_name() -> str:
    """Human-readable name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"
