"""Backend selection for the sweep integrator.

The compiled Dormand-Prince kernel (``_fastpath``) is used when it was
built and the environment variable ``BQSCATTER_FORCE_PYTHON`` is not set
to ``1``; otherwise every sweep falls back to scipy's RK45 with the same
tolerances.  Both paths implement the same method, so results agree to
tolerance level (asserted in the test suite).
"""

from __future__ import annotations

import os

FORCE_PYTHON = os.environ.get("BQSCATTER_FORCE_PYTHON", "") == "1"

try:  # pragma: no cover - exercised implicitly by the import
    from . import _fastpath  # type: ignore[attr-defined]

    HAVE_FASTPATH = True
except ImportError:  # pragma: no cover
    _fastpath = None
    HAVE_FASTPATH = False

ACTIVE = "cython" if (HAVE_FASTPATH and not FORCE_PYTHON) else "python"


def active_backend() -> str:
    """Name of the integrator backend selected at import time."""
    return ACTIVE
