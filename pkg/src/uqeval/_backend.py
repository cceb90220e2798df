"""Kernel backend selection.

Hot numeric kernels ship in two flavours: a numba @njit build and a pure
numpy build. The numba build is used when numba imports cleanly and the
environment variable UQEVAL_NUMBA is not set to "0" / "off" / "false".
"""

import os

_FLAG = os.environ.get("UQEVAL_NUMBA", "1").strip().lower()

NUMBA_REQUESTED = _FLAG not in ("0", "off", "false", "no")

if NUMBA_REQUESTED:
    try:
        import numba  # noqa: F401

        NUMBA_AVAILABLE = True
    except ImportError:
        NUMBA_AVAILABLE = False
else:
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_REQUESTED and NUMBA_AVAILABLE


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
