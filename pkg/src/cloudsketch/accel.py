"""Kernel backend selection.

Hot inner loops (rasterization, median filtering, border tracing, descriptor
accumulation, vector quantization) ship in two versions: numba-jitted scalar
kernels and pure-numpy equivalents. The jitted path is the default; setting
the environment variable ``CLOUDSKETCH_PURE_NUMPY=1`` before import forces
the numpy path, which is also used automatically when numba is missing.
"""

import os

ENV_FLAG = "CLOUDSKETCH_PURE_NUMPY"


def pure_numpy_requested() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = (not pure_numpy_requested()) and numba_available()
BACKEND = "numba" if USE_NUMBA else "numpy"
