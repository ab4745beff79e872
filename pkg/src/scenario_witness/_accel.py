"""Optional numba acceleration.

Kernels are compiled with numba when it is importable and the environment
variable ``SCENARIO_WITNESS_DISABLE_NUMBA`` is unset (or set to ``0``).
Otherwise the pure-numpy implementations are used.
"""

import os

_DISABLED = os.environ.get("SCENARIO_WITNESS_DISABLE_NUMBA", "0").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)

try:
    if _DISABLED:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
