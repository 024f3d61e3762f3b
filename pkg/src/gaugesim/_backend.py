"""Backend selection for the numerical kernels.

Every hot kernel in :mod:`gaugesim._kernels` exists in two interchangeable
forms: a numba ``@njit``-compiled one and the plain-Python/numpy original.
The environment variable ``GAUGESIM_BACKEND`` picks which one is exported:

* ``"numba"`` -- compile with numba (error if numba is missing),
* ``"numpy"`` -- skip compilation, run the pure-Python versions,
* unset -- use numba when it imports, fall back to numpy otherwise.

The choice is made once at import time.  ``GAUGESIM_THREADS`` caps the
number of worker processes used by the command-line runner.
"""

import os


def _select():
    choice = os.environ.get("GAUGESIM_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(
            "GAUGESIM_BACKEND must be 'numba' or 'numpy', got %r" % choice
        )
    if choice == "numpy":
        return "numpy", None
    try:
        import numba
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", None
    return "numba", numba


BACKEND, _numba = _select()


def jit(func):
    """Compile ``func`` under the numba backend; identity otherwise."""
    if BACKEND == "numba":
        return _numba.njit(cache=True)(func)
    return func


def thread_count(override=None, config_default=None):
    """Worker count for grid sweeps.

    Resolution order: explicit ``override`` (the CLI flag), then the
    ``GAUGESIM_THREADS`` environment variable, then the config file's
    value, then every available core.
    """
    if override is not None:
        n = int(override)
    else:
        raw = os.environ.get("GAUGESIM_THREADS", "").strip()
        if raw:
            n = int(raw)
        elif config_default is not None:
            n = int(config_default)
        else:
            return os.cpu_count() or 1
    if n < 1:
        raise ValueError("thread count must be >= 1, got %d" % n)
    return n
