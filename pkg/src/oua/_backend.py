"""Backend selection for the hot integration kernels.

The integration loops in :mod:`oua.kernels` are written as plain Python
functions over numpy arrays and scalars. When numba is installed they are
JIT-compiled; otherwise (or when the ``OUA_NUMBA`` environment variable is
set to ``0``/``false``/``off``/``no``) the same source runs as interpreted
numpy/Python. Both paths execute identical arithmetic, so results agree to
floating-point noise; within one backend results are bit-reproducible.

``benchmarks/compare_backends.py`` times the two paths against each other.
"""

from __future__ import annotations

import functools
import os

_DISABLE_VALUES = {"0", "false", "off", "no", "numpy"}

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None
    NUMBA_AVAILABLE = False


def _initial_backend() -> str:
    flag = os.environ.get("OUA_NUMBA", "").strip().lower()
    if flag in _DISABLE_VALUES or not NUMBA_AVAILABLE:
        return "numpy"
    return "numba"


_active = _initial_backend()


def backend() -> str:
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return _active


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime (used by tests and benchmarks)."""
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not installed")
    _active = name


def accelerated(py_func):
    """Wrap a kernel so calls dispatch to the JIT build or the Python source.

    The wrapper exposes ``py_func`` (interpreted fallback) and ``jit_func``
    (numba build, or None) so benchmarks can time each path explicitly.
    Kernels must stay self-contained: no calls into other wrapped kernels.
    """
    jit_func = None
    if NUMBA_AVAILABLE:
        jit_func = _njit(cache=True, nogil=True)(py_func)

    @functools.wraps(py_func)
    def dispatcher(*args):
        if _active == "numba":
            return jit_func(*args)
        return py_func(*args)

    dispatcher.py_func = py_func
    dispatcher.jit_func = jit_func
    return dispatcher
