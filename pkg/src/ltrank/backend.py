"""Kernel backend selection.

The env flag ``LTRANK_BACKEND`` picks the implementation of the hot
kernels: ``numba`` (default when importable) or ``numpy`` (pure-numpy
fallback).  Both expose the same functions and produce bit-identical
results; the numba one is orders of magnitude faster on the
Monte-Carlo paths.
"""

from __future__ import annotations

import os

from . import kernels_numpy

ENV_VAR = "LTRANK_BACKEND"

_numba_kernels = None
_numba_error: Exception | None = None


def _load_numba():
    global _numba_kernels, _numba_error
    if _numba_kernels is None and _numba_error is None:
        try:
            from . import kernels_numba
            _numba_kernels = kernels_numba
        except Exception as exc:  # pragma: no cover - env without numba
            _numba_error = exc
    return _numba_kernels


def available_backends() -> list[str]:
    names = ["numpy"]
    if _load_numba() is not None:
        names.insert(0, "numba")
    return names


def get(name: str | None = None):
    """Return the kernel module for `name` (default: env flag / auto)."""
    if name is None:
        name = os.environ.get(ENV_VAR, "").strip().lower() or None
    if name is None:
        return _load_numba() or kernels_numpy
    if name == "numpy":
        return kernels_numpy
    if name == "numba":
        mod = _load_numba()
        if mod is None:
            raise RuntimeError(
                f"numba backend requested but unavailable: {_numba_error}")
        return mod
    raise ValueError(f"unknown backend {name!r} (use 'numba' or 'numpy')")


def active_name() -> str:
    return get().IMPL


def set_threads(count: int) -> None:
    """Limit numba's thread pool; 0 leaves the automatic setting."""
    if count > 0 and _load_numba() is not None:
        import numba
        numba.set_num_threads(min(count, numba.config.NUMBA_NUM_THREADS))
