"""Kernel backend selection.

The compiled extension (``mrpt._kernels._cy``) is used when it imported
successfully; otherwise the numpy fallback (``mrpt._kernels._py``) takes
over. Set ``MRPT_BACKEND=python`` or ``MRPT_BACKEND=compiled`` to force one
at import time; ``set_backend``/``using_backend`` switch at runtime (the
benchmark and the test suite use this to compare the two).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import _py
from ..exceptions import ParameterError

_BACKENDS = {"python": _py}
try:
    from . import _cy

    _BACKENDS["compiled"] = _cy
except ImportError:
    _cy = None


def _initial_backend():
    requested = os.environ.get("MRPT_BACKEND", "auto").strip().lower() or "auto"
    if requested == "auto":
        return _BACKENDS.get("compiled", _py)
    if requested not in _BACKENDS:
        raise ImportError(
            f"MRPT_BACKEND={requested!r} not available; "
            f"choose from {('auto',) + tuple(sorted(_BACKENDS))}"
        )
    return _BACKENDS[requested]


_active = _initial_backend()


def backend():
    """Name of the backend currently in use."""
    return "compiled" if _active is _cy else "python"


def available_backends():
    return tuple(sorted(_BACKENDS))


def set_backend(name):
    global _active
    if name == "auto":
        _active = _BACKENDS.get("compiled", _py)
        return
    if name not in _BACKENDS:
        raise ParameterError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]


@contextmanager
def using_backend(name):
    previous = backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def project(data, col_ptr, rows, vals):
    return _active.project(data, col_ptr, rows, vals)


def route(proj, splits):
    return _active.route(proj, splits)


def vote(leaf_indices, leaf_offsets, leaves, v, counts, stamps, epoch, out):
    return _active.vote(leaf_indices, leaf_offsets, leaves, v, counts, stamps, epoch, out)


def scan(data, cand, q):
    return _active.scan(data, cand, q)


def fnv1a64(buf):
    return _active.fnv1a64(buf)
