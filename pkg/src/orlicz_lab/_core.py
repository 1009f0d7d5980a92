"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_fallback`` module.  ``ORLICZ_LAB_PURE=1`` forces the fallback.
"""
import contextlib
import os

from . import _fallback

try:
    if os.environ.get("ORLICZ_LAB_PURE"):
        raise ImportError("pure-Python backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _fallback}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

kernels = BACKENDS.get("cython", _fallback)


def backend_name():
    return "cython" if kernels is _ckernels and _ckernels is not None else "python"


def set_backend(name):
    global kernels
    try:
        kernels = BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


@contextlib.contextmanager
def use_backend(name):
    previous = kernels
    set_backend(name)
    try:
        yield
    finally:
        globals()["kernels"] = previous


def thread_cap():
    """Parallelism cap from ``ORLICZ_LAB_THREADS`` (default 1)."""
    raw = os.environ.get("ORLICZ_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
