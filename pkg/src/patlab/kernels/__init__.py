"""Backend selection for the hot time-stepping kernels.

The compiled Cython extension is preferred when importable; the NumPy
reference implementation is the fallback. Both produce bit-identical
states. Set PAT_LAB_BACKEND=python (or =compiled) to force a choice.
"""

from __future__ import annotations

import os

from . import _reference

_requested = os.environ.get("PAT_LAB_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "python"):
    raise RuntimeError(f"PAT_LAB_BACKEND must be auto, compiled, or python, got {_requested!r}")

_impl = None
backend = "python"

if _requested in ("auto", "compiled"):
    try:
        from . import _stencils as _impl  # type: ignore[attr-defined]

        backend = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = None

if _impl is None:
    _impl = _reference
    backend = "python"

lap_reflect = _impl.lap_reflect
leapfrog_step = _impl.leapfrog_step
adjoint_step = _impl.adjoint_step
gradient_accumulate = _impl.gradient_accumulate


def backend_info() -> dict:
    return {"backend": backend, "requested": _requested}


def get_backend(name: str):
    """Return the kernel module for an explicit backend name (benchmarks)."""
    if name == "python":
        return _reference
    if name == "compiled":
        from . import _stencils  # noqa: F811

        return _stencils
    raise ValueError(f"unknown backend {name!r}")
