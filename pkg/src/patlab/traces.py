"""Boundary traces: the output of a forward map, and their space-time norms.

A trace stores one value per boundary node per recorded time, time-major.
Space quadrature uses the closed-polygon arc-length weights of the grid,
time quadrature is trapezoidal. The H1-in-time norm differentiates the
samples with centered differences (one-sided second order at the ends).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InvalidTraceError
from .grid import Grid2D

__all__ = [
    "BoundaryTrace",
    "trace_norm_h0",
    "trace_norm_h1h0",
    "save_trace",
    "load_trace",
    "trace_to_csv",
]

TRACE_MAGIC = b"PATT"


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Time series of boundary values, shape (n_samples, n_boundary)."""

    grid: Grid2D
    dt_record: float
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2 or arr.shape[1] != self.grid.n_boundary:
            raise InvalidTraceError(
                f"trace shape {arr.shape} does not match {self.grid.n_boundary} boundary nodes"
            )
        if arr.shape[0] < 1:
            raise InvalidTraceError("trace has no time samples")
        if self.dt_record <= 0:
            raise InvalidTraceError(f"recording interval must be positive, got {self.dt_record}")
        if not np.all(np.isfinite(arr)):
            raise InvalidTraceError("trace contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        """Covered time window; samples sit at k * dt_record, k = 0..n-1."""
        return (self.n_samples - 1) * self.dt_record

    @property
    def times(self) -> np.ndarray:
        return self.dt_record * np.arange(self.n_samples)

    def same_recording(self, other: "BoundaryTrace") -> bool:
        return (
            self.grid.same_geometry(other.grid)
            and self.n_samples == other.n_samples
            and self.dt_record == other.dt_record
        )

    def __sub__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        if not self.same_recording(other):
            raise GridMismatchError("traces have different recording geometry")
        return BoundaryTrace(self.grid, self.dt_record, self.samples - other.samples)

    def __add__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        if not self.same_recording(other):
            raise GridMismatchError("traces have different recording geometry")
        return BoundaryTrace(self.grid, self.dt_record, self.samples + other.samples)

    def __mul__(self, scalar: float) -> "BoundaryTrace":
        return BoundaryTrace(self.grid, self.dt_record, self.samples * scalar)

    __rmul__ = __mul__


def _time_weights(n: int, dt: float) -> np.ndarray:
    w = np.full(n, dt)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def trace_norm_h0(m: BoundaryTrace) -> float:
    """Space-time L2 norm of the trace over (0, T) x boundary."""
    if m.n_samples < 2:
        raise InvalidTraceError("trace H0 norm needs at least 2 time samples")
    wt = _time_weights(m.n_samples, m.dt_record)
    ws = m.grid.boundary_arc_weights
    return float(np.sqrt(np.einsum("t,b,tb->", wt, ws, m.samples**2)))


def time_derivative(m: BoundaryTrace) -> BoundaryTrace:
    """Sample-wise time derivative, centered inside, one-sided second order
    at the two endpoints."""
    if m.n_samples < 3:
        raise InvalidTraceError("time derivative needs at least 3 samples")
    s = m.samples
    d = np.empty_like(s)
    d[1:-1] = (s[2:] - s[:-2]) / (2 * m.dt_record)
    d[0] = (-3 * s[0] + 4 * s[1] - s[2]) / (2 * m.dt_record)
    d[-1] = (3 * s[-1] - 4 * s[-2] + s[-3]) / (2 * m.dt_record)
    return BoundaryTrace(m.grid, m.dt_record, d)


def trace_norm_h1h0(m: BoundaryTrace) -> float:
    """H1-in-time, L2-in-space norm: sqrt(|m|^2 + |dm/dt|^2)."""
    if m.n_samples < 3:
        raise InvalidTraceError("trace H1 norm needs at least 3 time samples")
    return float(np.sqrt(trace_norm_h0(m) ** 2 + trace_norm_h0(time_derivative(m)) ** 2))


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sIId")


def save_trace(m: BoundaryTrace, path) -> None:
    """Binary trace file: magic, n_boundary_nodes, n_samples, dt_record, data
    (time-major)."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(TRACE_MAGIC, m.samples.shape[1], m.n_samples, m.dt_record))
        fh.write(np.ascontiguousarray(m.samples, dtype="<f8").tobytes())


def load_trace(path, grid: Grid2D) -> BoundaryTrace:
    """Read a trace written by save_trace; the grid supplies the geometry."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise InvalidTraceError(f"{path}: truncated trace header")
        magic, n_boundary, n_samples, dt_record = _HEADER.unpack(head)
        if magic != TRACE_MAGIC:
            raise InvalidTraceError(f"{path}: bad magic {magic!r}")
        if n_boundary != grid.n_boundary:
            raise GridMismatchError(
                f"{path}: trace has {n_boundary} boundary nodes, grid has {grid.n_boundary}"
            )
        data = np.frombuffer(fh.read(8 * n_boundary * n_samples), dtype="<f8")
        if data.size != n_boundary * n_samples:
            raise InvalidTraceError(f"{path}: truncated trace payload")
    return BoundaryTrace(grid, dt_record, data.reshape(n_samples, n_boundary))


def trace_to_csv(m: BoundaryTrace, path) -> None:
    """CSV export: "t,node_index,arc_length,value" rows, 17 significant digits."""
    arcs = m.grid.boundary_arc_lengths
    with open(path, "w", newline="") as fh:
        fh.write("t,node_index,arc_length,value\n")
        for k in range(m.n_samples):
            t = k * m.dt_record
            row = m.samples[k]
            for b in range(row.shape[0]):
                fh.write(f"{t:.17g},{b},{arcs[b]:.17g},{row[b]:.17g}\n")
