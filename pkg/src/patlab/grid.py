"""Uniform rectangular grids and their boundary bookkeeping.

A grid carries everything the norms and the wave solver need to know about
the discretized rectangle: node coordinates, trapezoidal quadrature weights,
and an ordered counterclockwise traversal of the perimeter nodes with their
arc-length weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError

__all__ = ["Grid2D"]


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform tensor grid on the rectangle [x0, x0+(nx-1)hx] x [y0, y0+(ny-1)hy].

    Field values are stored as (nx, ny) arrays indexed ``values[i, j]`` with
    ``i`` along x and ``j`` along y, row-major.
    """

    nx: int
    ny: int
    hx: float
    hy: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ConfigError(f"grid needs at least 8 nodes per axis, got {self.nx}x{self.ny}")
        if self.hx <= 0 or self.hy <= 0:
            raise ConfigError(f"grid spacings must be positive, got hx={self.hx}, hy={self.hy}")

    @classmethod
    def unit_square(cls, n: int) -> "Grid2D":
        return cls(nx=n, ny=n, hx=1.0 / (n - 1), hy=1.0 / (n - 1))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def extent(self) -> tuple[float, float]:
        """Side lengths (Lx, Ly) of the rectangle."""
        return ((self.nx - 1) * self.hx, (self.ny - 1) * self.hy)

    @property
    def diameter(self) -> float:
        lx, ly = self.extent
        return float(np.hypot(lx, ly))

    @property
    def perimeter(self) -> float:
        lx, ly = self.extent
        return 2.0 * (lx + ly)

    @cached_property
    def xs(self) -> np.ndarray:
        v = self.origin[0] + self.hx * np.arange(self.nx)
        v.flags.writeable = False
        return v

    @cached_property
    def ys(self) -> np.ndarray:
        v = self.origin[1] + self.hy * np.arange(self.ny)
        v.flags.writeable = False
        return v

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """Tensor-product trapezoidal weights, shape (nx, ny)."""
        wx = np.full(self.nx, self.hx)
        wx[0] *= 0.5
        wx[-1] *= 0.5
        wy = np.full(self.ny, self.hy)
        wy[0] *= 0.5
        wy[-1] *= 0.5
        w = np.outer(wx, wy)
        w.flags.writeable = False
        return w

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Perimeter nodes as (i, j) index pairs, counterclockwise, no repeats.

        Traversal starts at (0, 0): bottom edge, right edge, top edge, left
        edge. Length is 2(nx-1) + 2(ny-1).
        """
        nx, ny = self.nx, self.ny
        bottom = [(i, 0) for i in range(nx)]
        right = [(nx - 1, j) for j in range(1, ny)]
        top = [(i, ny - 1) for i in range(nx - 2, -1, -1)]
        left = [(0, j) for j in range(ny - 2, 0, -1)]
        nodes = np.array(bottom + right + top + left, dtype=np.intp)
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def boundary_flat(self) -> np.ndarray:
        """Flat row-major indices of the boundary nodes, traversal order."""
        bn = self.boundary_nodes
        flat = bn[:, 0] * self.ny + bn[:, 1]
        flat.flags.writeable = False
        return flat

    @property
    def n_boundary(self) -> int:
        return 2 * (self.nx - 1) + 2 * (self.ny - 1)

    @cached_property
    def boundary_arc_weights(self) -> np.ndarray:
        """Arc-length quadrature weight per boundary node (closed polygon).

        Each node gets half the length of its two adjacent perimeter edges;
        corners therefore weigh (hx + hy)/2. Weights sum to the perimeter.
        """
        bn = self.boundary_nodes
        n = len(bn)
        seg = np.empty(n)  # seg[k] = length of edge from node k to node k+1
        for k in range(n):
            i0, j0 = bn[k]
            i1, j1 = bn[(k + 1) % n]
            seg[k] = abs(i1 - i0) * self.hx + abs(j1 - j0) * self.hy
        w = 0.5 * (seg + np.roll(seg, 1))
        w.flags.writeable = False
        return w

    @cached_property
    def boundary_arc_lengths(self) -> np.ndarray:
        """Cumulative arc length at each boundary node, starting at 0."""
        bn = self.boundary_nodes
        n = len(bn)
        s = np.zeros(n)
        for k in range(1, n):
            i0, j0 = bn[k - 1]
            i1, j1 = bn[k]
            s[k] = s[k - 1] + abs(i1 - i0) * self.hx + abs(j1 - j0) * self.hy
        s.flags.writeable = False
        return s

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.nx, self.ny), dtype=bool)
        m[0, :] = m[-1, :] = True
        m[:, 0] = m[:, -1] = True
        m.flags.writeable = False
        return m

    @cached_property
    def interior_mask(self) -> np.ndarray:
        m = ~self.boundary_mask
        m.flags.writeable = False
        return m

    def extract_boundary(self, values: np.ndarray) -> np.ndarray:
        """Boundary values of a (nx, ny) array in traversal order."""
        return values.reshape(-1)[self.boundary_flat]

    def same_geometry(self, other: "Grid2D") -> bool:
        return (
            self.nx == other.nx
            and self.ny == other.ny
            and self.hx == other.hx
            and self.hy == other.hy
            and self.origin == other.origin
        )
