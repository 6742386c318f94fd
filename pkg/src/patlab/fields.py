"""Scalar fields on a grid and the Sobolev-type norms used everywhere.

The negative-order norm is realized through the inverse of the 5-point
Dirichlet Laplacian: ``norm_hminus1(f) = sqrt(<f, v>)`` with ``-lap v = f``
and v clamped to zero on the boundary. All integrals use tensor-product
trapezoidal quadrature, matching the second-order accuracy of the solvers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GridMismatchError, InvalidFieldError, SolverFailureError
from .grid import Grid2D

__all__ = [
    "ScalarField2D",
    "WaveSpeed",
    "InitialState",
    "StateBounds",
    "norm_h0",
    "inner_h0",
    "norm_w1inf",
    "gradient",
    "poisson_dirichlet_solve",
    "norm_hminus1",
    "save_field",
    "load_field",
    "field_to_csv",
]

FIELD_MAGIC = b"PATF"


def _as_readonly(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True, order="C")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """A real-valued function sampled at the nodes of a grid.

    Immutable: the value array is copied on construction and marked
    read-only, so fields can be shared freely across threads.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        arr = _as_readonly(self.values)
        if arr.shape != self.grid.shape:
            raise InvalidFieldError(
                f"field shape {arr.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidFieldError("field contains non-finite values")
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ScalarField2D":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "ScalarField2D":
        xx, yy = np.meshgrid(grid.xs, grid.ys, indexing="ij")
        return cls(grid, fn(xx, yy))

    def __add__(self, other: "ScalarField2D") -> "ScalarField2D":
        self._check_same_grid(other)
        return ScalarField2D(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField2D") -> "ScalarField2D":
        self._check_same_grid(other)
        return ScalarField2D(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "ScalarField2D":
        return ScalarField2D(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def _check_same_grid(self, other: "ScalarField2D"):
        if not self.grid.same_geometry(other.grid):
            raise GridMismatchError("fields live on different grids")


@dataclass(frozen=True, eq=False)
class WaveSpeed:
    """A wave-speed map together with its admissible bounds.

    The bounds play two roles: they encode the a-priori knowledge that the
    speed of sound in tissue is confined to a known interval, and they define
    the clamp range used by projected speed updates.
    """

    field: ScalarField2D
    c_low: float
    c_high: float

    def __post_init__(self):
        if self.c_low <= 0:
            raise InvalidFieldError(f"lower speed bound must be positive, got {self.c_low}")
        if self.c_low > self.c_high:
            raise InvalidFieldError("lower speed bound exceeds upper bound")
        v = self.field.values
        tol = 1e-12 * max(abs(self.c_low), abs(self.c_high))
        if v.min() < self.c_low - tol or v.max() > self.c_high + tol:
            raise InvalidFieldError(
                f"speed values [{v.min():g}, {v.max():g}] escape bounds "
                f"[{self.c_low:g}, {self.c_high:g}]"
            )
        if norm_w1inf(self.field) > self.c_high + tol:
            raise InvalidFieldError("speed W1-inf norm exceeds the declared upper bound")

    @property
    def grid(self) -> Grid2D:
        return self.field.grid

    @classmethod
    def constant(cls, grid: Grid2D, value: float, c_low=None, c_high=None) -> "WaveSpeed":
        c_low = value * 0.5 if c_low is None else c_low
        c_high = value * 2.0 if c_high is None else c_high
        return cls(ScalarField2D(grid, np.full(grid.shape, float(value))), c_low, c_high)

    def sq_slowness(self) -> ScalarField2D:
        """The field 1/c^2 the theorem condition is phrased in."""
        return ScalarField2D(self.grid, self.field.values**-2.0)


@dataclass(frozen=True, eq=False)
class InitialState:
    """Initial pressure u0 and pressure rate u1; u0 vanishes on the boundary."""

    u0: ScalarField2D
    u1: ScalarField2D

    def __post_init__(self):
        if not self.u0.grid.same_geometry(self.u1.grid):
            raise GridMismatchError("u0 and u1 live on different grids")
        bvals = self.u0.grid.extract_boundary(self.u0.values)
        if np.any(bvals != 0.0):
            raise InvalidFieldError(
                "u0 must vanish identically on the boundary "
                f"(max boundary magnitude {np.abs(bvals).max():g})"
            )

    @property
    def grid(self) -> Grid2D:
        return self.u0.grid

    @classmethod
    def resting(cls, u0: ScalarField2D) -> "InitialState":
        return cls(u0, ScalarField2D.zeros(u0.grid))


@dataclass(frozen=True)
class StateBounds:
    """The two quadratic state quantities and their configured thresholds.

    ``energy_upper`` is |grad u0|^2 + |u1|^2 (both squared H0 norms) and must
    stay at or below K; ``mass_lower`` is |u0|^2 + |u1|^2 in the H0/H-1 pair
    and must stay at or above k.
    """

    energy_upper: float
    mass_lower: float
    k: float
    K: float

    def __post_init__(self):
        if min(self.energy_upper, self.mass_lower, self.k, self.K) < 0:
            raise InvalidFieldError("state-bound quantities must be nonnegative")
        if not self.k < self.K:
            raise InvalidFieldError(f"need k < K, got k={self.k}, K={self.K}")

    @property
    def mass_ok(self) -> bool:
        return self.mass_lower >= self.k

    @property
    def energy_ok(self) -> bool:
        return self.energy_upper <= self.K

    @property
    def satisfied(self) -> bool:
        return self.mass_ok and self.energy_ok


# ---------------------------------------------------------------------------
# Norms and inner products
# ---------------------------------------------------------------------------


def inner_h0(f: ScalarField2D, g: ScalarField2D) -> float:
    """Trapezoidal L2 inner product over the rectangle."""
    f._check_same_grid(g)
    return float(np.sum(f.grid.quad_weights * f.values * g.values))


def norm_h0(f: ScalarField2D) -> float:
    """L2 norm by trapezoidal quadrature; zero iff the field is zero."""
    return float(np.sqrt(np.sum(f.grid.quad_weights * f.values**2)))


def gradient(f: ScalarField2D) -> tuple[np.ndarray, np.ndarray]:
    """Nodal gradient: centered differences inside, one-sided second order
    at the boundary."""
    v = f.values
    g = f.grid
    fx = np.empty_like(v)
    fy = np.empty_like(v)
    fx[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * g.hx)
    fx[0, :] = (-3 * v[0, :] + 4 * v[1, :] - v[2, :]) / (2 * g.hx)
    fx[-1, :] = (3 * v[-1, :] - 4 * v[-2, :] + v[-3, :]) / (2 * g.hx)
    fy[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * g.hy)
    fy[:, 0] = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / (2 * g.hy)
    fy[:, -1] = (3 * v[:, -1] - 4 * v[:, -2] + v[:, -3]) / (2 * g.hy)
    return fx, fy


def norm_w1inf(f: ScalarField2D) -> float:
    """max(sup |f|, sup |grad f|) over the nodes."""
    fx, fy = gradient(f)
    grad_mag = np.sqrt(fx**2 + fy**2)
    return float(max(np.abs(f.values).max(), grad_mag.max()))


def grad_norm_h0_sq(f: ScalarField2D) -> float:
    """Squared L2 norm of the nodal gradient (trapezoidal quadrature)."""
    fx, fy = gradient(f)
    w = f.grid.quad_weights
    return float(np.sum(w * (fx**2 + fy**2)))


# ---------------------------------------------------------------------------
# Inverse Dirichlet Laplacian and the H^-1 norm
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _dirichlet_laplacian(grid: Grid2D) -> sp.csr_matrix:
    """Negative 5-point Laplacian on the interior nodes (SPD)."""
    mx, my = grid.nx - 2, grid.ny - 2
    ex = np.ones(mx)
    ey = np.ones(my)
    tx = sp.diags([-ex[:-1], 2 * ex, -ex[:-1]], [-1, 0, 1]) / grid.hx**2
    ty = sp.diags([-ey[:-1], 2 * ey, -ey[:-1]], [-1, 0, 1]) / grid.hy**2
    a = sp.kron(tx, sp.identity(my)) + sp.kron(sp.identity(mx), ty)
    return a.tocsr()


def poisson_dirichlet_solve(f: ScalarField2D, max_iter: int | None = None) -> ScalarField2D:
    """Solve -lap v = f with v = 0 on the boundary (conjugate gradients).

    Converges to relative residual 1e-10; raises SolverFailureError with the
    achieved residual attached if the iteration cap is hit first.
    """
    g = f.grid
    a = _dirichlet_laplacian(g)
    b = f.values[1:-1, 1:-1].reshape(-1)
    v = np.zeros(g.shape)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return ScalarField2D(g, v)
    if max_iter is None:
        max_iter = 40 * (g.nx + g.ny)
    sol, info = spla.cg(a, b, rtol=1e-10, atol=0.0, maxiter=max_iter)
    if info != 0:
        residual = float(np.linalg.norm(b - a @ sol) / bnorm)
        raise SolverFailureError(
            f"Poisson solve stopped after {max_iter} iterations "
            f"at relative residual {residual:.3e}",
            residual=residual,
        )
    v[1:-1, 1:-1] = sol.reshape(g.nx - 2, g.ny - 2)
    return ScalarField2D(g, v)


def norm_hminus1(f: ScalarField2D) -> float:
    """Dual norm over discrete H1_0: sqrt(<f, (-lap)^-1 f>)."""
    v = poisson_dirichlet_solve(f)
    return float(np.sqrt(max(inner_h0(f, v), 0.0)))


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sII4d")


def save_field(f: ScalarField2D, path) -> None:
    """Little-endian binary field file: magic, nx, ny, hx, hy, origin, data."""
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FIELD_MAGIC, g.nx, g.ny, g.hx, g.hy, g.origin[0], g.origin[1]))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field(path) -> ScalarField2D:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise InvalidFieldError(f"{path}: truncated field header")
        magic, nx, ny, hx, hy, ox, oy = _HEADER.unpack(head)
        if magic != FIELD_MAGIC:
            raise InvalidFieldError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(8 * nx * ny), dtype="<f8")
        if data.size != nx * ny:
            raise InvalidFieldError(f"{path}: truncated field payload")
    grid = Grid2D(nx=nx, ny=ny, hx=hx, hy=hy, origin=(ox, oy))
    return ScalarField2D(grid, data.reshape(nx, ny))


def field_to_csv(f: ScalarField2D, path) -> None:
    """CSV export, one "x,y,value" row per node, 17 significant digits."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        fh.write("x,y,value\n")
        for i in range(g.nx):
            x = g.xs[i]
            for j in range(g.ny):
                fh.write(f"{x:.17g},{g.ys[j]:.17g},{f.values[i, j]:.17g}\n")
