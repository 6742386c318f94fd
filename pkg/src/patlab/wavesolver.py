"""Time-domain wave simulation, the forward measurement map, and its adjoint.

The scheme is leapfrog in time with the 5-point Laplacian in space. The
impedance condition (normal derivative plus gamma times the pressure rate
equals zero) is imposed through ghost nodes: the ghost value is eliminated
with a time-centered pressure rate, which turns the boundary update into an
explicit step with diagonal correction factors and keeps the scheme second
order. With positive gamma the update dissipates a discrete energy exactly;
that energy series is recorded alongside the boundary trace.

The adjoint solver is the exact transpose of the forward recursion (a
time-reversed wave solve whose impedance factors keep dissipating), so the
discrete adjoint identity holds to rounding rather than to discretization
error. The same backward sweep optionally accumulates the misfit gradient
with respect to the squared wave speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BlowUpError, ConfigError, GridMismatchError, InvalidFieldError
from .fields import InitialState, ScalarField2D, WaveSpeed, grad_norm_h0_sq
from .grid import Grid2D
from .traces import BoundaryTrace

__all__ = [
    "SolverConfig",
    "BoundaryImpedance",
    "WaveSnapshot",
    "SimulationResult",
    "AdjointResult",
    "cfl_timestep",
    "simulate",
    "forward_map",
    "energy",
    "adjoint_simulate",
    "default_observation_time",
    "dirichlet_form",
]

BLOWUP_THRESHOLD = 1e12


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration parameters.

    ``T`` is the observation window. ``cfl_factor`` is the fraction of the
    explicit stability limit actually used; it is capped at 0.5 to keep a
    margin under heterogeneous speeds. Strides are in time steps.
    """

    T: float
    cfl_factor: float = 0.4
    record_stride: int = 1
    snapshot_stride: int | None = None

    def __post_init__(self):
        if self.T <= 0:
            raise ConfigError(f"final time must be positive, got {self.T}")
        if not 0 < self.cfl_factor <= 0.5:
            raise ConfigError(f"cfl_factor must lie in (0, 0.5], got {self.cfl_factor}")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")
        if self.snapshot_stride is not None and self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")


@dataclass(frozen=True, eq=False)
class BoundaryImpedance:
    """Per-boundary-node impedance values, in grid traversal order.

    The absorbing-sensor regime of the theory requires gamma > 0 everywhere;
    gamma = 0 (lossless, purely reflecting) is admitted as a diagnostic mode
    for energy-conservation and reversibility checks.
    """

    grid: Grid2D
    gamma: np.ndarray

    def __post_init__(self):
        arr = np.array(self.gamma, dtype=np.float64, copy=True)
        if arr.ndim == 0:
            arr = np.full(self.grid.n_boundary, float(arr))
        if arr.shape != (self.grid.n_boundary,):
            raise InvalidFieldError(
                f"impedance needs one value per boundary node "
                f"({self.grid.n_boundary}), got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)) or arr.min() < 0:
            raise InvalidFieldError("impedance values must be finite and nonnegative")
        arr.flags.writeable = False
        object.__setattr__(self, "gamma", arr)

    @classmethod
    def constant(cls, grid: Grid2D, value: float) -> "BoundaryImpedance":
        return cls(grid, np.full(grid.n_boundary, float(value)))

    @property
    def strictly_positive(self) -> bool:
        return bool(self.gamma.min() > 0)


@dataclass(frozen=True, eq=False)
class WaveSnapshot:
    """Full-field state (u, du/dt) at one instant."""

    t: float
    u: ScalarField2D
    u_dot: ScalarField2D


@dataclass(frozen=True, eq=False)
class SimulationResult:
    trace: BoundaryTrace
    snapshots: tuple[WaveSnapshot, ...] | None
    energies: np.ndarray
    dt: float
    n_steps: int
    trajectory: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class AdjointResult:
    """Output of the transposed solve.

    ``grad_u0``/``grad_u1`` form the state-space gradient (the adjoint of
    the forward map applied to the residual, in the L2 quadrature pairing).
    ``sq_speed_gradient`` is the misfit gradient with respect to the squared
    speed at every node, present only when a forward trajectory was supplied.
    """

    grad_u0: ScalarField2D
    grad_u1: ScalarField2D
    sq_speed_gradient: np.ndarray | None
    snapshots: tuple[tuple[float, ScalarField2D], ...] | None
    dt: float
    n_steps: int


def default_observation_time(grid: Grid2D, c: WaveSpeed) -> float:
    """Conservative observation window: three domain crossings at the slowest
    admissible speed. Stands in for the non-trapping travel-time bound on
    this convex rectangle."""
    return 3.0 * grid.diameter / c.c_low


def _discretize(grid: Grid2D, c: WaveSpeed, cfg: SolverConfig) -> tuple[float, int]:
    # anchored on the admissible maximum speed, not the field's pointwise
    # max: every speed of the same admissible class then shares one time
    # grid, so traces from different speeds stay comparable
    dt_raw = cfg.cfl_factor * min(grid.hx, grid.hy) / c.c_high
    n = max(int(math.ceil(cfg.T / dt_raw)), 2)
    rem = n % cfg.record_stride
    if rem:
        n += cfg.record_stride - rem
    return cfg.T / n, n


def cfl_timestep(grid: Grid2D, c: WaveSpeed, cfg: SolverConfig) -> float:
    """Stable time step: cfl_factor * min(h) / max admissible c, rounded
    down so that T is an integer multiple of dt (and of the recording
    stride)."""
    return _discretize(grid, c, cfg)[0]


def _impedance_coefficient(grid: Grid2D, gamma: BoundaryImpedance) -> np.ndarray:
    """Nodal ghost-closure coefficient: 2 gamma / h per boundary face the
    node belongs to (corners accumulate both faces); zero inside."""
    g2d = np.zeros(grid.shape)
    g2d.reshape(-1)[grid.boundary_flat] = gamma.gamma
    b = np.zeros(grid.shape)
    b[0, :] += 2.0 / grid.hx
    b[-1, :] += 2.0 / grid.hx
    b[:, 0] += 2.0 / grid.hy
    b[:, -1] += 2.0 / grid.hy
    return g2d * b


def _axis_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def dirichlet_form(u: np.ndarray, v: np.ndarray, grid: Grid2D) -> float:
    """Edge-midpoint quadrature of grad(u) . grad(v); the bilinear form under
    which the reflected Laplacian is symmetric."""
    wx = _axis_weights(grid.nx, grid.hx)
    wy = _axis_weights(grid.ny, grid.hy)
    dux = (u[1:, :] - u[:-1, :]) * (v[1:, :] - v[:-1, :])
    duy = (u[:, 1:] - u[:, :-1]) * (v[:, 1:] - v[:, :-1])
    sx = float(np.einsum("ij,j->", dux, wy)) / grid.hx
    sy = float(np.einsum("ij,i->", duy, wx)) / grid.hy
    return sx + sy


def _staggered_energy(
    u_new: np.ndarray, u_old: np.ndarray, dt: float, wcinv2: np.ndarray, grid: Grid2D
) -> float:
    """The exactly-dissipated discrete energy of the half-step (u_new, u_old)."""
    delta = (u_new - u_old) / dt
    kinetic = 0.5 * float(np.sum(wcinv2 * delta * delta))
    return kinetic + 0.5 * dirichlet_form(u_new, u_old, grid)


def _check_shared_grid(grid: Grid2D, *others):
    for obj in others:
        if not grid.same_geometry(obj.grid):
            raise GridMismatchError("inputs live on different grids")


def simulate(
    c: WaveSpeed,
    gamma: BoundaryImpedance,
    state: InitialState,
    cfg: SolverConfig,
    keep_trajectory: bool = False,
) -> SimulationResult:
    """Run the initial value problem and record the boundary trace.

    The returned energy series holds the staggered discrete invariant at
    every recorded step; with gamma > 0 it is non-increasing up to rounding.
    Raises BlowUpError naming the step if any |u| exceeds 1e12.
    """
    grid = c.grid
    _check_shared_grid(grid, gamma, state)
    dt, n_steps = _discretize(grid, c, cfg)
    stride = cfg.record_stride
    n_rec = n_steps // stride + 1

    csq = c.field.values**2
    dt2 = dt * dt
    dt2csq = dt2 * csq
    bcoef = _impedance_coefficient(grid, gamma)
    half = 0.5 * dt * csq * bcoef
    pinv = 1.0 / (1.0 + half)
    qfac = 1.0 - half
    ihx2 = 1.0 / grid.hx**2
    ihy2 = 1.0 / grid.hy**2
    bflat = grid.boundary_flat
    wcinv2 = grid.quad_weights / csq

    u_prev = np.array(state.u0.values, dtype=np.float64, order="C")
    u1v = state.u1.values
    lap0 = kernels.lap_reflect(u_prev, ihx2, ihy2)
    u_cur = u_prev + dt * u1v + (0.5 * dt2) * (csq * lap0 - csq * (bcoef * u1v))
    u_next = np.empty_like(u_cur)

    samples = np.empty((n_rec, grid.n_boundary))
    energies = np.empty(n_rec)
    samples[0] = u_prev.reshape(-1)[bflat]
    energies[0] = _staggered_energy(u_cur, u_prev, dt, wcinv2, grid)

    trajectory = None
    if keep_trajectory:
        trajectory = np.empty((n_steps + 1, grid.nx, grid.ny))
        trajectory[0] = u_prev
        trajectory[1] = u_cur

    ss = cfg.snapshot_stride
    snaps: list[WaveSnapshot] | None = [] if ss is not None else None
    if snaps is not None:
        snaps.append(
            WaveSnapshot(0.0, ScalarField2D(grid, u_prev), ScalarField2D(grid, u1v))
        )

    if stride == 1 and n_rec > 1:
        samples[1] = u_cur.reshape(-1)[bflat]
        energies[1] = energies[0]

    for n in range(1, n_steps):
        maxabs = kernels.leapfrog_step(u_next, u_cur, u_prev, dt2csq, pinv, qfac, ihx2, ihy2)
        if maxabs > BLOWUP_THRESHOLD:
            raise BlowUpError(f"simulation blew up at step {n + 1} (|u| = {maxabs:.3e})", n + 1)
        m = n + 1
        if m % stride == 0:
            k = m // stride
            samples[k] = u_next.reshape(-1)[bflat]
            energies[k] = _staggered_energy(u_next, u_cur, dt, wcinv2, grid)
        if snaps is not None and n % ss == 0:
            udot = (u_next - u_prev) / (2.0 * dt)
            snaps.append(WaveSnapshot(n * dt, ScalarField2D(grid, u_cur), ScalarField2D(grid, udot)))
        if keep_trajectory:
            trajectory[m] = u_next
        u_prev, u_cur, u_next = u_cur, u_next, u_prev

    if snaps is not None:
        # final snapshot needs one virtual extra step for the centered rate
        kernels.leapfrog_step(u_next, u_cur, u_prev, dt2csq, pinv, qfac, ihx2, ihy2)
        udot = (u_next - u_prev) / (2.0 * dt)
        snaps.append(
            WaveSnapshot(n_steps * dt, ScalarField2D(grid, u_cur), ScalarField2D(grid, udot))
        )

    energies.flags.writeable = False
    trace = BoundaryTrace(grid, stride * dt, samples)
    return SimulationResult(
        trace=trace,
        snapshots=tuple(snaps) if snaps is not None else None,
        energies=energies,
        dt=dt,
        n_steps=n_steps,
        trajectory=trajectory,
    )


def forward_map(
    c: WaveSpeed, gamma: BoundaryImpedance, state: InitialState, cfg: SolverConfig
) -> BoundaryTrace:
    """The measurement operator: boundary values of the wave solution."""
    return simulate(c, gamma, state, cfg).trace


def energy(snap: WaveSnapshot, c: WaveSpeed) -> float:
    """Physical energy of a snapshot: half the quadrature of
    |u_dot|^2 / c^2 + |grad u|^2."""
    w = c.grid.quad_weights
    kinetic = 0.5 * float(np.sum(w * snap.u_dot.values**2 / c.field.values**2))
    return kinetic + 0.5 * grad_norm_h0_sq(snap.u)


def adjoint_simulate(
    residual: BoundaryTrace,
    c: WaveSpeed,
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    trajectory: np.ndarray | None = None,
    initial_state: InitialState | None = None,
    want_snapshots: bool = False,
) -> AdjointResult:
    """Transpose of the forward recursion, driven by a residual trace.

    The residual must have been recorded with the same grid, speed, and
    solver configuration (same step count and recording stride). When the
    forward ``trajectory`` is supplied (``simulate(..., keep_trajectory=True)``)
    the sweep also accumulates the gradient of the squared-misfit functional
    with respect to the squared wave speed; ``initial_state`` then supplies
    the u1 term of the first-step transpose (zero when omitted, the usual
    photoacoustic regime).
    """
    grid = c.grid
    _check_shared_grid(grid, gamma, residual)
    dt, n_steps = _discretize(grid, c, cfg)
    stride = cfg.record_stride
    n_rec = n_steps // stride + 1
    if residual.n_samples != n_rec:
        raise ConfigError(
            f"residual has {residual.n_samples} samples, solver would record {n_rec}"
        )
    if abs(residual.dt_record - stride * dt) > 1e-9 * dt:
        raise ConfigError(
            f"residual recording interval {residual.dt_record:g} does not match "
            f"solver step {stride * dt:g}"
        )
    if trajectory is not None and trajectory.shape != (n_steps + 1, grid.nx, grid.ny):
        raise ConfigError(
            f"trajectory shape {trajectory.shape} does not match "
            f"({n_steps + 1}, {grid.nx}, {grid.ny})"
        )

    csq = c.field.values**2
    dt2 = dt * dt
    bcoef = _impedance_coefficient(grid, gamma)
    half = 0.5 * dt * csq * bcoef
    pinv = 1.0 / (1.0 + half)
    qfac = 1.0 - half
    ihx2 = 1.0 / grid.hx**2
    ihy2 = 1.0 / grid.hy**2
    bflat = grid.boundary_flat
    quad = grid.quad_weights
    dt_rec = stride * dt

    # seed scaling: trace quadrature weight over field quadrature weight
    scale_b = grid.boundary_arc_weights / quad.reshape(-1)[bflat]
    K = n_rec - 1

    def add_seed(v: np.ndarray, k: int) -> None:
        wt = dt_rec * (0.5 if k in (0, K) else 1.0)
        v.reshape(-1)[bflat] += (wt * scale_b) * residual.samples[k]

    v_np1 = np.zeros(grid.shape)
    v_n = np.zeros(grid.shape)
    v_nm1 = np.zeros(grid.shape)
    scratch = np.empty(grid.shape)
    add_seed(v_np1, K)

    gq = np.zeros(grid.shape) if trajectory is not None else None
    bhalf_dt = 0.5 * dt * bcoef
    ss = cfg.snapshot_stride if want_snapshots else None
    adj_snaps: list[tuple[float, ScalarField2D]] | None = [] if want_snapshots else None

    for n in range(n_steps - 1, 0, -1):
        if n % stride == 0:
            add_seed(v_n, n // stride)
        if gq is not None:
            kernels.gradient_accumulate(
                gq, v_np1, pinv, quad,
                trajectory[n - 1], trajectory[n], trajectory[n + 1],
                bhalf_dt, dt2, ihx2, ihy2,
            )
        if adj_snaps is not None and (ss is None or (n + 1) % ss == 0):
            adj_snaps.append(((n + 1) * dt, ScalarField2D(grid, pinv * v_np1)))
        kernels.adjoint_step(v_n, v_nm1, v_np1, csq, pinv, qfac, dt2, ihx2, ihy2, scratch)
        v_np1[:] = 0.0
        v_np1, v_n, v_nm1 = v_n, v_nm1, v_np1

    v1, v0 = v_np1, v_n
    add_seed(v0, 0)
    lap_cv1 = kernels.lap_reflect(csq * v1, ihx2, ihy2)
    g_u0 = v0 + v1 + (0.5 * dt2) * lap_cv1
    g_u1 = dt * v1 - (0.5 * dt2) * (bcoef * (csq * v1))
    if gq is not None:
        u1v = initial_state.u1.values if initial_state is not None else np.zeros(grid.shape)
        lap_u0 = kernels.lap_reflect(np.ascontiguousarray(trajectory[0]), ihx2, ihy2)
        gq += (quad * v1) * ((0.5 * dt2) * (lap_u0 - bcoef * u1v))

    return AdjointResult(
        grad_u0=ScalarField2D(grid, g_u0),
        grad_u1=ScalarField2D(grid, g_u1),
        sq_speed_gradient=gq,
        snapshots=tuple(reversed(adj_snaps)) if adj_snaps is not None else None,
        dt=dt,
        n_steps=n_steps,
    )
