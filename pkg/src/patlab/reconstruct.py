"""Iterative recovery of initial pressure and wave speed from one trace.

The pressure subproblem is linear and handled by Landweber sweeps
(gradient steps on the squared trace misfit, boundary values clamped to
zero). The speed lives on a much coarser bilinear mesh: its gradient is
assembled by the exact discrete adjoint, chain-ruled through the inverse
squared speed, restricted to the coarse mesh, and applied as a projected
(bound-clamped) descent step, optionally with Nesterov momentum.

Joint runs monitor per-variable contraction factors over a trailing window
and apply the relaxation rule: whenever the speed iterates contract more
slowly than the pressure iterates (beta_c > alpha_u), the speed step is
halved and the pressure step damped, so the pressure never outruns the
speed. This is what keeps the iterates inside the uniqueness region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidFieldError, StepSizeError
from .fields import (
    InitialState,
    ScalarField2D,
    WaveSpeed,
    norm_h0,
    norm_w1inf,
    save_field,
)
from .grid import Grid2D
from .traces import BoundaryTrace, trace_norm_h0
from .verifier import check_uniqueness_region
from .wavesolver import BoundaryImpedance, SolverConfig, adjoint_simulate, simulate

__all__ = [
    "ReconstructionConfig",
    "IterateRecord",
    "IterateHistory",
    "ContractionReport",
    "JointResult",
    "reconstruct_pressure",
    "estimate_pressure_step",
    "gradient_wavespeed",
    "project_speed",
    "contraction_factors",
    "enforce_relaxation",
    "joint_reconstruct",
]

DIVERGENCE_PATIENCE = 5
STEP_C_FLOOR_FACTOR = 2.0**-20


@dataclass(frozen=True)
class ReconstructionConfig:
    """Knobs of the iterative schemes.

    ``step_c`` doubles as the configured maximum for the speed step; when
    ``line_search_step_c`` is on, the opening value is picked by a one-shot
    line search at the first speed update and capped by ``step_c``.
    ``tol_misfit`` is relative to the H0 norm of the measured trace.
    """

    step_u: float
    step_c: float
    max_iter: int = 100
    tol_misfit: float = 1e-6
    coarse_nx: int = 8
    coarse_ny: int = 8
    nesterov: bool = False
    epsilon: float = 1e-2
    enforce: bool = True
    window: int = 5
    line_search_step_c: bool = True
    ordering_tol: float = 0.0

    def __post_init__(self):
        if self.step_u <= 0 or self.step_c <= 0:
            raise ConfigError("step sizes must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.coarse_nx < 2 or self.coarse_ny < 2:
            raise ConfigError("coarse mesh needs at least 2 nodes per axis")
        if self.window < 2:
            raise ConfigError("monitoring window must span at least 2 iterations")

    def validate_against(self, grid: Grid2D) -> None:
        if self.coarse_nx >= grid.nx or self.coarse_ny >= grid.ny:
            raise ConfigError(
                f"coarse mesh {self.coarse_nx}x{self.coarse_ny} is not strictly "
                f"coarser than the {grid.nx}x{grid.ny} field grid"
            )


@dataclass
class IterateRecord:
    iteration: int
    misfit: float
    err_u_rel: float
    err_c_rel: float
    step_u: float
    step_c: float
    alpha_u: float = math.nan
    beta_u: float = math.nan
    alpha_c: float = math.nan
    beta_c: float = math.nan
    in_region: bool | None = None
    # increment norms back the blind-mode contraction proxies
    inc_u: float = math.nan
    inc_c: float = math.nan


@dataclass
class IterateHistory:
    """Per-iteration log of a reconstruction run."""

    max_iter: int
    records: list[IterateRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def append(self, record: IterateRecord) -> None:
        if len(self.records) >= self.max_iter + 1:
            raise ConfigError("history exceeded max_iter + 1 records")
        self.records.append(record)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(
                "iter,misfit,err_u_rel,err_c_rel,step_u,step_c,"
                "alpha_u,beta_u,alpha_c,beta_c,in_region\n"
            )
            for r in self.records:
                region = "" if r.in_region is None else str(r.in_region).lower()
                fh.write(
                    f"{r.iteration},{r.misfit:.17g},{r.err_u_rel:.17g},{r.err_c_rel:.17g},"
                    f"{r.step_u:.17g},{r.step_c:.17g},{r.alpha_u:.17g},{r.beta_u:.17g},"
                    f"{r.alpha_c:.17g},{r.beta_c:.17g},{region}\n"
                )


@dataclass(frozen=True)
class ContractionReport:
    """Trailing-window min/max error ratios for both variables.

    ``valid`` is False when ratios could not be formed; a zero error inside
    the window sets ``exact_convergence`` instead of producing ratios.
    """

    alpha_u: float
    beta_u: float
    alpha_c: float
    beta_c: float
    valid: bool = True
    exact_convergence: bool = False


@dataclass(frozen=True)
class JointResult:
    u0: InitialState
    c: WaveSpeed
    history: IterateHistory
    proxy_fidelity: float | None = None


# ---------------------------------------------------------------------------
# Two-mesh machinery
# ---------------------------------------------------------------------------


def _prolongation_1d(n_fine: int, h_fine: float, n_coarse: int, length: float) -> np.ndarray:
    """Dense (n_fine, n_coarse) bilinear interpolation matrix along one axis."""
    p = np.zeros((n_fine, n_coarse))
    h_coarse = length / (n_coarse - 1)
    for i in range(n_fine):
        s = i * h_fine / h_coarse
        i0 = min(int(s), n_coarse - 2)
        w = s - i0
        p[i, i0] = 1.0 - w
        p[i, i0 + 1] = w
    return p


def _prolongation_pair(grid: Grid2D, coarse_nx: int, coarse_ny: int):
    lx, ly = grid.extent
    px = _prolongation_1d(grid.nx, grid.hx, coarse_nx, lx)
    py = _prolongation_1d(grid.ny, grid.hy, coarse_ny, ly)
    return px, py


def prolong_coarse(grid: Grid2D, coarse: np.ndarray) -> np.ndarray:
    """Bilinear prolongation of coarse node values onto the fine grid."""
    px, py = _prolongation_pair(grid, coarse.shape[0], coarse.shape[1])
    return px @ coarse @ py.T


def restrict_fine(grid: Grid2D, fine: np.ndarray, coarse_nx: int, coarse_ny: int) -> np.ndarray:
    """Transpose of the prolongation: bilinear-weighted local averaging."""
    px, py = _prolongation_pair(grid, coarse_nx, coarse_ny)
    return px.T @ fine @ py


def project_speed(update_coarse: np.ndarray, c_cur: WaveSpeed) -> WaveSpeed:
    """Prolong a coarse speed update, add it, clamp into the speed bounds."""
    fine = prolong_coarse(c_cur.grid, np.asarray(update_coarse, dtype=np.float64))
    values = np.clip(c_cur.field.values + fine, c_cur.c_low, c_cur.c_high)
    return WaveSpeed(ScalarField2D(c_cur.grid, values), c_cur.c_low, c_cur.c_high)


# ---------------------------------------------------------------------------
# Pressure subproblem
# ---------------------------------------------------------------------------


def _clamp_boundary(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    out = values.copy()
    out.reshape(-1)[grid.boundary_flat] = 0.0
    return out


def _pressure_state(grid: Grid2D, values: np.ndarray) -> InitialState:
    return InitialState(ScalarField2D(grid, values), ScalarField2D.zeros(grid))


def estimate_pressure_step(
    c: WaveSpeed,
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    seed: int = 0,
    n_power: int = 8,
) -> float:
    """Safe Landweber step: reciprocal of a power-method estimate of the
    largest eigenvalue of the normal operator (adjoint of forward)."""
    grid = c.grid
    rng = np.random.default_rng(seed)
    x = _clamp_boundary(rng.standard_normal(grid.shape), grid)
    x /= norm_h0(ScalarField2D(grid, x))
    lam = 1.0
    for _ in range(n_power):
        trace = simulate(c, gamma, _pressure_state(grid, x), cfg).trace
        adj = adjoint_simulate(trace, c, gamma, cfg)
        y = _clamp_boundary(adj.grad_u0.values, grid)
        lam = float(np.sum(grid.quad_weights * x * y))  # Rayleigh quotient, |x| = 1
        ny = norm_h0(ScalarField2D(grid, y))
        if ny == 0:
            return 1.0
        x = y / ny
    return 1.0 / lam


def reconstruct_pressure(
    m: BoundaryTrace,
    c: WaveSpeed,
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    rcfg: ReconstructionConfig,
    truth: InitialState | None = None,
) -> tuple[InitialState, IterateHistory]:
    """Landweber iteration for the initial pressure under a known speed.

    Starts from zero, iterates u + step_u * adjoint(m - forward(u)) with the
    boundary clamped to zero, and stops at the misfit tolerance or the
    iteration cap. Raises StepSizeError after five consecutive misfit
    increases.
    """
    grid = c.grid
    history = IterateHistory(max_iter=rcfg.max_iter)
    u = np.zeros(grid.shape)
    m_norm = trace_norm_h0(m)
    truth_norm = norm_h0(truth.u0) if truth is not None else math.nan

    rising = 0
    prev_misfit = math.inf
    for n in range(rcfg.max_iter + 1):
        sim = simulate(c, gamma, _pressure_state(grid, u), cfg)
        residual = m - sim.trace
        misfit = trace_norm_h0(residual)
        err_u = (
            norm_h0(ScalarField2D(grid, u - truth.u0.values)) / truth_norm
            if truth is not None and truth_norm > 0
            else math.nan
        )
        history.append(
            IterateRecord(
                iteration=n,
                misfit=misfit,
                err_u_rel=err_u,
                err_c_rel=math.nan,
                step_u=rcfg.step_u,
                step_c=math.nan,
            )
        )
        if misfit <= rcfg.tol_misfit * m_norm or n == rcfg.max_iter:
            break
        if misfit > prev_misfit:
            rising += 1
            if rising >= DIVERGENCE_PATIENCE:
                raise StepSizeError(
                    f"misfit increased for {rising} consecutive iterations; "
                    f"reduce step_u (currently {rcfg.step_u:g})"
                )
        else:
            rising = 0
        prev_misfit = misfit
        adj = adjoint_simulate(residual, c, gamma, cfg)
        u = _clamp_boundary(u + rcfg.step_u * adj.grad_u0.values, grid)

    return _pressure_state(grid, u), history


# ---------------------------------------------------------------------------
# Speed gradient
# ---------------------------------------------------------------------------


def _coarse_speed_gradient(
    adj_sq_speed_gradient: np.ndarray,
    c: WaveSpeed,
    coarse_nx: int,
    coarse_ny: int,
) -> np.ndarray:
    """Chain the raw adjoint accumulation (seeded with measured-minus-
    simulated) through the inverse squared speed to the speed itself, then
    restrict to the coarse mesh (transpose of the prolongation, a
    bilinear-weighted local averaging)."""
    cvals = c.field.values
    grad_sq_slowness = (cvals**4) * adj_sq_speed_gradient
    grad_c_fine = -2.0 * grad_sq_slowness / cvals**3
    return restrict_fine(c.grid, grad_c_fine, coarse_nx, coarse_ny)


def gradient_wavespeed(
    state: InitialState,
    c: WaveSpeed,
    residual: BoundaryTrace,
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    coarse_nx: int,
    coarse_ny: int,
) -> np.ndarray:
    """Coarse-mesh gradient of the squared trace misfit with respect to an
    additive speed update.

    ``residual`` is measured-minus-simulated for the current (state, c).
    Internally the exact discrete gradient is taken with respect to the
    inverse squared speed, converted to speed, and restricted to the coarse
    mesh. Zero residual gives a zero gradient.
    """
    sim = simulate(c, gamma, state, cfg, keep_trajectory=True)
    adj = adjoint_simulate(
        residual, c, gamma, cfg, trajectory=sim.trajectory, initial_state=state
    )
    return _coarse_speed_gradient(adj.sq_speed_gradient, c, coarse_nx, coarse_ny)


# ---------------------------------------------------------------------------
# Contraction monitoring and the relaxation rule
# ---------------------------------------------------------------------------


def _window_ratios(values: list[float], window: int) -> tuple[list[float], bool]:
    """Consecutive ratios over the trailing window; flags a zero entry."""
    tail = values[-(window + 1):]
    if any(v == 0.0 for v in tail):
        return [], True
    ratios = [tail[i + 1] / tail[i] for i in range(len(tail) - 1)]
    return ratios, False


def contraction_factors(
    history: IterateHistory,
    truth: tuple[InitialState, WaveSpeed] | None,
    window: int = 5,
) -> ContractionReport:
    """Min/max per-step error ratios over the trailing window.

    With ``truth`` given, the truth-referenced error columns of the history
    are used (they must have been recorded against that truth). Without it,
    the iterate-increment ratios serve as blind-mode proxies.
    """
    if truth is not None:
        e_u = [r.err_u_rel for r in history.records if not math.isnan(r.err_u_rel)]
        e_c = [r.err_c_rel for r in history.records if not math.isnan(r.err_c_rel)]
    else:
        e_u = [r.inc_u for r in history.records if not math.isnan(r.inc_u)]
        e_c = [r.inc_c for r in history.records if not math.isnan(r.inc_c)]
    if len(e_u) < 3 and len(e_c) < 3:
        raise ConfigError("contraction factors need at least 3 recorded errors")

    def factors(errors: list[float]) -> tuple[float, float, bool, bool]:
        if len(errors) < 2:
            return math.nan, math.nan, False, False
        ratios, hit_zero = _window_ratios(errors, window)
        if hit_zero:
            return math.nan, math.nan, False, True
        return min(ratios), max(ratios), True, False

    au, bu, valid_u, exact_u = factors(e_u)
    ac, bc, valid_c, exact_c = factors(e_c)
    return ContractionReport(
        alpha_u=au,
        beta_u=bu,
        alpha_c=ac,
        beta_c=bc,
        valid=valid_u or valid_c,
        exact_convergence=exact_u or exact_c,
    )


def enforce_relaxation(
    report: ContractionReport,
    steps: tuple[float, float],
    step_c_floor: float = 0.0,
    ordering_tol: float = 0.0,
) -> tuple[tuple[float, float], list[str]]:
    """Apply the relaxation rule to (step_u, step_c).

    If beta_c > alpha_u (beyond ``ordering_tol``) the speed step is halved;
    when the speed is still contracting (beta_c < 1) the pressure step is
    additionally damped by the linear-rate factor (1 - beta_c)/(1 - alpha_u),
    floored at one half, which slows the pressure down toward the required
    ordering. Steps are never increased. A warning is returned when the
    speed step saturates at its floor.
    """
    step_u, step_c = steps
    warnings: list[str] = []
    if not report.valid or report.exact_convergence:
        return (step_u, step_c), warnings
    if math.isnan(report.beta_c) or math.isnan(report.alpha_u):
        return (step_u, step_c), warnings
    if report.beta_c <= report.alpha_u + ordering_tol:
        return (step_u, step_c), warnings
    new_c = 0.5 * step_c
    if new_c < step_c_floor:
        new_c = step_c
        warnings.append(
            f"relaxation saturated: step_c at floor {step_c:.3e} with "
            f"beta_c={report.beta_c:.3f} > alpha_u={report.alpha_u:.3f}"
        )
    new_u = step_u
    if report.beta_c < 1.0 and report.alpha_u < 1.0:
        factor = (1.0 - report.beta_c) / (1.0 - report.alpha_u)
        new_u = step_u * min(1.0, max(factor, 0.5))
    return (new_u, new_c), warnings


# ---------------------------------------------------------------------------
# Joint reconstruction
# ---------------------------------------------------------------------------


def _line_search_step_c(
    grad_coarse: np.ndarray,
    u_state: InitialState,
    c: WaveSpeed,
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    m: BoundaryTrace,
    cap: float,
    misfit0: float,
) -> tuple[float, list[str]]:
    """One-shot geometric line search along the projected descent direction."""
    d_fine = prolong_coarse(c.grid, -grad_coarse)
    peak = float(np.abs(d_fine).max())
    if peak == 0.0:
        return cap, []
    t_ref = 0.05 * float(np.mean(c.field.values)) / peak
    best_t, best_j = None, misfit0
    for j in range(-3, 4):
        t = min(t_ref * 2.0**j, cap)
        try:
            cand = project_speed(-t * grad_coarse, c)
        except InvalidFieldError:
            continue  # candidate leaves the admissible speed class
        mis = trace_norm_h0(m - simulate(cand, gamma, u_state, cfg).trace)
        if mis < best_j:
            best_t, best_j = t, mis
    if best_t is None:
        return min(t_ref / 8.0, cap), ["speed line search found no descent; starting tiny"]
    return best_t, []


def _nesterov_weight(k: int) -> float:
    """Classical accelerated-gradient extrapolation weight at step k."""
    t = 1.0
    for _ in range(k):
        t = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
    t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
    return (t - 1.0) / t_next


def joint_reconstruct(
    m: BoundaryTrace,
    init: tuple[InitialState, WaveSpeed],
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    rcfg: ReconstructionConfig,
    truth: tuple[InitialState, WaveSpeed] | None = None,
    checkpoint_dir=None,
    checkpoint_stride: int = 0,
) -> JointResult:
    """Alternate one pressure Landweber sweep with one projected speed step.

    Contraction factors are monitored every ``rcfg.window`` iterations and
    the relaxation rule applied when ``rcfg.enforce`` is on. With ``truth``
    supplied the history carries truth-referenced errors and the region flag
    of every iterate; leaving the region is a warning, not an error.
    Nesterov momentum, when enabled, acts on the speed variable only.
    """
    u_state, c = init
    grid = c.grid
    rcfg.validate_against(grid)
    history = IterateHistory(max_iter=rcfg.max_iter)
    m_norm = trace_norm_h0(m)

    step_u = rcfg.step_u
    step_c = rcfg.step_c
    step_c_floor = rcfg.step_c * STEP_C_FLOOR_FACTOR
    u = u_state.u0.values.copy()
    c_prev = c
    need_line_search = rcfg.line_search_step_c

    truth_u_norm = norm_h0(truth[0].u0) if truth is not None else math.nan
    truth_c_norm = norm_w1inf(truth[1].field) if truth is not None else math.nan

    prev_u = None
    prev_c_vals = None
    rising = 0
    prev_misfit = math.inf
    region_left = False

    for n in range(rcfg.max_iter + 1):
        state_n = _pressure_state(grid, u)
        want_traj = not rcfg.nesterov
        sim = simulate(c, gamma, state_n, cfg, keep_trajectory=want_traj)
        residual = m - sim.trace
        misfit = trace_norm_h0(residual)

        err_u = err_c = math.nan
        in_region = None
        if truth is not None:
            err_u = (
                norm_h0(ScalarField2D(grid, u - truth[0].u0.values)) / truth_u_norm
                if truth_u_norm > 0
                else math.nan
            )
            err_c = norm_w1inf(c.field - truth[1].field) / truth_c_norm
            in_region = check_uniqueness_region(
                truth[1], c, truth[0], state_n, rcfg.epsilon
            ).in_region
            if in_region is False and not region_left:
                region_left = True
                history.warnings.append(f"iterate {n} left the uniqueness region")

        inc_u = (
            norm_h0(ScalarField2D(grid, u - prev_u)) if prev_u is not None else math.nan
        )
        inc_c = (
            norm_w1inf(ScalarField2D(grid, c.field.values - prev_c_vals))
            if prev_c_vals is not None
            else math.nan
        )
        record = IterateRecord(
            iteration=n,
            misfit=misfit,
            err_u_rel=err_u,
            err_c_rel=err_c,
            step_u=step_u,
            step_c=step_c,
            in_region=in_region,
            inc_u=inc_u,
            inc_c=inc_c,
        )

        # contraction monitoring on a full trailing window
        if n >= rcfg.window and n % rcfg.window == 0:
            try:
                report = contraction_factors(history, truth, window=rcfg.window)
            except ConfigError:
                report = ContractionReport(*(math.nan,) * 4, valid=False)
            record.alpha_u, record.beta_u = report.alpha_u, report.beta_u
            record.alpha_c, record.beta_c = report.alpha_c, report.beta_c
            if rcfg.enforce:
                (step_u, step_c), warns = enforce_relaxation(
                    report, (step_u, step_c), step_c_floor, rcfg.ordering_tol
                )
                history.warnings.extend(warns)

        history.append(record)

        if checkpoint_dir is not None and checkpoint_stride > 0 and n % checkpoint_stride == 0:
            save_field(ScalarField2D(grid, u), f"{checkpoint_dir}/u0_iter{n:05d}.patf")
            save_field(c.field, f"{checkpoint_dir}/c_iter{n:05d}.patf")

        if misfit <= rcfg.tol_misfit * m_norm or n == rcfg.max_iter:
            break
        if misfit > prev_misfit:
            rising += 1
            if rising >= DIVERGENCE_PATIENCE:
                raise StepSizeError(
                    f"misfit increased for {rising} consecutive iterations; "
                    "reduce the step sizes"
                )
        else:
            rising = 0
        prev_misfit = misfit
        prev_u = u.copy()
        prev_c_vals = c.field.values.copy()

        # pressure sweep from the shared linearization point
        adj = adjoint_simulate(
            residual,
            c,
            gamma,
            cfg,
            trajectory=sim.trajectory if want_traj else None,
            initial_state=state_n,
        )
        u = _clamp_boundary(u + step_u * adj.grad_u0.values, grid)

        # speed step, optionally from an extrapolated point
        if rcfg.nesterov and n >= 1:
            mu = _nesterov_weight(n)
            extrap = np.clip(
                c.field.values + mu * (c.field.values - c_prev.field.values),
                c.c_low,
                c.c_high,
            )
            y_c = WaveSpeed(ScalarField2D(grid, extrap), c.c_low, c.c_high)
        else:
            y_c = c

        state_next = _pressure_state(grid, u)
        if rcfg.nesterov:
            sim_c = simulate(y_c, gamma, state_next, cfg, keep_trajectory=True)
            adj_c = adjoint_simulate(
                m - sim_c.trace, y_c, gamma, cfg,
                trajectory=sim_c.trajectory, initial_state=state_next,
            )
            grad_coarse = _coarse_speed_gradient(
                adj_c.sq_speed_gradient, y_c, rcfg.coarse_nx, rcfg.coarse_ny
            )
        else:
            grad_coarse = _coarse_speed_gradient(
                adj.sq_speed_gradient, y_c, rcfg.coarse_nx, rcfg.coarse_ny
            )

        if need_line_search and np.any(grad_coarse):
            step_c, warns = _line_search_step_c(
                grad_coarse, state_next, y_c, gamma, cfg, m, rcfg.step_c, misfit
            )
            history.warnings.extend(warns)
            need_line_search = False

        c_prev = c
        while True:
            try:
                c = project_speed(-step_c * grad_coarse, y_c)
                break
            except InvalidFieldError:
                step_c *= 0.5
                history.warnings.append(
                    f"iterate {n}: speed update left the admissible class; "
                    f"step_c halved to {step_c:.3e}"
                )
                if step_c < step_c_floor:
                    c = y_c
                    break

    proxy_fidelity = None
    if truth is not None:
        proxy_fidelity = _proxy_fidelity(history)
    return JointResult(
        u0=_pressure_state(grid, u), c=c, history=history, proxy_fidelity=proxy_fidelity
    )


def _proxy_fidelity(history: IterateHistory) -> float | None:
    """Mean absolute deviation between increment-ratio proxies and the
    truth-referenced error ratios, pooled over both variables."""
    devs = []
    for true_col, inc_col in (("err_u_rel", "inc_u"), ("err_c_rel", "inc_c")):
        errs = [getattr(r, true_col) for r in history.records]
        incs = [getattr(r, inc_col) for r in history.records]
        for i in range(1, len(errs) - 1):
            pieces = errs[i], errs[i + 1], incs[i], incs[i + 1]
            if any(math.isnan(v) or v == 0 for v in pieces):
                continue
            devs.append(abs(errs[i + 1] / errs[i] - incs[i + 1] / incs[i]))
    return float(np.mean(devs)) if devs else None
