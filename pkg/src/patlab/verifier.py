"""Uniqueness-region checks and empirical stability certification.

Every quantity here is a relative discrepancy ratio. The region condition
compares the squared relative speed discrepancy (W1-inf norms of the inverse
squared speeds) against epsilon times the squared relative state discrepancy
(H0 for the pressure, H-1 for the rate). The stability pipeline runs both
forward maps per ensemble member and reports the empirical constant
max over members of T * state_ratio_sq / meas_ratio_sq.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMeasurementError,
    DegenerateStateError,
    GridMismatchError,
    RegionPreconditionError,
)
from .fields import (
    InitialState,
    StateBounds,
    WaveSpeed,
    grad_norm_h0_sq,
    norm_h0,
    norm_hminus1,
    norm_w1inf,
)
from .traces import BoundaryTrace, trace_norm_h0, trace_norm_h1h0
from .wavesolver import BoundaryImpedance, SolverConfig, forward_map

__all__ = [
    "DiscrepancyReport",
    "StabilityReport",
    "EnsembleMember",
    "speed_discrepancy_ratio",
    "state_discrepancy_ratio",
    "measurement_discrepancy_ratio",
    "check_uniqueness_region",
    "check_assumption_bounds",
    "stability_report",
    "report_to_csv",
]

# Thresholds separating solver noise from genuine trace equality.
STATE_RATIO_FLOOR = 1e-4
MEAS_RATIO_FLOOR = 1e-16


@dataclass(frozen=True)
class DiscrepancyReport:
    """The ratios entering the region condition and the stability estimate.

    ``meas_ratio_sq`` and ``empirical_quotient`` are None for region-only
    reports (no forward solves run).
    """

    speed_ratio_sq: float
    state_ratio_sq: float
    epsilon: float
    in_region: bool
    meas_ratio_sq: float | None = None
    empirical_quotient: float | None = None

    def __post_init__(self):
        if self.speed_ratio_sq < 0 or self.state_ratio_sq < 0:
            raise ValueError("discrepancy ratios must be nonnegative")
        if self.in_region != (self.speed_ratio_sq <= self.epsilon * self.state_ratio_sq):
            raise ValueError("in_region verdict inconsistent with the stored ratios")


@dataclass(frozen=True)
class StabilityReport:
    """Ensemble-level summary of the empirical stability constant.

    ``member_indices`` maps positions in ``quotients``/``reports`` back to
    the original ensemble (degenerate members are skipped, not reported).
    A quotient may be infinite only when the measurement discrepancy
    vanished; such members appear under ``violations`` when their state
    discrepancy was above the noise floor.
    """

    n_pairs: int
    quotients: tuple[float, ...]
    c_empirical: float
    pairs_in_region: int
    reports: tuple[DiscrepancyReport, ...]
    member_indices: tuple[int, ...]
    degenerate_members: tuple[int, ...]
    violations: tuple[int, ...]

    def __post_init__(self):
        if self.quotients and self.c_empirical != max(self.quotients):
            raise ValueError("c_empirical must equal the maximum quotient")


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    """One (c, c_tilde, state, state_tilde) pair of an ensemble."""

    c: WaveSpeed
    c_tilde: WaveSpeed
    state: InitialState
    state_tilde: InitialState


def speed_discrepancy_ratio(c: WaveSpeed, c_tilde: WaveSpeed) -> float:
    """Squared relative W1-inf discrepancy of the inverse squared speeds.

    The denominator always uses the first argument.
    """
    if not c.grid.same_geometry(c_tilde.grid):
        raise GridMismatchError("speeds live on different grids")
    diff = c.sq_slowness() - c_tilde.sq_slowness()
    return (norm_w1inf(diff) / norm_w1inf(c.sq_slowness())) ** 2


def state_discrepancy_ratio(s: InitialState, s_tilde: InitialState) -> float:
    """Squared relative state discrepancy: H0 on u0, H-1 on u1, against the
    same pair of norms of the first state."""
    if not s.grid.same_geometry(s_tilde.grid):
        raise GridMismatchError("states live on different grids")
    denom = norm_h0(s.u0) ** 2 + norm_hminus1(s.u1) ** 2
    if denom == 0.0:
        raise DegenerateStateError("reference state has zero mass")
    num = norm_h0(s.u0 - s_tilde.u0) ** 2 + norm_hminus1(s.u1 - s_tilde.u1) ** 2
    return num / denom


def measurement_discrepancy_ratio(
    trace: BoundaryTrace, trace_tilde: BoundaryTrace, ref: BoundaryTrace
) -> float:
    """Squared trace discrepancy, H1-in-time over the H0 norm of the
    reference trace."""
    if not (trace.same_recording(trace_tilde) and trace.same_recording(ref)):
        raise GridMismatchError("traces have different recording geometry")
    ref_sq = trace_norm_h0(ref) ** 2
    if ref_sq == 0.0:
        raise DegenerateMeasurementError("reference trace is identically zero")
    return trace_norm_h1h0(trace - trace_tilde) ** 2 / ref_sq


def check_uniqueness_region(
    c: WaveSpeed,
    c_tilde: WaveSpeed,
    s: InitialState,
    s_tilde: InitialState,
    epsilon: float,
) -> DiscrepancyReport:
    """Region membership: speed ratio at most epsilon times state ratio."""
    speed_sq = speed_discrepancy_ratio(c, c_tilde)
    state_sq = state_discrepancy_ratio(s, s_tilde)
    return DiscrepancyReport(
        speed_ratio_sq=speed_sq,
        state_ratio_sq=state_sq,
        epsilon=epsilon,
        in_region=speed_sq <= epsilon * state_sq,
    )


def check_assumption_bounds(s: InitialState, k: float, K: float) -> StateBounds:
    """Evaluate the two quadratic state quantities against (k, K).

    The verdict lives on the returned StateBounds (``mass_ok``, ``energy_ok``,
    ``satisfied``); a failed bound is data, not an error.
    """
    energy_upper = grad_norm_h0_sq(s.u0) + norm_h0(s.u1) ** 2
    mass_lower = norm_h0(s.u0) ** 2 + norm_hminus1(s.u1) ** 2
    return StateBounds(energy_upper=energy_upper, mass_lower=mass_lower, k=k, K=K)


def suggest_state_bounds(states: list[InitialState]) -> tuple[float, float]:
    """Family defaults: k is half the smallest mass quantity, K twice the
    largest energy quantity over the given states."""
    masses = []
    energies = []
    for s in states:
        masses.append(norm_h0(s.u0) ** 2 + norm_hminus1(s.u1) ** 2)
        energies.append(grad_norm_h0_sq(s.u0) + norm_h0(s.u1) ** 2)
    return 0.5 * min(masses), 2.0 * max(energies)


def _evaluate_member(args) -> tuple[int, float, float]:
    idx, member, gamma, cfg = args
    trace = forward_map(member.c, gamma, member.state, cfg)
    trace_tilde = forward_map(member.c_tilde, gamma, member.state_tilde, cfg)
    meas_sq = measurement_discrepancy_ratio(trace, trace_tilde, trace)
    return idx, meas_sq, trace_norm_h0(trace)


def stability_report(
    members: list[EnsembleMember],
    gamma: BoundaryImpedance,
    cfg: SolverConfig,
    epsilon: float,
    state_bounds: tuple[float, float] | None = None,
    workers: int = 1,
) -> StabilityReport:
    """Run both forward maps for every member and aggregate the empirical
    stability quotients.

    Preconditions: every nondegenerate member must lie inside the region for
    the given epsilon and satisfy the state bounds (derived from the ensemble
    itself when not supplied); offenders raise RegionPreconditionError.
    Members with zero state discrepancy carry no information and are skipped.
    Evaluation may fan out over processes; aggregation is ordered by member
    index either way.
    """
    region_reports: dict[int, DiscrepancyReport] = {}
    degenerate: list[int] = []
    offenders: list[int] = []

    if state_bounds is None:
        all_states = [m.state for m in members] + [m.state_tilde for m in members]
        state_bounds = suggest_state_bounds(all_states)
    k_thr, big_k = state_bounds

    for idx, member in enumerate(members):
        speed_sq = speed_discrepancy_ratio(member.c, member.c_tilde)
        state_sq = state_discrepancy_ratio(member.state, member.state_tilde)
        if state_sq == 0.0 and speed_sq == 0.0:
            degenerate.append(idx)
            continue
        report = DiscrepancyReport(
            speed_ratio_sq=speed_sq,
            state_ratio_sq=state_sq,
            epsilon=epsilon,
            in_region=speed_sq <= epsilon * state_sq,
        )
        region_reports[idx] = report
        bounds_ok = (
            check_assumption_bounds(member.state, k_thr, big_k).satisfied
            and check_assumption_bounds(member.state_tilde, k_thr, big_k).satisfied
        )
        if not report.in_region or not bounds_ok:
            offenders.append(idx)

    if offenders:
        raise RegionPreconditionError(
            f"members {offenders} violate the region condition or state bounds "
            f"(epsilon = {epsilon:g})",
            offenders=offenders,
        )

    jobs = [(idx, members[idx], gamma, cfg) for idx in sorted(region_reports)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_evaluate_member, jobs))
    else:
        raw = [_evaluate_member(job) for job in jobs]
    raw.sort(key=lambda item: item[0])

    final_reports: list[DiscrepancyReport] = []
    quotients: list[float] = []
    violations: list[int] = []
    for idx, meas_sq, _ref_norm in raw:
        base = region_reports[idx]
        quotient = cfg.T * base.state_ratio_sq / meas_sq if meas_sq > 0 else float("inf")
        if base.state_ratio_sq > STATE_RATIO_FLOOR and meas_sq < MEAS_RATIO_FLOOR:
            violations.append(idx)
        final_reports.append(
            DiscrepancyReport(
                speed_ratio_sq=base.speed_ratio_sq,
                state_ratio_sq=base.state_ratio_sq,
                epsilon=epsilon,
                in_region=base.in_region,
                meas_ratio_sq=meas_sq,
                empirical_quotient=quotient,
            )
        )
        quotients.append(quotient)

    return StabilityReport(
        n_pairs=len(members),
        quotients=tuple(quotients),
        c_empirical=max(quotients) if quotients else 0.0,
        pairs_in_region=sum(r.in_region for r in final_reports),
        reports=tuple(final_reports),
        member_indices=tuple(idx for idx, _, _ in raw),
        degenerate_members=tuple(degenerate),
        violations=tuple(violations),
    )


def report_to_csv(report: StabilityReport, path) -> None:
    """Per-member CSV plus a summary row."""
    member_indices = report.member_indices
    with open(path, "w", newline="") as fh:
        fh.write("member,speed_ratio_sq,state_ratio_sq,meas_ratio_sq,in_region,quotient\n")
        for idx, rep in zip(member_indices, report.reports):
            fh.write(
                f"{idx},{rep.speed_ratio_sq:.17g},{rep.state_ratio_sq:.17g},"
                f"{rep.meas_ratio_sq:.17g},{str(rep.in_region).lower()},"
                f"{rep.empirical_quotient:.17g}\n"
            )
        fh.write(
            f"summary,n_pairs={report.n_pairs},in_region={report.pairs_in_region},"
            f"violations={len(report.violations)},degenerate={len(report.degenerate_members)},"
            f"c_empirical={report.c_empirical:.17g}\n"
        )
