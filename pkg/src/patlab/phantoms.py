"""Ground-truth phantoms and controlled perturbation pairs.

Pressure phantoms are compactly supported inside a configurable margin, so
the zero-boundary invariant of an initial state holds exactly. Speed
phantoms are smooth fields confined to a relative variation band around a
base speed. Perturbation pairs are built from fixed band-limited random
shapes whose amplitude is bisected until the requested discrepancy ratios
are met.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PhantomSpecError, SaturationError
from .fields import (
    InitialState,
    ScalarField2D,
    WaveSpeed,
    norm_h0,
)
from .grid import Grid2D
from .verifier import speed_discrepancy_ratio, state_discrepancy_ratio

__all__ = [
    "PhantomFeature",
    "PhantomSpec",
    "make_pressure_phantom",
    "make_speed_phantom",
    "perturb_pair",
]

KINDS = ("disks", "gaussians", "shepp-like")

# fraction of a disk radius used for the cosine roll-off
DISK_TAPER = 0.3
# Gaussian support is cut at this many widths
GAUSSIAN_CUTOFF = 3.0


@dataclass(frozen=True)
class PhantomFeature:
    """One blob: center, size, signed amplitude, optional ellipse shape."""

    center: tuple[float, float]
    radius: float
    amplitude: float
    aspect: float = 1.0
    angle: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise PhantomSpecError(f"feature radius must be positive, got {self.radius}")
        if not np.isfinite(self.amplitude):
            raise PhantomSpecError("feature amplitude must be finite")
        if self.aspect <= 0:
            raise PhantomSpecError("feature aspect ratio must be positive")


@dataclass(frozen=True)
class PhantomSpec:
    """Recipe for a phantom: kind, feature list, margin, and RNG seed."""

    kind: str
    features: tuple[PhantomFeature, ...] = ()
    support_margin: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PhantomSpecError(f"unknown phantom kind {self.kind!r}, pick one of {KINDS}")
        if self.support_margin <= 0:
            raise PhantomSpecError("support margin must be positive")
        object.__setattr__(self, "features", tuple(self.features))


def _support_radius(feature: PhantomFeature, kind: str) -> float:
    base = feature.radius * max(1.0, feature.aspect)
    return GAUSSIAN_CUTOFF * base if kind == "gaussians" else base


def _elliptic_distance(grid: Grid2D, feature: PhantomFeature) -> np.ndarray:
    """Rotated, aspect-scaled distance from the feature center."""
    xx, yy = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    dx = xx - feature.center[0]
    dy = yy - feature.center[1]
    ca, sa = np.cos(feature.angle), np.sin(feature.angle)
    xr = ca * dx + sa * dy
    yr = -sa * dx + ca * dy
    return np.sqrt(xr**2 + (yr / feature.aspect) ** 2)


def _disk_profile(r: np.ndarray, radius: float) -> np.ndarray:
    """Flat top with a cosine-squared roll-off; exactly zero outside."""
    flat = radius * (1.0 - DISK_TAPER)
    out = np.zeros_like(r)
    out[r <= flat] = 1.0
    band = (r > flat) & (r < radius)
    s = (r[band] - flat) / (radius - flat)
    out[band] = np.cos(0.5 * np.pi * s) ** 2
    return out


def _gaussian_profile(r: np.ndarray, width: float) -> np.ndarray:
    """Gaussian with a smooth polynomial cutoff at GAUSSIAN_CUTOFF widths."""
    rcut = GAUSSIAN_CUTOFF * width
    out = np.zeros_like(r)
    inside = r < rcut
    s = r[inside] / rcut
    out[inside] = np.exp(-0.5 * (r[inside] / width) ** 2) * (1.0 - s**2) ** 2
    return out


def smooth_bump(r: np.ndarray, radius: float) -> np.ndarray:
    """The compactly supported C-infinity bump exp(1 - 1/(1 - (r/R)^2))."""
    out = np.zeros_like(r)
    inside = r < radius
    s2 = (r[inside] / radius) ** 2
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2))
    return out


def _check_margin(grid: Grid2D, spec: PhantomSpec) -> None:
    x0, y0 = grid.origin
    lx, ly = grid.extent
    m = spec.support_margin
    for k, f in enumerate(spec.features):
        sup = _support_radius(f, spec.kind)
        cx, cy = f.center
        if (
            cx - sup < x0 + m
            or cx + sup > x0 + lx - m
            or cy - sup < y0 + m
            or cy + sup > y0 + ly - m
        ):
            raise PhantomSpecError(
                f"feature {k} (center {f.center}, support radius {sup:g}) "
                f"overlaps the {m:g} boundary margin"
            )


def _render(grid: Grid2D, spec: PhantomSpec) -> np.ndarray:
    values = np.zeros(grid.shape)
    for f in spec.features:
        r = _elliptic_distance(grid, f)
        if spec.kind == "gaussians":
            values += f.amplitude * _gaussian_profile(r, f.radius)
        else:
            values += f.amplitude * _disk_profile(r, f.radius)
    return values


def make_pressure_phantom(spec: PhantomSpec, grid: Grid2D) -> InitialState:
    """Initial pressure supported away from the boundary; rate is zero."""
    _check_margin(grid, spec)
    if not spec.features:
        warnings.warn("phantom has no features; the zero state is degenerate")
    values = _render(grid, spec)
    return InitialState(ScalarField2D(grid, values), ScalarField2D.zeros(grid))


def random_smooth_field(grid: Grid2D, seed: int, order: int = 3) -> np.ndarray:
    """Band-limited random combination of low cosine modes, scaled to
    max |field| = 1."""
    rng = np.random.default_rng(seed)
    lx, ly = grid.extent
    xh = (grid.xs - grid.origin[0]) / lx
    yh = (grid.ys - grid.origin[1]) / ly
    values = np.zeros(grid.shape)
    for p in range(order):
        for q in range(order):
            if p == 0 and q == 0:
                continue
            amp = rng.standard_normal()
            values += amp * np.outer(np.cos(np.pi * p * xh), np.cos(np.pi * q * yh))
    peak = np.abs(values).max()
    return values / peak if peak > 0 else values


def make_speed_phantom(
    spec: PhantomSpec,
    grid: Grid2D,
    c_base: float,
    variation: float,
    max_variation: float = 0.10,
    c_low: float | None = None,
    c_high: float | None = None,
) -> WaveSpeed:
    """Smooth speed map confined to c_base * [1 - variation, 1 + variation].

    Features render as C-infinity bumps; with no features a seeded
    band-limited random field is used. Soft-tissue practice caps the
    variation at 10 percent, overridable through ``max_variation``.
    """
    if variation < 0:
        raise PhantomSpecError(f"variation must be nonnegative, got {variation}")
    if variation > max_variation:
        raise PhantomSpecError(
            f"variation {variation:g} exceeds the cap {max_variation:g}; "
            "raise max_variation to override"
        )
    if c_base <= 0 or c_base * (1.0 - variation) <= 0:
        raise PhantomSpecError("speed phantom would not be positive")
    if variation == 0.0:
        shape = np.zeros(grid.shape)
    elif spec.features:
        shape = np.zeros(grid.shape)
        for f in spec.features:
            r = _elliptic_distance(grid, f)
            shape += f.amplitude * smooth_bump(r, f.radius)
        peak = np.abs(shape).max()
        if peak > 0:
            shape = shape / peak
    else:
        shape = random_smooth_field(grid, spec.seed)
    values = c_base * (1.0 + variation * shape)
    if c_low is None:
        c_low = 0.9 * c_base * (1.0 - variation)
    if c_high is None:
        c_high = 1.1 * c_base * (1.0 + variation)
    return WaveSpeed(ScalarField2D(grid, values), c_low, c_high)


# ---------------------------------------------------------------------------
# Perturbation pairs at prescribed discrepancy ratios
# ---------------------------------------------------------------------------


def _state_perturbation_shape(grid: Grid2D, rng: np.random.Generator, order: int = 3):
    """Random low-order sine combination; vanishes identically on the
    boundary and has unit H0 norm."""
    lx, ly = grid.extent
    xh = (grid.xs - grid.origin[0]) / lx
    yh = (grid.ys - grid.origin[1]) / ly
    values = np.zeros(grid.shape)
    for p in range(1, order + 1):
        for q in range(1, order + 1):
            amp = rng.standard_normal()
            values += amp * np.outer(np.sin(np.pi * p * xh), np.sin(np.pi * q * yh))
    f = ScalarField2D(grid, values)
    return ScalarField2D(grid, values / norm_h0(f))


def _speed_perturbation_shape(grid: Grid2D, rng: np.random.Generator) -> np.ndarray:
    values = np.zeros(grid.shape)
    lx, ly = grid.extent
    xh = (grid.xs - grid.origin[0]) / lx
    yh = (grid.ys - grid.origin[1]) / ly
    for p in range(3):
        for q in range(3):
            if p == 0 and q == 0:
                continue
            amp = rng.standard_normal()
            values += amp * np.outer(np.cos(np.pi * p * xh), np.cos(np.pi * q * yh))
    return values / np.abs(values).max()


def _bisect_amplitude(ratio_of, target: float, amp_max: float, tol: float) -> float:
    """Find amp with ratio_of(amp) = target (ratio monotone in amp) to
    relative tolerance tol; raises SaturationError when out of reach."""
    top = ratio_of(amp_max)
    if top < target:
        raise SaturationError(
            f"target ratio {target:g} unreachable; maximum achievable is {top:g}",
            achievable=top,
        )
    lo, hi = 0.0, amp_max
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = ratio_of(mid)
        if abs(val - target) <= tol * target:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def perturb_pair(
    c: WaveSpeed,
    s: InitialState,
    target_speed_ratio: float,
    target_state_ratio: float,
    seed: int,
    tol: float = 0.01,
) -> tuple[WaveSpeed, InitialState]:
    """Produce (c_tilde, s_tilde) whose squared discrepancy ratios against
    (c, s) match the targets within ``tol`` relative.

    The perturbation directions are fixed band-limited random shapes drawn
    from ``seed``; only their amplitudes are adjusted (by bisection). The
    state perturbation acts on u0 alone and vanishes on the boundary; the
    speed perturbation respects the admissible bounds of ``c`` and raises
    SaturationError (reporting the achievable maximum) when the target
    cannot be met inside them.
    """
    if target_speed_ratio < 0 or target_state_ratio < 0:
        raise ValueError("target ratios must be nonnegative")
    rng = np.random.default_rng(seed)
    state_shape = _state_perturbation_shape(c.grid, rng)
    speed_shape = _speed_perturbation_shape(c.grid, rng)

    if target_state_ratio == 0.0:
        s_tilde = s
    else:

        def state_ratio(amp: float) -> float:
            cand = InitialState(
                ScalarField2D(c.grid, s.u0.values + amp * state_shape.values), s.u1
            )
            return state_discrepancy_ratio(s, cand)

        # the ratio is exactly quadratic in the amplitude, so bracket tightly
        probe = state_ratio(1.0)
        amp_guess = np.sqrt(target_state_ratio / probe)
        amp = _bisect_amplitude(state_ratio, target_state_ratio, 2.0 * amp_guess, tol)
        s_tilde = InitialState(
            ScalarField2D(c.grid, s.u0.values + amp * state_shape.values), s.u1
        )

    if target_speed_ratio == 0.0:
        c_tilde = c
    else:
        cvals = c.field.values
        up = speed_shape > 0
        down = speed_shape < 0
        amp_max = np.inf
        if np.any(up):
            amp_max = min(amp_max, np.min((c.c_high - cvals[up]) / speed_shape[up]))
        if np.any(down):
            amp_max = min(amp_max, np.min((cvals[down] - c.c_low) / -speed_shape[down]))

        def speed_ratio(amp: float) -> float:
            cand = WaveSpeed(
                ScalarField2D(c.grid, cvals + amp * speed_shape), c.c_low, c.c_high
            )
            return speed_discrepancy_ratio(c, cand)

        amp = _bisect_amplitude(speed_ratio, target_speed_ratio, amp_max, tol)
        c_tilde = WaveSpeed(ScalarField2D(c.grid, cvals + amp * speed_shape), c.c_low, c.c_high)

    return c_tilde, s_tilde
