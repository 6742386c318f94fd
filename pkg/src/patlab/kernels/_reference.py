"""NumPy reference implementation of the time-stepping kernels.

These are the fallback used when the compiled extension is unavailable.
Expression trees are kept identical to the Cython versions (same
parenthesization, no fused multiply-add) so both backends produce
bit-identical states.
"""

from __future__ import annotations

import numpy as np

__all__ = ["lap_reflect", "leapfrog_step", "adjoint_step", "gradient_accumulate"]


def lap_reflect(f: np.ndarray, ihx2: float, ihy2: float, out: np.ndarray | None = None):
    """5-point Laplacian with ghost nodes reflected across each edge.

    The reflection (ghost equals the first inward neighbor) is the zero-flux
    part of the impedance closure; the velocity part is applied separately
    through the diagonal update factors.
    """
    fp = np.pad(f, 1, mode="reflect")
    if out is None:
        out = np.empty_like(f)
    out[:] = (fp[:-2, 1:-1] + fp[2:, 1:-1] - 2.0 * f) * ihx2 + (
        fp[1:-1, :-2] + fp[1:-1, 2:] - 2.0 * f
    ) * ihy2
    return out


def leapfrog_step(
    u_next: np.ndarray,
    u_cur: np.ndarray,
    u_prev: np.ndarray,
    dt2csq: np.ndarray,
    pinv: np.ndarray,
    qfac: np.ndarray,
    ihx2: float,
    ihy2: float,
) -> float:
    """One explicit step; returns max |u_next| for blow-up detection."""
    lap = lap_reflect(u_cur, ihx2, ihy2)
    u_next[:] = pinv * ((2.0 * u_cur + dt2csq * lap) - qfac * u_prev)
    return float(np.abs(u_next).max())


def adjoint_step(
    v_n: np.ndarray,
    v_nm1: np.ndarray,
    v_np1: np.ndarray,
    csq: np.ndarray,
    pinv: np.ndarray,
    qfac: np.ndarray,
    dt2: float,
    ihx2: float,
    ihy2: float,
    scratch: np.ndarray,
) -> None:
    """One step of the transposed recursion (runs backward in time).

    The speed-squared factor moves inside the Laplacian, which is the
    discrete counterpart of the adjoint wave operator.
    """
    a = pinv * v_np1
    np.multiply(csq, a, out=scratch)
    lap = lap_reflect(scratch, ihx2, ihy2)
    v_n += 2.0 * a + dt2 * lap
    v_nm1 -= qfac * a


def gradient_accumulate(
    gq: np.ndarray,
    v_np1: np.ndarray,
    pinv: np.ndarray,
    quad: np.ndarray,
    u_nm1: np.ndarray,
    u_n: np.ndarray,
    u_np1: np.ndarray,
    bhalf_dt: np.ndarray,
    dt2: float,
    ihx2: float,
    ihy2: float,
) -> None:
    """Accumulate the misfit gradient with respect to the squared speed."""
    a = pinv * v_np1
    lap = lap_reflect(u_n, ihx2, ihy2)
    gq += (quad * a) * (dt2 * lap + bhalf_dt * (u_nm1 - u_np1))
