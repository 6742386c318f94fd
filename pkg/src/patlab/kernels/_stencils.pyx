# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled time-stepping kernels.

Expression trees mirror kernels/_reference.py exactly (and the extension is
built with -ffp-contract=off), so compiled and fallback backends produce
bit-identical states.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

__all__ = ["lap_reflect", "leapfrog_step", "adjoint_step", "gradient_accumulate"]


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) nogil:
    if i < 0:
        return 1
    if i >= n:
        return n - 2
    return i


cdef void _lap_reflect(double[:, ::1] out, const double[:, ::1] f,
                       double ihx2, double ihy2) nogil:
    cdef Py_ssize_t nx = f.shape[0]
    cdef Py_ssize_t ny = f.shape[1]
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double fc
    for i in range(nx):
        im = _reflect(i - 1, nx)
        ip = _reflect(i + 1, nx)
        for j in range(ny):
            jm = _reflect(j - 1, ny)
            jp = _reflect(j + 1, ny)
            fc = f[i, j]
            out[i, j] = (f[im, j] + f[ip, j] - 2.0 * fc) * ihx2 + \
                        (f[i, jm] + f[i, jp] - 2.0 * fc) * ihy2


def lap_reflect(f, double ihx2, double ihy2, out=None):
    if out is None:
        out = np.empty_like(f)
    _lap_reflect(out, f, ihx2, ihy2)
    return out


def leapfrog_step(double[:, ::1] u_next, const double[:, ::1] u_cur,
                  const double[:, ::1] u_prev, const double[:, ::1] dt2csq,
                  const double[:, ::1] pinv, const double[:, ::1] qfac,
                  double ihx2, double ihy2):
    cdef Py_ssize_t nx = u_cur.shape[0]
    cdef Py_ssize_t ny = u_cur.shape[1]
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double fc, lap, val, maxabs = 0.0
    with nogil:
        for i in range(nx):
            im = _reflect(i - 1, nx)
            ip = _reflect(i + 1, nx)
            for j in range(ny):
                jm = _reflect(j - 1, ny)
                jp = _reflect(j + 1, ny)
                fc = u_cur[i, j]
                lap = (u_cur[im, j] + u_cur[ip, j] - 2.0 * fc) * ihx2 + \
                      (u_cur[i, jm] + u_cur[i, jp] - 2.0 * fc) * ihy2
                val = pinv[i, j] * ((2.0 * fc + dt2csq[i, j] * lap) - qfac[i, j] * u_prev[i, j])
                u_next[i, j] = val
                if val < 0.0:
                    val = -val
                if val > maxabs:
                    maxabs = val
    return maxabs


def adjoint_step(double[:, ::1] v_n, double[:, ::1] v_nm1, const double[:, ::1] v_np1,
                 const double[:, ::1] csq, const double[:, ::1] pinv, const double[:, ::1] qfac,
                 double dt2, double ihx2, double ihy2, double[:, ::1] scratch):
    cdef Py_ssize_t nx = v_np1.shape[0]
    cdef Py_ssize_t ny = v_np1.shape[1]
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double a, fc, lap
    with nogil:
        for i in range(nx):
            for j in range(ny):
                scratch[i, j] = csq[i, j] * (pinv[i, j] * v_np1[i, j])
        for i in range(nx):
            im = _reflect(i - 1, nx)
            ip = _reflect(i + 1, nx)
            for j in range(ny):
                jm = _reflect(j - 1, ny)
                jp = _reflect(j + 1, ny)
                a = pinv[i, j] * v_np1[i, j]
                fc = scratch[i, j]
                lap = (scratch[im, j] + scratch[ip, j] - 2.0 * fc) * ihx2 + \
                      (scratch[i, jm] + scratch[i, jp] - 2.0 * fc) * ihy2
                v_n[i, j] = v_n[i, j] + (2.0 * a + dt2 * lap)
                v_nm1[i, j] = v_nm1[i, j] - qfac[i, j] * a


def gradient_accumulate(double[:, ::1] gq, const double[:, ::1] v_np1,
                        const double[:, ::1] pinv, const double[:, ::1] quad,
                        const double[:, ::1] u_nm1, const double[:, ::1] u_n,
                        const double[:, ::1] u_np1, const double[:, ::1] bhalf_dt,
                        double dt2, double ihx2, double ihy2):
    cdef Py_ssize_t nx = u_n.shape[0]
    cdef Py_ssize_t ny = u_n.shape[1]
    cdef Py_ssize_t i, j, im, ip, jm, jp
    cdef double a, fc, lap
    with nogil:
        for i in range(nx):
            im = _reflect(i - 1, nx)
            ip = _reflect(i + 1, nx)
            for j in range(ny):
                jm = _reflect(j - 1, ny)
                jp = _reflect(j + 1, ny)
                a = pinv[i, j] * v_np1[i, j]
                fc = u_n[i, j]
                lap = (u_n[im, j] + u_n[ip, j] - 2.0 * fc) * ihx2 + \
                      (u_n[i, jm] + u_n[i, jp] - 2.0 * fc) * ihy2
                gq[i, j] = gq[i, j] + (quad[i, j] * a) * (dt2 * lap + bhalf_dt[i, j] * (u_nm1[i, j] - u_np1[i, j]))
