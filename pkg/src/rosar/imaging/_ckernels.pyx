# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Pixel-parallel imaging kernels.

Each pixel is computed by one thread from read-only inputs, so results do
not depend on the thread count.  See ``_kernels_py`` for the reference
implementation and the meaning of the arguments.
"""

from cython.parallel cimport prange
from libc.math cimport acos, ceil, cos, floor, sin, sqrt

cdef double TWO_PI = 6.283185307179586


cdef inline int _column(long n, long N, long P, long *col) noexcept nogil:
    if P == N:
        n = n % N
        if n < 0:
            n += N
        col[0] = n
        return 0
    if n < 0 or n >= P:
        return 3
    col[0] = n
    return 0


cdef int _pixel(const double[:, ::1] y, long S, long P, double phi, double R,
                int mode, int domain,
                const long[::1] bin_ptr, const int[::1] offs,
                const double[::1] wre, const double[::1] wim,
                const signed char[::1] bin_ok,
                double r, long N, double K, double t_s, double c, double k,
                long L, double r_max, double *ore, double *oim) noexcept nogil:
    cdef double dphi = TWO_PI / N
    cdef double acc_re = 0.0, acc_im = 0.0
    cdef double phi_v, delta, cd, Rn, cos_look, alpha, ang, zr, zi
    cdef double hr, hi, tr, wr, wi, vr, vi
    cdef long n0, n1, n, col, q, q0, q1, b, centre, l, m
    cdef int st
    ore[0] = 0.0
    oim[0] = 0.0
    if R <= r or R >= r_max:
        return 1
    if mode == 0:
        phi_v = acos(r / R)
        n0 = <long>ceil((phi - phi_v) / dphi)
        n1 = <long>floor((phi + phi_v) / dphi)
        q0 = n0
        q1 = n1 + 1
        centre = 0
    else:
        b = <long>floor(2.0 * R * K * t_s * L / c + 0.5)
        if b < 0 or b >= bin_ok.shape[0] or bin_ok[b] == 0:
            return 2
        q0 = bin_ptr[b]
        q1 = bin_ptr[b + 1]
        centre = <long>floor(phi / dphi + 0.5)
    for q in range(q0, q1):
        n = q if mode == 0 else centre + offs[q]
        st = _column(n, N, P, &col)
        if st != 0:
            return st
    for q in range(q0, q1):
        n = q if mode == 0 else centre + offs[q]
        _column(n, N, P, &col)
        delta = phi - n * dphi
        cd = cos(delta)
        Rn = sqrt(R * R + r * r - 2.0 * R * r * cd)
        if mode == 1:
            wr = wre[q]
            wi = -wim[q]
        else:
            cos_look = (R * cd - r) / Rn
            alpha = cos_look if cos_look > 0.0 else 0.0
            if alpha == 0.0:
                continue
            wr = alpha * cos(2.0 * k * Rn)
            wi = -alpha * sin(2.0 * k * Rn)
        if domain == 0:
            # sum_m y[m] z^m with z = exp(-j 2 pi tau K t_s m), Horner form
            ang = -TWO_PI * (2.0 * Rn / c) * K * t_s
            zr = cos(ang)
            zi = sin(ang)
            hr = y[col, 2 * (S - 1)]
            hi = y[col, 2 * (S - 1) + 1]
            for m in range(S - 2, -1, -1):
                tr = hr * zr - hi * zi + y[col, 2 * m]
                hi = hr * zi + hi * zr + y[col, 2 * m + 1]
                hr = tr
            vr = hr
            vi = hi
        else:
            l = <long>floor(2.0 * Rn * K * t_s * L / c + 0.5)
            if l < 0 or l >= S:
                return 4
            vr = y[col, 2 * l]
            vi = y[col, 2 * l + 1]
        acc_re += wr * vr - wi * vi
        acc_im += wr * vi + wi * vr
    ore[0] = acc_re
    oim[0] = acc_im
    return 0


def render(const double[:, ::1] y, const double[::1] px_phi, const double[::1] px_R,
           int mode, int domain,
           const long[::1] bin_ptr, const int[::1] offs,
           const double[::1] wre, const double[::1] wim, const signed char[::1] bin_ok,
           double r, long N, double K, double t_s, double c, double k, long L, double r_max,
           double[::1] out_re, double[::1] out_im, signed char[::1] status, int threads):
    """Evaluate every pixel; fills ``out_re``, ``out_im`` and ``status``."""
    cdef long npx = px_phi.shape[0]
    cdef long P = y.shape[0]
    cdef long S = y.shape[1] // 2
    cdef long i
    for i in prange(npx, nogil=True, schedule="static", num_threads=threads):
        status[i] = _pixel(y, S, P, px_phi[i], px_R[i], mode, domain, bin_ptr, offs, wre, wim,
                           bin_ok, r, N, K, t_s, c, k, L, r_max, &out_re[i], &out_im[i])
