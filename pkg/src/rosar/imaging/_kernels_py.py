"""Reference imaging kernels in numpy.

Semantics match the compiled ``render``: for every pixel ``(phi, R)``

* ``mode 0`` (BPA): columns ``ceil((phi-phi_v)/dphi) .. floor((phi+phi_v)/dphi)``
  with weights ``alpha_n * exp(-j*2*k*R_n)``;
* ``mode 1`` (table): columns ``round(phi/dphi) + offs`` of the pixel's
  range bin with weights ``conj(w)``;
* ``mode 2`` (table support, BPA weights).

``domain 0`` compensates the fast-time phase of every column and sums all
samples; ``domain 1`` picks the single range bin holding ``R_n``.  ``y`` is
the data transposed to ``(pulses, samples)`` and viewed as float64 pairs.

Status codes: 0 ok, 1 pixel outside ``(r, r_max)``, 2 no weights for the
range bin, 3 column outside a partial dataset, 4 range bin outside the
profile.
"""

from __future__ import annotations

import math

import numpy as np

OK, MASKED, NO_BIN, BAD_COLUMN, BAD_RANGE_BIN = 0, 1, 2, 3, 4


def _columns(mode, phi, R, r, N, K, t_s, c, L, bin_ptr, offs, bin_ok):
    dphi = 2.0 * math.pi / N
    if mode == 0:
        phi_v = math.acos(r / R)
        n = np.arange(math.ceil((phi - phi_v) / dphi), math.floor((phi + phi_v) / dphi) + 1)
        return OK, n, None
    b = math.floor(2.0 * R * K * t_s * L / c + 0.5)
    if b < 0 or b >= bin_ok.size or not bin_ok[b]:
        return NO_BIN, None, None
    sl = slice(bin_ptr[b], bin_ptr[b + 1])
    return OK, math.floor(phi / dphi + 0.5) + offs[sl].astype(np.int64), sl


def render(y, px_phi, px_R, mode, domain, bin_ptr, offs, wre, wim, bin_ok,
           r, N, K, t_s, c, k, L, r_max, out_re, out_im, status, threads=1):
    data = np.asarray(y).view(np.complex128)
    P, S = data.shape
    dphi = 2.0 * math.pi / N
    m = np.arange(S)
    for i, (phi, R) in enumerate(zip(px_phi, px_R)):
        out_re[i] = out_im[i] = 0.0
        if R <= r or R >= r_max:
            status[i] = MASKED
            continue
        st, n, sl = _columns(mode, phi, R, r, N, K, t_s, c, L, bin_ptr, offs, bin_ok)
        if st:
            status[i] = st
            continue
        if P == N:
            col = np.mod(n, N)
        else:
            if n.size and (n.min() < 0 or n.max() >= P):
                status[i] = BAD_COLUMN
                continue
            col = n
        cd = np.cos(phi - n * dphi)
        Rn = np.sqrt(R * R + r * r - 2.0 * R * r * cd)
        if mode == 1:
            weight = wre[sl] - 1j * wim[sl]
        else:
            alpha = (R * cd - r) / Rn
            keep = alpha > 0
            col, Rn = col[keep], Rn[keep]
            weight = alpha[keep] * np.exp(-2j * k * Rn)
        if domain == 0:
            tau = 2.0 * Rn / c
            comp = np.exp(-2j * math.pi * K * t_s * np.outer(tau, m))
            vals = np.einsum("ij,ij->i", comp, data[col])
        else:
            l = np.floor(2.0 * Rn * K * t_s * L / c + 0.5).astype(np.int64)
            if l.size and (l.min() < 0 or l.max() >= S):
                status[i] = BAD_RANGE_BIN
                continue
            vals = data[col, l]
        acc = np.sum(weight * vals)
        out_re[i], out_im[i] = acc.real, acc.imag
        status[i] = OK
