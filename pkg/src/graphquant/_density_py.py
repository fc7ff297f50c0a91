"""Pure-numpy angle-Jacobian determinant, used when the compiled kernel is absent."""
from __future__ import annotations

import numpy as np


def jacobian_det(zx, zy, t, src, tgt, colx, coly, colt):
    """det of d(edge angles)/d(free coordinates) for every sample row.

    ``tgt`` holds 1-based internal targets (>0) or boundary targets (<0);
    ``colx``/``coly``/``colt`` give the column of each coordinate or -1 when
    the gauge fixes it.
    """
    N = zx.shape[0]
    e = len(src)
    if e == 0:
        return np.ones(N)
    J = np.zeros((N, e, e))
    for k in range(e):
        s = src[k] - 1
        p = zx[:, s] + 1j * zy[:, s]
        if tgt[k] > 0:
            r = tgt[k] - 1
            q = zx[:, r] + 1j * zy[:, r]
        else:
            q = t[:, -tgt[k] - 1] + 0j
        iu = 1.0 / (q - p)
        iv = 1.0 / (q - np.conj(p))
        if colx[s] >= 0:
            J[:, k, colx[s]] += (iv - iu).imag
        if coly[s] >= 0:
            J[:, k, coly[s]] += (-1j * (iu + iv)).imag
        if tgt[k] > 0:
            if colx[r] >= 0:
                J[:, k, colx[r]] += (iu - iv).imag
            if coly[r] >= 0:
                J[:, k, coly[r]] += (1j * (iu - iv)).imag
        else:
            c = colt[-tgt[k] - 1]
            if c >= 0:
                J[:, k, c] += (iu - iv).imag
    return np.linalg.det(J)
