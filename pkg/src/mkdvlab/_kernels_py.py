"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` exactly and are used when the compiled
extension is unavailable (or when ``MKDVLAB_PURE_PYTHON=1``).
"""

import numpy as np

SERIES_CUTOFF = 1e-4


def phase_kernel(phi, t):
    """(exp(i t phi) - 1) / (i phi), with the removable singularity handled."""
    phi = np.asarray(phi, dtype=float)
    z = t * phi
    out = np.empty(phi.shape, dtype=complex)
    small = np.abs(z) < SERIES_CUTOFF
    zs = z[small]
    out[small] = t * (1.0 + 0.5j * zs - zs * zs / 6.0 - 1j * zs ** 3 / 24.0)
    big = ~small
    pb = phi[big]
    out[big] = np.expm1(1j * t * pb) / (1j * pb)
    return out


def triple_interaction(j, a, dxi, t, n, skip_same_sign=False):
    j = np.asarray(j, dtype=np.int64)
    a = np.asarray(a, dtype=complex)
    out = np.zeros(n, dtype=complex)
    half = n // 2
    xi = j * dxi
    sgn = np.sign(j)
    J1, J2 = np.meshgrid(j, j, indexing="ij")
    X1, X2 = J1 * dxi, J2 * dxi
    A12 = a[:, None] * a[None, :]
    S12 = sgn[:, None] + sgn[None, :]
    for p in range(j.size):
        jo = j[p] + J1 + J2
        keep = np.abs(jo) < half
        if skip_same_sign:
            keep &= np.abs(S12 + sgn[p]) != 3
        if not keep.any():
            continue
        x = xi[p] + X1[keep] + X2[keep]
        x1 = X1[keep]
        x2 = X2[keep]
        phi = -3.0 * (x - x1) * (x - x2) * (x1 + x2)
        vals = phase_kernel(phi, t) * (a[p] * A12[keep])
        np.add.at(out, jo[keep] % n, vals)
    return out


def box_energies(c, box, nbox):
    c = np.asarray(c)
    box = np.asarray(box, dtype=np.int64)
    ok = (box >= 0) & (box < nbox)
    c = c[ok]
    return np.bincount(box[ok], weights=c.real ** 2 + c.imag ** 2,
                       minlength=nbox)[:nbox]


def bilinear_weighted_sum(x1, w1, x2, w2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    total = 0.0
    chunk = max(1, 2_000_000 // max(1, x2.size))
    for lo in range(0, x1.size, chunk):
        d = np.abs(x1[lo:lo + chunk, None] ** 2 - x2[None, :] ** 2)
        total += float(np.sum(w1[lo:lo + chunk, None] * w2[None, :] / d))
    return total
