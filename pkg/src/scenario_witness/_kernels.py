"""Hot numeric kernels with a numba path and a vectorized numpy path.

Both paths implement the same arithmetic; ``benchmarks/bench_kernels.py``
compares them.  Dispatch happens in the public wrappers at the bottom.
"""

import numpy as np

from ._accel import HAVE_NUMBA, njit

MAX_SWEEPS = 60
# relative off-diagonal Frobenius norm at which a Jacobi sweep loop stops
OFF_TOL = 1e-15


# --------------------------------------------------------------------------
# cyclic Jacobi for a stack of Hermitian matrices
# --------------------------------------------------------------------------

def _jacobi_numpy(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    nb, n, _ = a.shape
    v = np.zeros_like(a)
    idx = np.arange(n)
    v[:, idx, idx] = 1.0
    if n == 1:
        return a[:, :, 0].real.copy(), v

    frob2 = np.einsum("bij,bij->b", a.conj(), a).real
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off2 = (np.abs(a[:, offmask]) ** 2).sum(axis=1)
        todo = off2 > (OFF_TOL ** 2) * frob2
        if not todo.any():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                r = np.abs(apq)
                active = todo & (r > 0.0)
                if not active.any():
                    continue
                r_safe = np.where(active, r, 1.0)
                phase = np.where(active, apq / r_safe, 1.0)
                theta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * r_safe)
                big = np.abs(theta) > 1e150
                th = np.where(big, 0.0, theta)
                t = np.where(
                    big,
                    0.5 / np.where(big, theta, 1.0),
                    np.where(th >= 0.0, 1.0, -1.0) / (np.abs(th) + np.sqrt(th * th + 1.0)),
                )
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c = np.where(active, c, 1.0)[:, None]
                s = np.where(active, s, 0.0)[:, None]
                ph = phase[:, None]
                eph = ph.conj()

                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = c * colp - s * eph * colq
                a[:, :, q] = s * colp + c * eph * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = c * rowp - s * ph * rowq
                a[:, q, :] = s * rowp + c * ph * rowq
                a[active, p, q] = 0.0
                a[active, q, p] = 0.0

                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c * vp - s * eph * vq
                v[:, :, q] = s * vp + c * eph * vq
    w = np.einsum("bii->bi", a).real.copy()
    return w, v


@njit(cache=True)
def _jacobi_numba(a_in):
    nb, n, _ = a_in.shape
    w = np.empty((nb, n))
    vout = np.zeros((nb, n, n), dtype=np.complex128)
    a = np.empty((n, n), dtype=np.complex128)
    v = np.empty((n, n), dtype=np.complex128)
    for b in range(nb):
        for i in range(n):
            for j in range(n):
                a[i, j] = a_in[b, i, j]
                v[i, j] = 1.0 if i == j else 0.0
        frob2 = 0.0
        for i in range(n):
            for j in range(n):
                frob2 += a[i, j].real ** 2 + a[i, j].imag ** 2
        for _sweep in range(MAX_SWEEPS):
            off2 = 0.0
            for i in range(n):
                for j in range(n):
                    if i != j:
                        off2 += a[i, j].real ** 2 + a[i, j].imag ** 2
            if off2 <= OFF_TOL * OFF_TOL * frob2:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    r = abs(apq)
                    if r == 0.0:
                        continue
                    ph = apq / r
                    eph = ph.conjugate()
                    theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                    if abs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        sgn = 1.0 if theta >= 0.0 else -1.0
                        t = sgn / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        xp = a[i, p]
                        xq = a[i, q]
                        a[i, p] = c * xp - s * eph * xq
                        a[i, q] = s * xp + c * eph * xq
                    for j in range(n):
                        xp = a[p, j]
                        xq = a[q, j]
                        a[p, j] = c * xp - s * ph * xq
                        a[q, j] = s * xp + c * ph * xq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):
                        xp = v[i, p]
                        xq = v[i, q]
                        v[i, p] = c * xp - s * eph * xq
                        v[i, q] = s * xp + c * eph * xq
        for i in range(n):
            w[b, i] = a[i, i].real
            for j in range(n):
                vout[b, i, j] = v[i, j]
    return w, vout


# --------------------------------------------------------------------------
# congruence E^H W E for a stack of embeddings E (N, D, b)
# --------------------------------------------------------------------------

def _sandwich_numpy(emb, w):
    return np.conj(np.swapaxes(emb, 1, 2)) @ (w @ emb)


@njit(cache=True)
def _sandwich_numba(emb, w):
    nb, d, k = emb.shape
    out = np.empty((nb, k, k), dtype=np.complex128)
    tmp = np.empty((d, k), dtype=np.complex128)
    for b in range(nb):
        for i in range(d):
            for j in range(k):
                acc = 0.0j
                for l in range(d):
                    acc += w[i, l] * emb[b, l, j]
                tmp[i, j] = acc
        for i in range(k):
            for j in range(k):
                acc = 0.0j
                for l in range(d):
                    acc += emb[b, l, i].conjugate() * tmp[l, j]
                out[b, i, j] = acc
    return out


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def jacobi_eigh(a, use_numba=None):
    """Eigen-decompose a stack ``(B, n, n)`` of Hermitian matrices.

    Returns unsorted eigenvalues ``(B, n)`` and eigenvector columns
    ``(B, n, n)``.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba:
        return _jacobi_numba(a)
    return _jacobi_numpy(a)


def sandwich(emb, w, use_numba=None):
    """Return ``E_k^H W E_k`` for every embedding in the stack."""
    emb = np.ascontiguousarray(emb, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.complex128)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba:
        return _sandwich_numba(emb, w)
    return _sandwich_numpy(emb, w)
