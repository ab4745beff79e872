"""Dense complex linear algebra with multipartite index arithmetic.

Index convention
----------------
Parties are labelled ``1..n``.  Party 1 is the most significant tensor
factor, so the basis state ``|i_1 ... i_n>`` has flat index
``sum_k i_k * prod_{l>k} d_l`` (the ordering produced by ``np.kron``).
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from string import ascii_letters

import numpy as np

from . import _kernels

HERMITIAN_RTOL = 1e-12


class ShapeError(ValueError):
    """A matrix does not match the declared party dimensions."""


class NotHermitianError(ValueError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


def total_dim(dims: Sequence[int]) -> int:
    return int(np.prod(dims, dtype=np.int64))


def _check_square(m: np.ndarray, dims: Sequence[int]) -> None:
    d = total_dim(dims)
    if m.ndim != 2 or m.shape != (d, d):
        raise ShapeError(f"matrix of shape {m.shape} does not match dims {tuple(dims)} (D={d})")


def _check_party(party: int, n: int) -> None:
    if not 1 <= party <= n:
        raise ValueError(f"party {party} outside 1..{n}")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, ``out[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def partial_transpose(m: np.ndarray, dims: Sequence[int], party: int) -> np.ndarray:
    """Transpose the indices of one party (1-based)."""
    m = np.asarray(m)
    _check_square(m, dims)
    n = len(dims)
    _check_party(party, n)
    t = m.reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    k = party - 1
    axes[k], axes[n + k] = axes[n + k], axes[k]
    d = total_dim(dims)
    return t.transpose(axes).reshape(d, d)


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every party not listed in ``keep`` (1-based labels)."""
    m = np.asarray(m)
    _check_square(m, dims)
    n = len(dims)
    keep = sorted(set(keep))
    for p in keep:
        _check_party(p, n)
    row = list(ascii_letters[:n])
    col = list(ascii_letters[n : 2 * n])
    for p in range(1, n + 1):
        if p not in keep:
            col[p - 1] = row[p - 1]
    out = "".join(row[p - 1] for p in keep) + "".join(col[p - 1] for p in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, m.reshape(tuple(dims) * 2))
    dk = total_dim([dims[p - 1] for p in keep])
    return res.reshape(dk, dk)


# --------------------------------------------------------------------------
# contraction with product vectors
# --------------------------------------------------------------------------

def _validate_blocks(n: int, blocks: Sequence[Sequence[int]]) -> None:
    seen = sorted(p for blk in blocks for p in blk)
    if seen != list(range(1, n + 1)):
        raise ValueError(f"blocks {list(map(tuple, blocks))} do not partition parties 1..{n}")


def product_embedding(
    dims: Sequence[int],
    blocks: Sequence[Sequence[int]],
    vectors: Sequence[np.ndarray],
    free: int,
) -> np.ndarray:
    """Embedding matrices ``E`` with columns ``v (x) e_i`` in party order.

    Parameters
    ----------
    dims : sequence of int
        Party dimensions.
    blocks : sequence of sequences of int
        Partition of the parties ``1..n`` (each block sorted ascending).
    vectors : sequence of ndarray
        One entry per block; arrays of shape ``(N, d_block)``.  The entry at
        position ``free`` is ignored.
    free : int
        Position of the un-contracted block in ``blocks``.

    Returns
    -------
    ndarray, shape (N, D, d_free)
        ``E[k] @ e_i`` is the product vector whose contracted blocks hold
        ``vectors[.][k]`` and whose free block holds basis state ``i``.
        Non-contiguous blocks are interleaved by index arithmetic; no
        permutation matrix is formed.
    """
    n = len(dims)
    _validate_blocks(n, blocks)
    letters = ascii_letters[:n]
    operands, subs = [], []
    nsamp = None
    for pos, blk in enumerate(blocks):
        bdims = tuple(dims[p - 1] for p in blk)
        s = "".join(letters[p - 1] for p in blk)
        if pos == free:
            db = total_dim(bdims)
            operands.append(np.eye(db).reshape(bdims + (db,)))
            subs.append(s + "Z")
        else:
            v = np.asarray(vectors[pos], dtype=np.complex128)
            if v.ndim == 1:
                v = v[None, :]
            if v.shape[1] != total_dim(bdims):
                raise ShapeError(f"vector for block {tuple(blk)} has length {v.shape[1]}")
            if nsamp is None:
                nsamp = v.shape[0]
            elif v.shape[0] != nsamp:
                raise ShapeError("vector stacks have different lengths")
            operands.append(v.reshape((v.shape[0],) + bdims))
            subs.append("Y" + s)
    dfree = total_dim([dims[p - 1] for p in blocks[free]])
    if nsamp is None:
        # everything is free
        return np.eye(total_dim(dims), dtype=np.complex128)[None]
    expr = ",".join(subs) + "->Y" + letters + "Z"
    e = np.einsum(expr, *operands, optimize=True)
    return e.reshape(nsamp, total_dim(dims), dfree)


def contract_product(
    w: np.ndarray,
    dims: Sequence[int],
    assignments: Mapping[tuple[int, ...], np.ndarray],
    free_block: Sequence[int],
) -> np.ndarray:
    """Contract ``w`` with unit vectors on every block except ``free_block``.

    ``assignments`` maps each contracted block (tuple of 1-based parties) to
    a vector of the block's product dimension.  Returns the matrix
    ``M[i, j] = <v (x) e_i| w |v (x) e_j>`` on the free block.
    """
    w = np.asarray(w, dtype=np.complex128)
    _check_square(w, dims)
    free_block = tuple(sorted(free_block))
    blocks = [tuple(sorted(b)) for b in assignments] + [free_block]
    if free_block in [tuple(sorted(b)) for b in assignments]:
        raise ValueError("free block also has an assignment")
    try:
        _validate_blocks(len(dims), blocks)
    except ValueError as exc:
        raise ValueError(f"assignments plus free block are not a partition: {exc}") from None
    vecs = [np.asarray(v, dtype=np.complex128)[None, :] for v in assignments.values()] + [None]
    emb = product_embedding(dims, blocks, vecs, free=len(blocks) - 1)
    return _kernels.sandwich(emb, w)[0]


def contract_batch(w: np.ndarray, emb: np.ndarray) -> np.ndarray:
    """``E_k^H w E_k`` for a stack of embeddings from :func:`product_embedding`."""
    return _kernels.sandwich(emb, w)


# --------------------------------------------------------------------------
# Hermitian eigenproblems
# --------------------------------------------------------------------------

def check_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> None:
    m = np.asarray(m)
    if m.shape[-1] != m.shape[-2]:
        raise ShapeError(f"matrix of shape {m.shape} is not square")
    scale = np.abs(m).max() if m.size else 0.0
    dev = np.abs(m - np.conj(np.swapaxes(m, -1, -2))).max() if m.size else 0.0
    if dev > rtol * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(f"Hermiticity violated by {dev:.3e} (scale {scale:.3e})")


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def eigh_batch(a: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a stack of Hermitian matrices by cyclic Jacobi.

    Returns ascending eigenvalues ``(B, n)`` and matching eigenvector
    columns ``(B, n, n)``.
    """
    a = np.asarray(a, dtype=np.complex128)
    if check:
        check_hermitian(a)
    w, v = _kernels.jacobi_eigh(_symmetrize(a))
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def eigvals_batch(a: np.ndarray, check: bool = True) -> np.ndarray:
    return eigh_batch(a, check=check)[0]


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvector matrix of a Hermitian matrix."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {m.shape}")
    w, v = eigh_batch(m[None])
    return w[0], v[0]


def min_eig(m: np.ndarray) -> float:
    return float(eig_hermitian(m)[0][0])


def hermitian_basis(d: int) -> np.ndarray:
    """Hilbert-Schmidt orthonormal basis of the ``d x d`` Hermitian matrices.

    Ordering: ``I/sqrt(d)``, then the ``d-1`` traceless diagonal elements,
    then for each ``j < k`` the symmetric and antisymmetric off-diagonal
    pair.  Returns an array of shape ``(d*d, d, d)``.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    out = np.zeros((d * d, d, d), dtype=np.complex128)
    out[0] = np.eye(d) / np.sqrt(d)
    idx = 1
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        out[idx] = np.diag(diag) / np.sqrt(l * (l + 1))
        idx += 1
    s = 1.0 / np.sqrt(2.0)
    for j in range(d):
        for k in range(j + 1, d):
            out[idx, j, k] = out[idx, k, j] = s
            out[idx + 1, j, k] = -1j * s
            out[idx + 1, k, j] = 1j * s
            idx += 2
    return out


def basis_coefficients(m: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coefficients ``Tr(B_i m)`` of a Hermitian matrix in an orthonormal basis."""
    return np.einsum("iab,ba->i", basis, np.asarray(m)).real


def from_coefficients(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.tensordot(np.asarray(x, dtype=float), basis, axes=1)
