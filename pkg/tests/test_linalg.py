import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_psd
from scenario_witness.linalg import (
    NotHermitianError,
    ShapeError,
    basis_coefficients,
    contract_product,
    eig_hermitian,
    eigh_batch,
    from_coefficients,
    hermitian_basis,
    kron,
    min_eig,
    partial_trace,
    partial_transpose,
    product_embedding,
)
from scenario_witness.states import bell_state, horodecki_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


# --- kron ------------------------------------------------------------------

def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_diagonal():
    assert np.array_equal(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_entrywise_against_index_formula():
    out = kron(SX, SZ)
    for i, j, k, l in itertools.product(range(2), repeat=4):
        assert out[2 * i + k, 2 * j + l] == SX[i, j] * SZ[k, l]


def test_kron_associative(rng):
    a, b, c = (random_hermitian(d, rng) for d in (2, 3, 2))
    assert np.abs(kron(kron(a, b), c) - kron(a, kron(b, c))).max() <= 1e-14


def test_party_one_is_most_significant():
    # |i1 i2 i3> sits at row i1*d2*d3 + i2*d3 + i3
    dims = (2, 3, 2)
    for idx in itertools.product(*(range(d) for d in dims)):
        vecs = [np.eye(d)[i] for d, i in zip(dims, idx)]
        psi = kron(kron(vecs[0], vecs[1]), vecs[2])
        assert np.argmax(psi) == idx[0] * 6 + idx[1] * 2 + idx[2]


# --- partial transpose / trace --------------------------------------------

def test_partial_transpose_bell_min_eig():
    pt = partial_transpose(bell_state().matrix, (2, 2), 2)
    assert np.isclose(np.linalg.eigvalsh(pt).min(), -0.5, atol=1e-14)
    assert np.isclose(min_eig(pt), -0.5, atol=1e-12)


def test_partial_transpose_brute_force(rng):
    dims = (2, 3)
    m = random_hermitian(6, rng)
    pt = partial_transpose(m, dims, 2)
    for i1, i2, j1, j2 in itertools.product(range(2), range(3), range(2), range(3)):
        assert pt[i1 * 3 + i2, j1 * 3 + j2] == m[i1 * 3 + j2, j1 * 3 + i2]


@pytest.mark.parametrize("party", [1, 2, 3])
def test_partial_transpose_involution_and_trace(rng, party):
    dims = (2, 3, 2)
    m = random_hermitian(12, rng)
    pt = partial_transpose(m, dims, party)
    assert np.array_equal(partial_transpose(pt, dims, party), m)
    assert abs(np.trace(pt) - np.trace(m)) <= 1e-14


def test_partial_transpose_horodecki_is_psd():
    rho = horodecki_state(0.5)
    assert min_eig(partial_transpose(rho.matrix, (3, 3), 2)) >= -1e-12


def test_partial_transpose_bad_party():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4), (2, 2), 3)


def test_partial_trace_of_product(rng):
    a, b = random_psd(2, rng), random_psd(3, rng)
    a, b = a / np.trace(a), b / np.trace(b)
    m = kron(a, b)
    assert np.allclose(partial_trace(m, (2, 3), [1]), a, atol=1e-14)
    assert np.allclose(partial_trace(m, (2, 3), [2]), b, atol=1e-14)


# --- contraction -----------------------------------------------------------

def test_contract_selects_basis_vector():
    w = np.zeros((4, 4))
    w[0, 0] = 1.0
    out = contract_product(w, (2, 2), {(1,): np.array([1.0, 0.0])}, (2,))
    assert np.allclose(out, [[1, 0], [0, 0]])


def test_contract_orthogonal_gives_zero():
    w = np.zeros((4, 4))
    w[0, 0] = 1.0
    out = contract_product(w, (2, 2), {(1,): np.array([0.0, 1.0])}, (2,))
    assert np.allclose(out, 0.0)


def test_contract_identity(rng):
    dims = (2, 3, 2)
    v1 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v3 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    out = contract_product(np.eye(12), dims, {(1,): v1 / np.linalg.norm(v1), (3,): v3 / np.linalg.norm(v3)}, (2,))
    assert np.allclose(out, np.eye(3), atol=1e-14)


def _brute_contract(w, dims, vecs, free):
    """Sum over all index tuples; vecs[p] is None for free parties."""
    free_dims = [dims[p] for p in free]
    df = int(np.prod(free_dims))
    out = np.zeros((df, df), dtype=complex)
    n = len(dims)
    strides = [int(np.prod(dims[k + 1:])) for k in range(n)]
    for row in itertools.product(*(range(d) for d in dims)):
        for col in itertools.product(*(range(d) for d in dims)):
            coef = 1.0 + 0j
            for p in range(n):
                if vecs[p] is not None:
                    coef *= np.conj(vecs[p][row[p]]) * vecs[p][col[p]]
            fr = sum(row[p] * int(np.prod(free_dims[k + 1:])) for k, p in enumerate(free))
            fc = sum(col[p] * int(np.prod(free_dims[k + 1:])) for k, p in enumerate(free))
            r = sum(row[k] * strides[k] for k in range(n))
            c = sum(col[k] * strides[k] for k in range(n))
            out[fr, fc] += coef * w[r, c]
    return out


@pytest.mark.parametrize("free", [(0,), (1,), (2,), (0, 2), (1, 2)])
def test_contract_matches_brute_force(rng, free):
    dims = (2, 3, 2)
    w = random_hermitian(12, rng)
    vecs = [None if p in free else rng.standard_normal(dims[p]) + 1j * rng.standard_normal(dims[p])
            for p in range(3)]
    vecs = [v if v is None else v / np.linalg.norm(v) for v in vecs]
    assignments = {(p + 1,): vecs[p] for p in range(3) if p not in free}
    out = contract_product(w, dims, assignments, tuple(p + 1 for p in free))
    assert np.allclose(out, _brute_contract(w, dims, vecs, free), atol=1e-12)


def test_contract_joint_block_vector(rng):
    # one entangled vector on the non-contiguous block {1, 3}
    dims = (2, 2, 2)
    w = random_hermitian(8, rng)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v /= np.linalg.norm(v)
    out = contract_product(w, dims, {(1, 3): v}, (2,))
    t = w.reshape((2,) * 6)
    vv = v.reshape(2, 2)
    ref = np.einsum("ac,abcdef,df->be", vv.conj(), t, vv)
    assert np.allclose(out, ref, atol=1e-12)


def test_contract_rejects_overlap():
    with pytest.raises(ValueError):
        contract_product(np.eye(4), (2, 2), {(1,): np.array([1.0, 0.0])}, (1,))


def test_embedding_shape(rng):
    v = rng.standard_normal((5, 2)) + 0j
    emb = product_embedding((2, 3), [[1], [2]], [v, None], free=1)
    assert emb.shape == (5, 6, 3)
    with pytest.raises(ShapeError):
        product_embedding((2, 3), [[1], [2]], [np.ones((5, 3)), None], free=1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_contract_linear_in_w(seed, alpha, beta):
    r = np.random.default_rng(seed)
    dims = (2, 2, 2)
    w1, w2 = random_hermitian(8, r), random_hermitian(8, r)
    vs = {(p,): (lambda z: z / np.linalg.norm(z))(r.standard_normal(2) + 1j * r.standard_normal(2)) for p in (1, 2)}
    lhs = contract_product(alpha * w1 + beta * w2, dims, vs, (3,))
    rhs = alpha * contract_product(w1, dims, vs, (3,)) + beta * contract_product(w2, dims, vs, (3,))
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, abs(alpha) + abs(beta)) * 10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contract_preserves_psd(seed):
    r = np.random.default_rng(seed)
    dims = (3, 3)
    w = random_psd(9, r, rank=r.integers(1, 10))
    v = r.standard_normal(3) + 1j * r.standard_normal(3)
    out = contract_product(w, dims, {(1,): v / np.linalg.norm(v)}, (2,))
    assert min_eig(out) >= -1e-10 * max(1.0, np.abs(w).max())


# --- eigensolver -----------------------------------------------------------

def test_eig_diagonal():
    lam, _ = eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(lam, [1, 2, 3], atol=1e-15)


def test_eig_pauli_x():
    lam, _ = eig_hermitian(SX)
    assert np.allclose(lam, [-1, 1], atol=1e-15)


def test_min_eig_identity():
    assert min_eig(np.eye(3)) == pytest.approx(1.0, abs=1e-15)


def test_min_eig_horodecki_psd():
    assert min_eig(horodecki_state(0.3).matrix) >= -1e-12


@pytest.mark.parametrize("d", [1, 2, 5, 9, 27])
def test_eig_reconstruction(rng, d):
    m = random_hermitian(d, rng)
    lam, v = eig_hermitian(m)
    assert np.abs(v @ np.diag(lam) @ v.conj().T - m).max() <= 1e-10
    assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-10
    assert np.all(np.diff(lam) >= 0)
    assert np.allclose(lam, np.linalg.eigvalsh(m), atol=1e-10)


def test_eig_degenerate_spectrum(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    m = q @ np.diag([1, 1, 1, 2, 2, -3.0]) @ q.conj().T
    lam, v = eig_hermitian(m)
    assert np.allclose(lam, [-3, 1, 1, 1, 2, 2], atol=1e-12)
    assert np.abs(v @ np.diag(lam) @ v.conj().T - m).max() <= 1e-10


def test_eig_batch(rng):
    a = np.stack([random_hermitian(4, rng) for _ in range(50)])
    lam, v = eigh_batch(a)
    ref = np.linalg.eigvalsh(a)
    assert np.allclose(lam, ref, atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eig_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ShapeError):
        eig_hermitian(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_eig_sum_equals_trace(seed, d):
    m = random_hermitian(d, np.random.default_rng(seed))
    lam, v = eig_hermitian(m)
    assert abs(lam.sum() - np.trace(m).real) <= 1e-10
    assert np.abs(v @ np.diag(lam) @ v.conj().T - m).max() <= 1e-10


# --- Hermitian basis -------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_basis_orthonormal(d):
    b = hermitian_basis(d)
    assert b.shape == (d * d, d, d)
    gram = np.einsum("aij,bji->ab", b, b)
    assert np.allclose(gram, np.eye(d * d), atol=1e-14)
    assert np.allclose(b, np.conj(np.swapaxes(b, 1, 2)))


def test_basis_d1():
    assert np.array_equal(hermitian_basis(1), np.ones((1, 1, 1)))


def test_basis_reconstructs(rng):
    b = hermitian_basis(3)
    m = random_hermitian(3, rng)
    x = basis_coefficients(m, b)
    assert x.dtype == float
    assert np.abs(from_coefficients(x, b) - m).max() <= 1e-14
