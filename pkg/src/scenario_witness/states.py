"""State catalog, random density matrices and product-vector sampling."""

from __future__ import annotations

import zlib
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .linalg import check_hermitian, min_eig, total_dim
from .partitions import Partition

TRACE_TOL = 1e-12
PSD_TOL = 1e-10


class RngStream:
    """Counter-based random stream with labelled, non-overlapping substreams.

    The generator is Philox keyed by ``SeedSequence(seed, spawn_key=path)``
    where ``path`` records every ``substream`` call.  Two streams with the
    same seed and path produce identical draws; streams with different
    paths are statistically independent.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = (), labels: tuple[str, ...] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(path)
        self.labels = tuple(labels)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def substream(self, purpose: str, index: int = 0) -> "RngStream":
        tag = zlib.crc32(purpose.encode())
        return RngStream(self.seed, self.path + (tag, int(index)), self.labels + (f"{purpose}[{index}]",))

    @property
    def label(self) -> str:
        return "/".join(self.labels) or "root"

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        d = total_dim(self.dims)
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dims {self.dims}")
        check_hermitian(m)
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} is not 1")
        lam = min_eig(m)
        if lam < -PSD_TOL:
            raise ValueError(f"matrix is not PSD (min eigenvalue {lam:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def expectation(self, w: np.ndarray) -> float:
        """``Tr(w rho)``."""
        return float(np.einsum("ij,ji->", w, self.matrix).real)


def _projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return np.outer(psi, psi.conj())


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def sample_unit_vectors(count: int, d: int, rng: RngStream) -> np.ndarray:
    """``count`` Haar-uniform unit vectors in C^d, shape ``(count, d)``."""
    z = rng.generator.standard_normal((count, d, 2))
    v = z[..., 0] + 1j * z[..., 1]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_unit_vector(d: int, rng: RngStream) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be positive")
    return sample_unit_vectors(1, d, rng)[0]


@dataclass
class ProductVector:
    """Unit vectors for the contracted blocks of one partition."""

    partition: Partition
    dims: tuple[int, ...]
    blocks: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict)


def sample_block_vectors(partition: Partition, dims: Sequence[int], count: int, rng: RngStream) -> list:
    """Sample ``count`` product vectors for one partition.

    Returns one ``(count, d_block)`` array per block, ``None`` for the free
    block.  Draws are taken sample by sample, so the first ``k`` samples do
    not depend on ``count``.
    """
    sizes = {i: partition.block_dim(dims, i) for i in partition.contracted}
    total = sum(sizes.values())
    z = rng.generator.standard_normal((count, total, 2))
    z = z[..., 0] + 1j * z[..., 1]
    out: list = [None] * len(partition.blocks)
    start = 0
    for i in partition.contracted:
        v = z[:, start : start + sizes[i]]
        out[i] = v / np.linalg.norm(v, axis=1, keepdims=True)
        start += sizes[i]
    return out


def sample_product_vector(partition: Partition, dims: Sequence[int], rng: RngStream) -> ProductVector:
    vecs = sample_block_vectors(partition, dims, 1, rng)
    blocks = {partition.blocks[i]: vecs[i][0] for i in partition.contracted}
    return ProductVector(partition, tuple(dims), blocks)


def random_density_matrix(d: int, rng: RngStream, dims: Sequence[int] | None = None) -> DensityMatrix:
    """Hilbert-Schmidt random state ``G G^H / Tr(G G^H)`` with square Ginibre ``G``."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    z = rng.generator.standard_normal((d, d, 2))
    g = z[..., 0] + 1j * z[..., 1]
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return DensityMatrix(rho, tuple(dims) if dims is not None else (d,))


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------

def horodecki_state(a: float) -> DensityMatrix:
    """The 3x3 PPT entangled family ``rho(a)``, ``0 <= a <= 1``."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"parameter a={a} outside [0, 1]")
    m = np.diag([a] * 9).astype(float)
    for i in (0, 4, 8):
        for j in (0, 4, 8):
            m[i, j] = a
    m[6, 6] = m[8, 8] = (1.0 + a) / 2.0
    m[6, 8] = m[8, 6] = np.sqrt(1.0 - a * a) / 2.0
    return DensityMatrix(m / (8.0 * a + 1.0), (3, 3))


def ghz_state() -> DensityMatrix:
    psi = np.zeros(8)
    psi[0] = psi[7] = 1.0 / np.sqrt(2.0)
    return DensityMatrix(_projector(psi), (2, 2, 2))


def shifts_upb_vectors() -> list[np.ndarray]:
    """``|0,1,+>, |1,+,0>, |+,0,1>, |-,-,->``."""
    k0 = np.array([1.0, 0.0])
    k1 = np.array([0.0, 1.0])
    kp = (k0 + k1) / np.sqrt(2.0)
    km = (k0 - k1) / np.sqrt(2.0)

    def prod(a, b, c):
        return np.kron(np.kron(a, b), c).astype(np.complex128)

    return [prod(k0, k1, kp), prod(k1, kp, k0), prod(kp, k0, k1), prod(km, km, km)]


def shifts_upb_state() -> DensityMatrix:
    """Normalized projector onto the complement of the Shifts UPB."""
    p = np.eye(8, dtype=np.complex128)
    for psi in shifts_upb_vectors():
        p -= _projector(psi)
    return DensityMatrix(p / 4.0, (2, 2, 2))


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    d = total_dim(dims)
    return DensityMatrix(np.eye(d) / d, tuple(dims))


def bell_state() -> DensityMatrix:
    psi = np.zeros(4)
    psi[0] = psi[3] = 1.0 / np.sqrt(2.0)
    return DensityMatrix(_projector(psi), (2, 2))
