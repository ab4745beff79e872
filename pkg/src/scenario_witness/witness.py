"""Sampled witness programs and their solution.

For a state ``rho`` and a partition structure, each sampled product vector
``v`` (one unit vector per contracted block) yields the constraint

    E_v^H W E_v >= 0,    E_v = [v (x) e_1, ..., v (x) e_b]

on the free block, and the program minimizes ``Tr(W rho)`` subject to all
sampled constraints and ``Tr W = 1``.  ``W`` is parameterized by its
coefficients in the orthonormal Hermitian basis (``D*D`` real variables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .linalg import (
    basis_coefficients,
    contract_batch,
    eigvals_batch,
    from_coefficients,
    hermitian_basis,
    product_embedding,
)
from .partitions import PartitionStructure
from .sdp import CongruenceBlocks, SdpProblem, SdpSolution, Status, solve
from .states import DensityMatrix, RngStream, sample_block_vectors

CONSTRAINT_STREAM = "constraints"
DETECTION_THRESHOLD = 1e-6


def _check_unit_interval(name, value):
    if not (0.0 < value <= 1.0):
        raise ValueError(f"{name}={value} must lie in (0, 1]")


def theoretical_sample_count(d: int, eps: float, beta: float) -> int:
    """Smallest ``N`` with ``N >= D(D+1)/(eps*beta) - 1``.

    ``eps`` and ``beta`` are read as the decimals they print as, so that
    e.g. ``0.1 * 0.1`` does not round the bound up by one.
    """
    _check_unit_interval("eps", eps)
    _check_unit_interval("beta", beta)
    if d < 1:
        raise ValueError("dimension must be positive")
    bound = Fraction(d * (d + 1)) / (Fraction(repr(float(eps))) * Fraction(repr(float(beta)))) - 1
    return max(0, math.ceil(bound))


@dataclass
class SampledProgram:
    rho: DensityMatrix
    structure: PartitionStructure
    n_per_partition: int
    samples: list  # per partition: list of block vector stacks (None for the free block)
    basis: np.ndarray
    problem: SdpProblem
    psd_fallback: bool = False

    @property
    def embeddings(self) -> list[np.ndarray]:
        return [b.emb for b in self.problem.blocks]

    def start_point(self) -> np.ndarray:
        """Coefficients of ``I/D``, strictly feasible for every sampled block."""
        d = self.basis.shape[1]
        return basis_coefficients(np.eye(d) / d, self.basis)


def build_sampled_program(rho: DensityMatrix, structure: PartitionStructure,
                          n_per_partition: int, rng: RngStream) -> SampledProgram:
    """Sample constraints and assemble the witness SDP.

    Each partition draws from its own substream of ``rng`` so the first
    ``k`` samples of a partition are the same for every ``n_per_partition``
    at least ``k``.  With ``n_per_partition == 0`` the program would be
    unbounded, so the single constraint ``W >= 0`` is used instead.
    """
    if tuple(structure.dims) != tuple(rho.dims):
        raise ValueError(f"structure dims {structure.dims} do not match state dims {rho.dims}")
    if n_per_partition < 0:
        raise ValueError("sample count must be non-negative")
    d = rho.dim
    basis = hermitian_basis(d)
    c = basis_coefficients(rho.matrix, basis)
    a_eq = np.trace(basis, axis1=1, axis2=2).real[None, :]
    blocks, samples = [], []
    if n_per_partition == 0:
        blocks.append(CongruenceBlocks(np.eye(d, dtype=np.complex128)[None], basis))
    else:
        for i, part in enumerate(structure.partitions):
            vecs = sample_block_vectors(part, structure.dims, n_per_partition,
                                        rng.substream(CONSTRAINT_STREAM, i))
            samples.append(vecs)
            emb = product_embedding(structure.dims, part.blocks, vecs, part.free)
            blocks.append(CongruenceBlocks(emb, basis))
    problem = SdpProblem(c, blocks, a_eq, [1.0])
    return SampledProgram(rho, structure, n_per_partition, samples, basis, problem,
                          psd_fallback=(n_per_partition == 0))


@dataclass
class WitnessResult:
    witness: np.ndarray
    objective: float
    status: Status
    dims: tuple[int, ...]
    structure: str
    n_samples: int
    seed: int
    worst_sample_eig: float
    trace: float
    solver: SdpSolution | None = None
    eps: float | None = None
    beta: float | None = None
    sample_bound: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL

    def detects(self, threshold: float = DETECTION_THRESHOLD) -> bool:
        return self.ok and self.objective < -threshold

    def summary(self) -> dict:
        d = int(np.prod(self.dims))
        return {
            "objective": self.objective,
            "status": self.status.value,
            "dims": list(self.dims),
            "structure": self.structure,
            "N": self.n_samples,
            "seed": self.seed,
            "worst_sample_eig": self.worst_sample_eig,
            "trace": self.trace,
            "variables": d * d,
            "bound_variable_count": d * (d + 1),
            "eps": self.eps,
            "beta": self.beta,
            "sample_bound": self.sample_bound,
            "iterations": self.solver.iterations if self.solver else 0,
            "gap_bound": self.solver.gap_bound if self.solver else None,
            "message": self.solver.message if self.solver else "",
        }


def sampled_block_min_eigs(program: SampledProgram, w: np.ndarray) -> np.ndarray:
    """Minimum eigenvalue of every sampled block at ``w``, recomputed from scratch."""
    out = [eigvals_batch(contract_batch(w, emb), check=False)[:, 0] for emb in program.embeddings]
    return np.concatenate(out) if out else np.zeros(0)


def find_witness(rho: DensityMatrix, structure: PartitionStructure, n_samples: int,
                 seed: int = 0, eps: float | None = None, beta: float | None = None,
                 tol_feas: float = 1e-8, tol_gap: float = 1e-7, max_iter: int = 200,
                 rng: RngStream | None = None) -> WitnessResult:
    """Compute the optimal witness of the sampled program.

    ``n_samples`` is the per-partition sample count.  When ``eps`` and
    ``beta`` are given, the sample bound that would guarantee an
    ``eps``-level witness with confidence ``1 - beta`` is reported
    alongside (it is not enforced).
    """
    rng = rng if rng is not None else RngStream(seed)
    program = build_sampled_program(rho, structure, n_samples, rng)
    sol = solve(program.problem, tol_feas=tol_feas, tol_gap=tol_gap, max_iter=max_iter,
                x_start=program.start_point())
    w = from_coefficients(sol.x, program.basis)
    w = 0.5 * (w + w.conj().T)
    eigs = sampled_block_min_eigs(program, w)
    bound = None
    if eps is not None and beta is not None:
        bound = theoretical_sample_count(rho.dim, eps, beta)
    return WitnessResult(
        witness=w,
        objective=rho.expectation(w),
        status=sol.status,
        dims=rho.dims,
        structure=structure.label(),
        n_samples=n_samples,
        seed=rng.seed,
        worst_sample_eig=float(eigs.min()) if eigs.size else float("inf"),
        trace=float(np.trace(w).real),
        solver=sol,
        eps=eps,
        beta=beta,
        sample_bound=bound,
        extra={"psd_fallback": program.psd_fallback,
               "blocks": program.problem.block_count},
    )


def ghz_biseparable_witness() -> np.ndarray:
    """Closed-form trace-one witness separating GHZ from biseparable states.

    ``(sum of the six projectors |abc><abc| with abc not in {000, 111}
    - |000><111| - |111><000|) / 6``; its GHZ expectation is ``-1/6``.
    """
    w = np.zeros((8, 8), dtype=np.complex128)
    for k in range(1, 7):
        w[k, k] = 1.0
    w[0, 7] = w[7, 0] = -1.0
    return w / 6.0
