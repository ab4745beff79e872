"""A-posteriori checks of candidate witnesses and the PPT reference oracle."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .linalg import contract_batch, eigvals_batch, min_eig, partial_transpose, product_embedding
from .partitions import PartitionStructure
from .states import DensityMatrix, RngStream, sample_block_vectors
from .witness import DETECTION_THRESHOLD, WitnessResult, find_witness

VALIDATION_STREAM = "validation"
DEFAULT_EPS = 0.01
DEFAULT_BETA = 0.01
# eigenvalues above -VIOLATION_TOL count as non-negative; matches the solver's
# default feasibility tolerance, the precision sampled blocks are held to
VIOLATION_TOL = 1e-8
CHUNK = 20000
PPT_TOL = 1e-10
# dims for which PPT is equivalent to separability
PPT_EXACT_DIMS = {(2, 2), (2, 3), (3, 2)}


def chernoff_sample_count(eps: float, beta: float) -> int:
    """Trials needed so ``|V - V_emp| <= eps`` with confidence ``1 - beta``."""
    for name, v in (("eps", eps), ("beta", beta)):
        if not (0.0 < v <= 1.0):
            raise ValueError(f"{name}={v} must lie in (0, 1]")
    return math.ceil(math.log(2.0 / beta) / (2.0 * eps * eps))


@dataclass
class ValidationReport:
    v_emp: float
    lambda_min_violated: float
    trials: int
    violations: int
    eps: float | None = None
    beta: float | None = None
    seed: int | None = None
    stream: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def empirical_violation(w: np.ndarray, structure: PartitionStructure, trials: int,
                        rng: RngStream, eps: float | None = None, beta: float | None = None,
                        tol: float = VIOLATION_TOL) -> ValidationReport:
    """Monte-Carlo estimate of the probability that ``w`` fails on a product state.

    Each trial draws one fresh product vector per partition; the trial is a
    violation when any contracted block has an eigenvalue below ``-tol``.
    Testing the whole contracted block is at least as strict as testing a
    single product state.  Draws come from the ``validation`` substream of
    ``rng`` and never share state with constraint sampling.
    """
    w = np.asarray(w, dtype=np.complex128)
    if abs(np.trace(w) - 1.0) > 1e-6:
        raise ValueError(f"witness trace {np.trace(w).real:.8g} is not 1")
    if w.shape[0] != structure.total_dim:
        raise ValueError(f"witness of dimension {w.shape[0]} does not match dims {structure.dims}")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    streams = [rng.substream(VALIDATION_STREAM, i) for i in range(len(structure.partitions))]
    violated = np.zeros(trials, dtype=bool)
    worst = np.zeros(trials)
    for start in range(0, trials, CHUNK):
        n = min(CHUNK, trials - start)
        for part, stream in zip(structure.partitions, streams):
            vecs = sample_block_vectors(part, structure.dims, n, stream)
            emb = product_embedding(structure.dims, part.blocks, vecs, part.free)
            lam = eigvals_batch(contract_batch(w, emb), check=False)[:, 0]
            sl = slice(start, start + n)
            worst[sl] = np.minimum(worst[sl], lam)
            violated[sl] |= lam < -tol
    count = int(violated.sum())
    lam_min = float(worst[violated].min()) if count else 0.0
    return ValidationReport(
        v_emp=count / trials if trials else 0.0,
        lambda_min_violated=lam_min,
        trials=trials,
        violations=count,
        eps=eps,
        beta=beta,
        seed=rng.seed,
        stream=streams[0].label if streams else "",
    )


@dataclass
class PptResult:
    is_ppt: bool
    min_eig: float


def ppt_check(rho: DensityMatrix, party: int = 2) -> PptResult:
    lam = min_eig(partial_transpose(rho.matrix, rho.dims, party))
    return PptResult(lam >= -PPT_TOL, lam)


def ppt_is_exact(dims) -> bool:
    return tuple(dims) in PPT_EXACT_DIMS


class Verdict(str, enum.Enum):
    ENTANGLED = "Entangled"
    NOT_DETECTED = "NotDetected"


@dataclass
class Classification:
    verdict: Verdict | None
    witness: WitnessResult
    report: ValidationReport | None

    def context(self) -> str:
        r = self.report
        trials = r.trials if r else 0
        return (f"eps={self.witness.eps} beta={self.witness.beta} "
                f"N={self.witness.n_samples} N_validation={trials}")


def classify(rho: DensityMatrix, structure: PartitionStructure, n_samples: int, seed: int = 0,
             tau: float = DETECTION_THRESHOLD, eps_check: float = DEFAULT_EPS,
             beta_check: float = DEFAULT_BETA, trials: int | None = None,
             rng: RngStream | None = None, **solver_opts) -> Classification:
    """Decide whether ``rho`` is detected as entangled for ``structure``.

    The verdict is ``Entangled`` when the sampled witness has objective
    below ``-tau`` and its empirical violation rate, estimated with
    ``trials`` fresh draws (default: the Chernoff count for ``eps_check``,
    ``beta_check``), is at most ``eps_check``.  A validation block counts
    as violated below ``-tol_feas``, the tolerance the solver enforced on
    the sampled blocks.  Solver failures give ``verdict=None``.
    """
    rng = rng if rng is not None else RngStream(seed)
    wit = find_witness(rho, structure, n_samples, rng=rng, eps=eps_check, beta=beta_check, **solver_opts)
    if not wit.ok:
        return Classification(None, wit, None)
    if wit.objective >= -tau:
        return Classification(Verdict.NOT_DETECTED, wit, None)
    if trials is None:
        trials = chernoff_sample_count(eps_check, beta_check)
    tol = solver_opts.get("tol_feas", VIOLATION_TOL)
    report = empirical_violation(wit.witness, structure, trials, rng, eps=eps_check, beta=beta_check, tol=tol)
    verdict = Verdict.ENTANGLED if report.v_emp <= eps_check else Verdict.NOT_DETECTED
    return Classification(verdict, wit, report)
