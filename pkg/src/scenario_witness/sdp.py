"""Small dense semidefinite programs solved by a log-barrier method.

Problem form::

    minimize    c . x
    subject to  F_k(x) = F_k0 + sum_i x_i F_ki  >= 0     (every block k)
                A x = b

with ``x`` real.  Equalities are eliminated through a null-space
parameterization ``x = x0 + Z y``.  Each centering step is a damped Newton
iteration on ``t c.x - sum_k log det F_k(x)``; ``t`` starts at 1 and grows
by a factor 10 until the duality bound ``sum_k dim(F_k) / t`` drops below
``tol_gap``.  A phase-1 problem (minimize ``s`` with ``F_k(x) + s I >= 0``)
finds a strictly feasible start when none is supplied.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .linalg import eigh_batch, eigvals_batch

log = logging.getLogger(__name__)

# fraction of the distance to the boundary a single Newton step may cover
STEP_FRACTION = 0.5


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_TROUBLE = "NumericalTrouble"


@dataclass
class AffineBlock:
    """``F0 + sum_i x_i F[i]`` with Hermitian ``F0`` (b, b) and ``F`` (m, b, b)."""

    f0: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.f0 = np.atleast_2d(np.asarray(self.f0, dtype=np.complex128))
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim == 2:
            self.coeffs = self.coeffs[:, :, None]
        b = self.f0.shape[0]
        if self.f0.shape != (b, b) or self.coeffs.shape[1:] != (b, b):
            raise ValueError("inconsistent block shapes")

    @property
    def dim(self) -> int:
        return self.f0.shape[0]

    @property
    def nvars(self) -> int:
        return self.coeffs.shape[0]

    def evaluate(self, x) -> np.ndarray:
        return self.f0 + np.tensordot(np.asarray(x, dtype=float), self.coeffs, axes=1)


@dataclass
class CongruenceBlocks:
    """A family of blocks ``E_k^H (W0 + sum_i x_i B_i) E_k``.

    ``emb`` has shape (K, D, b) and ``basis`` shape (m, D, D).  This is the
    form taken by every sampled witness constraint; it lets the Hessian be
    assembled with one (D^2 x K) by (K x D^2) product instead of K*m small
    matrix products.
    """

    emb: np.ndarray
    basis: np.ndarray
    offset: np.ndarray | None = None

    def __post_init__(self):
        self.emb = np.ascontiguousarray(self.emb, dtype=np.complex128)
        self.basis = np.asarray(self.basis, dtype=np.complex128)
        if self.emb.ndim != 3 or self.emb.shape[1] != self.basis.shape[1]:
            raise ValueError("embedding and basis dimensions disagree")

    @property
    def dim(self) -> int:
        return self.emb.shape[2]

    @property
    def count(self) -> int:
        return self.emb.shape[0]

    @property
    def nvars(self) -> int:
        return self.basis.shape[0]

    def as_affine(self) -> list[AffineBlock]:
        eh = np.conj(np.swapaxes(self.emb, 1, 2))
        coeffs = np.einsum("kad,ide,keb->kiab", eh, self.basis, self.emb)
        if self.offset is None:
            f0 = np.zeros((self.count, self.dim, self.dim), dtype=np.complex128)
        else:
            f0 = eh @ self.offset @ self.emb
        return [AffineBlock(f0[k], coeffs[k]) for k in range(self.count)]


@dataclass
class SdpProblem:
    c: np.ndarray
    blocks: list = field(default_factory=list)
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        m = self.c.size
        if self.a_eq is None:
            self.a_eq = np.zeros((0, m))
            self.b_eq = np.zeros(0)
        self.a_eq = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        if self.a_eq.shape != (self.b_eq.size, m):
            raise ValueError(f"equality constraints have shape {self.a_eq.shape}, expected (*, {m})")
        for blk in self.blocks:
            if blk.nvars != m:
                raise ValueError(f"block has {blk.nvars} variables, objective has {m}")

    @property
    def nvars(self) -> int:
        return self.c.size

    @property
    def block_count(self) -> int:
        return sum(getattr(b, "count", 1) for b in self.blocks)

    @property
    def total_block_dim(self) -> int:
        return sum(getattr(b, "count", 1) * b.dim for b in self.blocks)

    def block_values(self, x) -> list[np.ndarray]:
        """Every block evaluated at ``x``, grouped as stacks."""
        out = []
        for blk in self.blocks:
            if isinstance(blk, CongruenceBlocks):
                w = np.tensordot(np.asarray(x, dtype=float), blk.basis, axes=1)
                if blk.offset is not None:
                    w = w + blk.offset
                out.append(_kernels.sandwich(blk.emb, w))
            else:
                out.append(blk.evaluate(x)[None])
        return out

    def worst_min_eig(self, x) -> float:
        vals = [eigvals_batch(s, check=False)[:, 0].min() for s in self.block_values(x) if len(s)]
        return float(min(vals)) if vals else np.inf


@dataclass
class SdpSolution:
    x: np.ndarray
    objective: float
    status: Status
    worst_min_eig: float
    eq_residual: float
    iterations: int = 0
    gap_bound: float = np.inf
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL


# --------------------------------------------------------------------------
# block groups: stacked evaluation and barrier derivatives in x-space
# --------------------------------------------------------------------------

class _AffineGroup:
    def __init__(self, blocks: list[AffineBlock]):
        self.f0 = np.stack([b.f0 for b in blocks])
        self.f = np.stack([b.coeffs for b in blocks])
        self.dim = self.f0.shape[1]
        self.count = self.f0.shape[0]

    def value(self, x):
        return self.f0 + np.einsum("i,kiab->kab", x, self.f)

    def linear(self, dx):
        return np.einsum("i,kiab->kab", dx, self.f)

    def trace_terms(self, xmat):
        # sum_k Re Tr(X_k F_ki)
        return np.einsum("kab,kiba->i", xmat, self.f).real

    def barrier_terms(self, sinv, root):
        """``sum_k Tr(S^-1 F_i)`` and ``sum_k Tr(S^-1 F_i S^-1 F_j)``."""
        g = root[:, None] @ self.f @ root[:, None]
        a = g.transpose(1, 0, 2, 3).reshape(self.f.shape[1], -1)
        return self.trace_terms(sinv), (a @ a.conj().T).real


class _CongruenceGroup:
    def __init__(self, blk: CongruenceBlocks):
        self.emb = blk.emb
        self.emb_h = np.ascontiguousarray(np.conj(np.swapaxes(blk.emb, 1, 2)))
        self.basis = blk.basis
        self.offset = blk.offset
        self.dim = blk.dim
        self.count = blk.count
        m, d, _ = blk.basis.shape
        self.d = d
        self.bflat = blk.basis.reshape(m, d * d)

    def _w(self, x):
        return np.tensordot(x, self.basis, axes=1)

    def value(self, x):
        w = self._w(x)
        if self.offset is not None:
            w = w + self.offset
        return _kernels.sandwich(self.emb, w)

    def linear(self, dx):
        return _kernels.sandwich(self.emb, self._w(dx))

    def trace_terms(self, xmat):
        msum = (self.emb @ xmat @ self.emb_h).sum(axis=0)
        return np.einsum("iab,ba->i", self.basis, msum).real

    def barrier_terms(self, sinv, root):
        # H_ij = sum_k Tr(B_i M_k B_j M_k),  M_k = E_k S_k^-1 E_k^H
        d = self.d
        mk = self.emb @ sinv @ self.emb_h
        grad = np.einsum("iab,ba->i", self.basis, mk.sum(axis=0)).real
        mf = mk.reshape(self.count, d * d)
        x = mf.T @ mf  # x[(p, a), (b, q)] = sum_k M[p, a] M[b, q]
        k4 = x.reshape(d, d, d, d).transpose(1, 2, 3, 0).reshape(d * d, d * d)
        return grad, (self.bflat @ k4 @ self.bflat.T).real


def _groups(problem: SdpProblem):
    groups = []
    affine: dict[int, list] = {}
    for blk in problem.blocks:
        if isinstance(blk, CongruenceBlocks):
            if blk.count:
                groups.append(_CongruenceGroup(blk))
        else:
            affine.setdefault(blk.dim, []).append(blk)
    for dim in sorted(affine):
        groups.append(_AffineGroup(affine[dim]))
    return groups


# --------------------------------------------------------------------------
# barrier machinery in the reduced variables z = y (or (y, s) in phase 1)
# --------------------------------------------------------------------------

class _Barrier:
    def __init__(self, groups, x0, z_basis, shift: bool):
        self.groups = groups
        self.x0 = x0
        self.zb = z_basis
        self.shift = shift
        self.ny = z_basis.shape[1]

    def split(self, z):
        if self.shift:
            return self.x0 + self.zb @ z[:-1], z[-1]
        return self.x0 + self.zb @ z, 0.0

    def analyze(self, z):
        """Eigen-decompose every slack; ``None`` if any is not positive definite."""
        x, s = self.split(z)
        out = []
        for g in self.groups:
            sl = g.value(x)
            if s:
                sl = sl + s * np.eye(g.dim)
            w, v = eigh_batch(sl, check=False)
            if not np.all(w > 0.0):
                return None
            out.append((w, v))
        return out

    @staticmethod
    def _inv_root(w, v):
        vh = np.conj(np.swapaxes(v, 1, 2))
        sinv = (v * (1.0 / w)[:, None, :]) @ vh
        root = (v * (1.0 / np.sqrt(w))[:, None, :]) @ vh
        return sinv, root

    def logdet(self, eig) -> float:
        return float(sum(np.log(w).sum() for w, _ in eig))

    def derivs(self, eig):
        m = self.x0.size
        gx = np.zeros(m)
        hx = np.zeros((m, m))
        gs = hs = 0.0
        hxs = np.zeros(m)
        for g, (w, v) in zip(self.groups, eig):
            sinv, root = self._inv_root(w, v)
            tr, hess = g.barrier_terms(sinv, root)
            gx -= tr
            hx += hess
            if self.shift:
                sinv2 = sinv @ sinv
                gs -= float((1.0 / w).sum())
                hs += float((1.0 / w**2).sum())
                hxs += g.trace_terms(sinv2)
        gy = self.zb.T @ gx
        hy = self.zb.T @ hx @ self.zb
        if not self.shift:
            return gy, hy
        hsy = self.zb.T @ hxs
        grad = np.concatenate([gy, [gs]])
        hess = np.block([[hy, hsy[:, None]], [hsy[None, :], np.array([[hs]])]])
        return grad, hess

    def max_step(self, eig, dz) -> float:
        dx, ds = self.split(dz)
        dx = dx - self.x0
        alpha = np.inf
        for g, (w, v) in zip(self.groups, eig):
            ds_mat = g.linear(dx)
            if ds:
                ds_mat = ds_mat + ds * np.eye(g.dim)
            _, root = self._inv_root(w, v)
            lam = eigvals_batch(root @ ds_mat @ root, check=False)[:, 0].min()
            if lam < 0.0:
                alpha = min(alpha, -1.0 / lam)
        return alpha


def _newton_direction(h, g):
    scale = 1.0 / np.sqrt(np.maximum(np.abs(np.diag(h)), 1e-300))
    hs = h * scale[:, None] * scale[None, :]
    try:
        u = np.linalg.solve(hs, -g * scale)
    except np.linalg.LinAlgError:
        u = np.linalg.lstsq(hs, -g * scale, rcond=None)[0]
    return u * scale


def _null_space(a, b):
    m = a.shape[1]
    if a.shape[0] == 0:
        return np.zeros(m), np.eye(m), 0.0
    u, sv, vt = np.linalg.svd(a)
    rank = int((sv > 1e-12 * max(sv[0], 1e-300)).sum())
    x0 = vt[:rank].T @ ((u[:, :rank].T @ b) / sv[:rank])
    z = vt[rank:].T
    return x0, z, float(np.linalg.norm(a @ x0 - b))


@dataclass
class _PathResult:
    z: np.ndarray
    iterations: int
    t: float
    status: Status | None
    message: str = ""


def _follow_path(bar: _Barrier, cz, z, m_total, tol_gap, max_iter, iters, stop=None,
                 t0=1.0, mu=10.0, newton_tol=1e-9):
    t = t0
    eig = bar.analyze(z)
    if eig is None:
        return _PathResult(z, iters, t, Status.NUMERICAL_TROUBLE, "starting point is not strictly feasible")
    while True:
        steps = 0
        while True:
            gb, hb = bar.derivs(eig)
            g = t * cz + gb
            dz = _newton_direction(hb, g)
            lam2 = float(-g @ dz)
            if not np.isfinite(lam2):
                return _PathResult(z, iters, t, Status.NUMERICAL_TROUBLE, "non-finite Newton decrement")
            if lam2 <= newton_tol:
                break
            if steps >= max_iter:
                return _PathResult(z, iters, t, Status.MAX_ITERATIONS, f"stopped at t={t:.3g}")
            # backtracking on phi = t c.z - logdet, differences formed directly
            alpha = min(1.0, STEP_FRACTION * bar.max_step(eig, dz))
            ld0 = bar.logdet(eig)
            slope = float(g @ dz)
            while True:
                znew = z + alpha * dz
                enew = bar.analyze(znew)
                if enew is not None:
                    dphi = t * alpha * float(cz @ dz) - (bar.logdet(enew) - ld0)
                    if dphi <= 0.01 * alpha * slope or alpha * np.sqrt(lam2) < 1e-6:
                        break
                alpha *= 0.5
                if alpha < 1e-14:
                    break
            iters += 1
            steps += 1
            if enew is None:
                return _PathResult(z, iters, t, Status.NUMERICAL_TROUBLE, "line search failed")
            if alpha * np.abs(dz).max() <= 1e-15 * max(1.0, np.abs(z).max()):
                # no representable progress; accept the current point as centered
                z, eig = znew, enew
                break
            z, eig = znew, enew
            if np.abs(z).max() > 1e12:
                return _PathResult(z, iters, t, Status.NUMERICAL_TROUBLE, "iterates diverge (objective unbounded?)")
            if stop is not None and stop(z):
                return _PathResult(z, iters, t, None, "stopped early")
        if stop is not None and stop(z):
            return _PathResult(z, iters, t, None, "stopped early")
        if m_total / t <= tol_gap:
            return _PathResult(z, iters, t, Status.OPTIMAL)
        t *= mu


def solve(problem: SdpProblem, tol_feas: float = 1e-8, tol_gap: float = 1e-7,
          max_iter: int = 200, x_start=None, tol_eq: float = 1e-9) -> SdpSolution:
    """Solve ``problem`` with the barrier method.

    Parameters
    ----------
    problem : SdpProblem
    tol_feas : float
        Worst block eigenvalue accepted for an Optimal solution, and the
        phase-1 margin.
    tol_gap : float
        Target for the barrier duality bound ``total_block_dim / t``.
    max_iter : int
        Maximum number of Newton steps per centering stage.
    x_start : array_like, optional
        Warm start; projected onto the equality constraints and used
        directly when strictly feasible.
    tol_eq : float
        Equality residual accepted for an Optimal solution.

    Returns
    -------
    SdpSolution
    """
    groups = _groups(problem)
    m = problem.nvars
    m_total = problem.total_block_dim
    x0, zb, res = _null_space(problem.a_eq, problem.b_eq)

    def finish(x, status, iters, gap, msg=""):
        x = np.asarray(x, dtype=float)
        worst = problem.worst_min_eig(x)
        eq_res = float(np.linalg.norm(problem.a_eq @ x - problem.b_eq)) if problem.b_eq.size else 0.0
        if status == Status.OPTIMAL and (worst < -tol_feas or eq_res > tol_eq * max(1.0, np.abs(problem.b_eq).max(initial=0.0))):
            status = Status.NUMERICAL_TROUBLE
            msg = f"post-check failed: worst eigenvalue {worst:.3e}, equality residual {eq_res:.3e}"
        return SdpSolution(x, float(problem.c @ x), status, worst, eq_res, iters, gap, msg)

    if res > tol_eq * max(1.0, np.abs(problem.b_eq).max(initial=0.0)):
        return finish(x0, Status.INFEASIBLE, 0, np.inf, "equality constraints are inconsistent")

    y = np.zeros(zb.shape[1])
    if x_start is not None:
        y = zb.T @ (np.asarray(x_start, dtype=float) - x0)

    cz = zb.T @ problem.c
    if not groups:
        if np.linalg.norm(cz) > 1e-12:
            return finish(x0 + zb @ y, Status.NUMERICAL_TROUBLE, 0, np.inf, "objective unbounded below")
        return finish(x0 + zb @ y, Status.OPTIMAL, 0, 0.0)

    iters = 0
    main = _Barrier(groups, x0, zb, shift=False)
    if main.analyze(y) is None:
        # phase 1: minimize s subject to F(x) + s I >= 0
        worst = problem.worst_min_eig(x0 + zb @ y)
        p1 = _Barrier(groups, x0, zb, shift=True)
        z = np.concatenate([y, [1.0 - worst]])
        cz1 = np.zeros(z.size)
        cz1[-1] = 1.0
        res1 = _follow_path(p1, cz1, z, m_total, tol_gap, max_iter, 0,
                            stop=lambda zz: zz[-1] < -tol_feas)
        iters = res1.iterations
        if res1.status is not None:
            x1 = p1.split(res1.z)[0]
            if res1.status == Status.OPTIMAL:
                return finish(x1, Status.INFEASIBLE, iters, res1.t and m_total / res1.t,
                              f"phase 1 optimum s={res1.z[-1]:.3e}")
            return finish(x1, res1.status, iters, np.inf, "phase 1: " + res1.message)
        y = res1.z[:-1]
        log.debug("phase 1 found a strictly feasible point after %d steps", iters)

    res2 = _follow_path(main, cz, y, m_total, tol_gap, max_iter, 0)
    x = main.split(res2.z)[0]
    gap = m_total / res2.t
    return finish(x, res2.status, iters + res2.iterations, gap, res2.message)
