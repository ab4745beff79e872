"""Desk-scale reproductions of the four benchmark experiments.

Every experiment writes a CSV (one row per grid point or bucket, flushed
as it goes) and a ``<csv>.manifest.json`` holding all parameters, seeds,
solver options and wall times needed to regenerate it.
"""

from __future__ import annotations

import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend
from .io import CsvSink, write_json, write_witness
from .partitions import full_separability_structure, m_separability_structure, parse_structure
from .states import RngStream, ghz_state, horodecki_state, random_density_matrix, shifts_upb_state
from .validation import DEFAULT_EPS, Verdict, classify, empirical_violation, ppt_check
from .witness import DETECTION_THRESHOLD, find_witness, ghz_biseparable_witness

EXPERIMENTS = ("horodecki", "random-ppt", "shifts-upb", "ghz")

COLUMNS = {
    "horodecki": ["a", "objective", "V_emp", "lambda_min", "verdict", "status"],
    "random-ppt": ["dims", "N", "trials", "errors", "error_rate"],
    "shifts-upb": ["partition", "objective", "V_emp", "lambda_min", "verdict", "status"],
    "ghz": ["objective", "V_emp", "lambda_min", "witness", "reference_V_emp", "status"],
}

SHIFTS_ROWS = (("A-BC", "1|2,3"), ("B-AC", "2|1,3"), ("C-AB", "3|1,2"), ("A-B-C", "full"))


@dataclass
class SolverOptions:
    tol_feas: float = 1e-8
    tol_gap: float = 1e-7
    max_iter: int = 200


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 1
    samples: list[int] = field(default_factory=list)
    trials: int = 100_000
    grid: list[float] = field(default_factory=list)
    dims: list[list[int]] = field(default_factory=list)
    count: int = 200
    tau: float = DETECTION_THRESHOLD
    eps_check: float = DEFAULT_EPS
    solver: SolverOptions = field(default_factory=SolverOptions)
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if not self.samples:
            raise ValueError("sample list is empty")
        if self.experiment == "horodecki" and not self.grid:
            raise ValueError("grid is empty")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma list."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(t) for t in text.split(",") if t.strip()]


def _verdict(ok, objective, v_emp, tau, eps_check):
    if not ok:
        return None
    if objective < -tau and v_emp <= eps_check:
        return Verdict.ENTANGLED.value
    return Verdict.NOT_DETECTED.value


def _map(fn, tasks, threads):
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(fn, tasks)
    else:
        yield from map(fn, tasks)


# --------------------------------------------------------------------------
# task functions (top level so they can run in worker processes)
# --------------------------------------------------------------------------

def _horodecki_task(args):
    cfg, i, a = args
    rng = RngStream(cfg.seed).substream("task", i)
    rho = horodecki_state(a)
    st = full_separability_structure((3, 3))
    wit = find_witness(rho, st, cfg.samples[0], rng=rng, **asdict(cfg.solver))
    rep = empirical_violation(wit.witness, st, cfg.trials, rng, tol=cfg.solver.tol_feas)
    return {
        "a": a,
        "objective": wit.objective,
        "V_emp": rep.v_emp,
        "lambda_min": rep.lambda_min_violated,
        "verdict": _verdict(wit.ok, wit.objective, rep.v_emp, cfg.tau, cfg.eps_check),
        "status": wit.status.value,
    }


def _random_task(args):
    cfg, di, dims, j = args
    root = RngStream(cfg.seed).substream("dims", di)
    d = int(np.prod(dims))
    rho = random_density_matrix(d, root.substream("state", j), dims)
    entangled = not ppt_check(rho, 2).is_ppt
    st = full_separability_structure(dims)
    out = []
    for n in cfg.samples:
        c = classify(rho, st, n, rng=root.substream("task", j), tau=cfg.tau,
                     eps_check=cfg.eps_check, **asdict(cfg.solver))
        if c.verdict is None:
            out.append(None)
        else:
            out.append((c.verdict == Verdict.ENTANGLED) != entangled)
    return out


def _shifts_task(args):
    cfg, i, name, text = args
    rng = RngStream(cfg.seed).substream("task", i)
    rho = shifts_upb_state()
    st = parse_structure(text, rho.dims)
    wit = find_witness(rho, st, cfg.samples[0], rng=rng, **asdict(cfg.solver))
    rep = empirical_violation(wit.witness, st, cfg.trials, rng, tol=cfg.solver.tol_feas)
    return {
        "partition": name,
        "objective": wit.objective,
        "V_emp": rep.v_emp,
        "lambda_min": rep.lambda_min_violated,
        "verdict": _verdict(wit.ok, wit.objective, rep.v_emp, cfg.tau, cfg.eps_check),
        "status": wit.status.value,
    }


# --------------------------------------------------------------------------
# drivers
# --------------------------------------------------------------------------

def run(cfg: ExperimentConfig, csv_path, log=print) -> dict:
    """Run one experiment, writing the CSV and its manifest.

    Returns the manifest.  Rows are flushed as they complete; on
    ``KeyboardInterrupt`` the manifest is still written (marked
    ``interrupted``) before the exception propagates.
    """
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "experiment": cfg.experiment,
        "config": asdict(cfg),
        "csv": str(csv_path),
        "version": __version__,
        "backend": backend(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "rows": [],
        "wall_times": [],
        "interrupted": False,
        "failures": 0,
    }
    t_start = time.perf_counter()
    sink = CsvSink(csv_path, COLUMNS[cfg.experiment])
    try:
        for row, dt in _rows(cfg, csv_path, log):
            sink.write(row)
            manifest["rows"].append(row)
            manifest["wall_times"].append(dt)
            if row.get("status") not in (None, "Optimal"):
                manifest["failures"] += 1
    except KeyboardInterrupt:
        manifest["interrupted"] = True
        raise
    finally:
        sink.close()
        manifest["wall_time_total"] = time.perf_counter() - t_start
        write_json(csv_path.with_name(csv_path.name + ".manifest.json"), manifest)
    return manifest


def _rows(cfg, csv_path, log):
    t = time.perf_counter()

    def lap():
        nonlocal t
        now = time.perf_counter()
        dt, t = now - t, now
        return dt

    if cfg.experiment == "horodecki":
        tasks = [(cfg, i, a) for i, a in enumerate(cfg.grid)]
        for row in _map(_horodecki_task, tasks, cfg.threads):
            log(f"a={row['a']:.6g} objective={row['objective']:.6g} V_emp={row['V_emp']:.6g} "
                f"lambda_min={row['lambda_min']:.6g} verdict={row['verdict']} "
                f"[N={cfg.samples[0]} N_validation={cfg.trials} eps={cfg.eps_check}]")
            yield row, lap()

    elif cfg.experiment == "random-ppt":
        for di, dims in enumerate(cfg.dims):
            tasks = [(cfg, di, tuple(dims), j) for j in range(cfg.count)]
            results = list(_map(_random_task, tasks, cfg.threads))
            for k, n in enumerate(cfg.samples):
                col = [r[k] for r in results]
                failed = sum(c is None for c in col)
                errors = sum(bool(c) for c in col) + failed
                row = {"dims": "x".join(map(str, dims)), "N": n, "trials": cfg.count,
                       "errors": errors, "error_rate": errors / cfg.count}
                if failed:
                    row["status"] = f"{failed} solver failures"
                log(f"dims={row['dims']} N={n} errors={errors}/{cfg.count} "
                    f"[eps={cfg.eps_check} tau={cfg.tau}]")
                yield row, lap()

    elif cfg.experiment == "shifts-upb":
        tasks = [(cfg, i, name, text) for i, (name, text) in enumerate(SHIFTS_ROWS)]
        for row in _map(_shifts_task, tasks, cfg.threads):
            log(f"{row['partition']:6s} objective={row['objective']:.6g} V_emp={row['V_emp']:.6g} "
                f"lambda_min={row['lambda_min']:.6g} verdict={row['verdict']} "
                f"[N={cfg.samples[0]} per partition, N_validation={cfg.trials}]")
            yield row, lap()

    else:  # ghz
        rho = ghz_state()
        st = m_separability_structure(rho.dims, 2)
        rng = RngStream(cfg.seed).substream("task", 0)
        wit = find_witness(rho, st, cfg.samples[0], rng=rng, **asdict(cfg.solver))
        rep = empirical_violation(wit.witness, st, cfg.trials, rng, tol=cfg.solver.tol_feas)
        ref = empirical_violation(ghz_biseparable_witness(), st, cfg.trials, rng.substream("reference"),
                                  tol=cfg.solver.tol_feas)
        wpath = csv_path.with_name(csv_path.stem + "_witness.json")
        write_witness(wpath, wit)
        log(f"objective={wit.objective:.6g} (reference witness {rho.expectation(ghz_biseparable_witness()):.6g}) "
            f"V_emp={rep.v_emp:.6g} lambda_min={rep.lambda_min_violated:.6g} "
            f"[N={cfg.samples[0]} per partition, N_validation={cfg.trials}]")
        yield {"objective": wit.objective, "V_emp": rep.v_emp, "lambda_min": rep.lambda_min_violated,
               "witness": str(wpath), "reference_V_emp": ref.v_emp, "status": wit.status.value}, lap()
