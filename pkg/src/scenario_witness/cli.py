"""Command-line front end.

Commands::

    scenario-witness find --state horodecki:0.5 --structure full --samples 1200
    scenario-witness validate --witness w.json --trials 100000
    scenario-witness experiment horodecki --grid 0:1:0.1 --samples 1200
    scenario-witness state show --name shifts-upb

Global flags (``--seed``, ``--tol-feas``, ``--tol-gap``, ``--threads``,
``--out``, ``--json-errors``) may appear before or after the command.
Exit codes: 0 success, 2 bad input, 3 solver failure, 130 interrupted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .io import FormatError, read_state, read_witness, write_json, write_state, write_witness, CsvSink
from .linalg import eigvals_batch, total_dim
from .partitions import parse_structure
from .states import DensityMatrix, RngStream, ghz_state, horodecki_state, random_density_matrix, shifts_upb_state
from .validation import (
    DEFAULT_BETA,
    DEFAULT_EPS,
    chernoff_sample_count,
    empirical_violation,
    ppt_check,
    ppt_is_exact,
)
from .witness import find_witness, ghz_biseparable_witness, theoretical_sample_count

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_INTERRUPT = 0, 2, 3, 130
RANK_TOL = 1e-10
TABLE_BETAS = (0.1, 0.01, 0.001)
TABLE_EPS = (0.1, 0.05, 0.01)


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def g6(x) -> str:
    return f"{x:.6g}"


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

GLOBAL_DEFAULTS = {"seed": 0, "tol_feas": 1e-8, "tol_gap": 1e-7, "threads": 1, "out": None, "json_errors": False}


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_globals(p, suppress):
    d = (lambda k: argparse.SUPPRESS) if suppress else GLOBAL_DEFAULTS.get
    p.add_argument("--seed", type=_seed, default=d("seed"), help="64-bit root seed")
    p.add_argument("--tol-feas", type=_positive_float, default=d("tol_feas"))
    p.add_argument("--tol-gap", type=_positive_float, default=d("tol_gap"))
    p.add_argument("--threads", type=int, default=d("threads"), help="worker processes for experiments")
    p.add_argument("--out", default=d("out"), help="output file")
    p.add_argument("--json-errors", action="store_true", default=d("json_errors"),
                   help="print errors as JSON on stderr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenario-witness", description="Sampled entanglement witnesses.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("find", help="compute the optimal sampled witness of a state")
    _add_globals(p, suppress=True)
    p.add_argument("--state", required=True,
                   help="horodecki:A | ghz | shifts-upb | random:D:SEED | file:PATH")
    p.add_argument("--dims", type=_int_list, help="local dimensions, e.g. 3,3")
    p.add_argument("--structure", default="full", help="full | m-sep:K | e.g. '1|2,3' (';' joins partitions)")
    p.add_argument("--samples", type=int, required=True, help="samples per partition")
    p.add_argument("--max-iter", type=int, default=200, help="Newton steps per barrier stage")
    p.add_argument("--eps", type=float, help="target violation level for the sample-bound table")
    p.add_argument("--beta", type=float, help="target confidence parameter for the sample-bound table")

    p = sub.add_parser("validate", help="Monte-Carlo violation estimate of a witness")
    _add_globals(p, suppress=True)
    p.add_argument("--witness", required=True, help="witness JSON file, or builtin:ghz-biseparable")
    p.add_argument("--structure", help="defaults to the structure recorded in the witness file")
    p.add_argument("--trials", type=int, help="default: Chernoff count for --eps/--beta")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)

    p = sub.add_parser("experiment", help="run one of the benchmark experiments")
    _add_globals(p, suppress=True)
    p.add_argument("name", choices=experiments.EXPERIMENTS)
    p.add_argument("--grid", default="0:1:0.1", help="horodecki parameter grid start:stop:step")
    p.add_argument("--dims", action="append", type=_int_list,
                   help="random-ppt dims (repeatable); default 2,2 and 2,3")
    p.add_argument("--count", type=int, default=200, help="random-ppt states per dims")
    p.add_argument("--samples", type=_int_list, help="sample count(s); a list for random-ppt")
    p.add_argument("--trials", type=int, help="validation trials (default 100000)")
    p.add_argument("--max-iter", type=int, default=200)

    p = sub.add_parser("state", help="inspect catalog states")
    _add_globals(p, suppress=True)
    ssub = p.add_subparsers(dest="state_command", parser_class=_Parser)
    s = ssub.add_parser("show", help="print properties of a state")
    _add_globals(s, suppress=True)
    s.add_argument("--name", required=True)
    s.add_argument("--dims", type=_int_list)
    s.add_argument("--dump", action="store_true", help="print the matrix")
    return parser


# --------------------------------------------------------------------------
# state sources
# --------------------------------------------------------------------------

def load_state(text: str, dims=None) -> DensityMatrix:
    """Resolve a ``--state``/``--name`` argument."""
    name, _, arg = text.partition(":")
    try:
        if name == "horodecki":
            rho = horodecki_state(float(arg))
        elif name == "ghz" and not arg:
            rho = ghz_state()
        elif name == "shifts-upb" and not arg:
            rho = shifts_upb_state()
        elif name == "random":
            d_text, _, s_text = arg.partition(":")
            d = int(d_text)
            seed = int(s_text) if s_text else 0
            if dims is not None and total_dim(dims) != d:
                raise CliError(f"dims {dims} do not multiply to {d}")
            rho = random_density_matrix(d, RngStream(seed).substream("states", 0), dims or (d,))
        elif name == "file":
            rho = read_state(arg)
        else:
            raise CliError(f"unknown state {text!r}")
    except (ValueError, FormatError) as exc:
        raise CliError(f"bad state {text!r}: {exc}") from None
    if dims is not None and tuple(dims) != rho.dims:
        if total_dim(dims) != rho.dim:
            raise CliError(f"dims {dims} do not match state dimension {rho.dim}")
        rho = DensityMatrix(rho.matrix, tuple(dims))
    return rho


def _structure(text, dims):
    try:
        return parse_structure(text, dims)
    except ValueError as exc:
        raise CliError(f"bad structure {text!r}: {exc}") from None


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _sample_table(d, n, eps=None, beta=None):
    lines = []
    if eps is not None and beta is not None:
        need = theoretical_sample_count(d, eps, beta)
        lines.append(f"samples needed for eps={g6(eps)} beta={g6(beta)}: {need}"
                     f" ({'met' if n >= need else 'not met'} by N={n})")
    lines.append("theoretical sample counts (D=%d):" % d)
    lines.append("  eps \\ beta " + "".join(f"{g6(b):>12s}" for b in TABLE_BETAS))
    for e in TABLE_EPS:
        lines.append(f"  {g6(e):>10s} " + "".join(f"{theoretical_sample_count(d, e, b):>12d}" for b in TABLE_BETAS))
    return lines


def cmd_find(args) -> int:
    rho = load_state(args.state, args.dims)
    st = _structure(args.structure, rho.dims)
    if args.samples < 0:
        raise CliError("--samples must be non-negative")
    if (args.eps is None) != (args.beta is None):
        raise CliError("--eps and --beta must be given together")
    for name in ("eps", "beta"):
        v = getattr(args, name)
        if v is not None and not 0 < v <= 1:
            raise CliError(f"--{name} must lie in (0, 1]")
    res = find_witness(rho, st, args.samples, seed=args.seed, eps=args.eps, beta=args.beta,
                       tol_feas=args.tol_feas, tol_gap=args.tol_gap, max_iter=args.max_iter)
    if not res.ok:
        raise CliError(f"solver failed: {res.status.value}: {res.solver.message}", EXIT_SOLVER)
    print(f"objective: {g6(res.objective)}")
    print(f"status: {res.status.value}  structure: {res.structure}  N: {res.n_samples} per partition"
          f"  seed: {res.seed}")
    print(f"worst sampled eigenvalue: {g6(res.worst_sample_eig)}  iterations: {res.solver.iterations}")
    for line in _sample_table(rho.dim, args.samples, args.eps, args.beta):
        print(line)
    if args.out:
        write_witness(args.out, res)
        print(f"witness written to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.witness == "builtin:ghz-biseparable":
        w, meta = ghz_biseparable_witness(), {"dims": [2, 2, 2], "structure": "m-sep:2", "objective": None}
    else:
        try:
            w, meta = read_witness(args.witness)
        except FormatError as exc:
            raise CliError(str(exc)) from None
    dims = tuple(int(d) for d in meta["dims"])
    text = args.structure or meta.get("structure")
    if not text:
        raise CliError("witness file records no structure; pass --structure")
    st = _structure(text, dims)
    for name in ("eps", "beta"):
        if not 0 < getattr(args, name) <= 1:
            raise CliError(f"--{name} must lie in (0, 1]")
    trials = args.trials if args.trials is not None else chernoff_sample_count(args.eps, args.beta)
    if trials <= 0:
        raise CliError("--trials must be positive")
    try:
        rep = empirical_violation(w, st, trials, RngStream(args.seed), eps=args.eps, beta=args.beta,
                                  tol=args.tol_feas)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(f"V_emp: {g6(rep.v_emp)}  violations: {rep.violations}/{rep.trials}"
          f"  lambda_min: {g6(rep.lambda_min_violated)}")
    print(f"[eps={g6(args.eps)} beta={g6(args.beta)} N={meta.get('N', 'n/a')} N_validation={trials}"
          f" structure={st.label()} stream={rep.stream}]")
    if args.out:
        row = {"partition": st.label(), "objective": meta.get("objective"), "V_emp": rep.v_emp,
               "lambda_min": rep.lambda_min_violated}
        if str(args.out).endswith(".csv"):
            with CsvSink(args.out, list(row)) as sink:
                sink.write(row)
        else:
            write_json(args.out, {**rep.to_dict(), **row})
    return EXIT_OK


def cmd_experiment(args) -> int:
    name = args.name
    default_samples = {"horodecki": [1200], "random-ppt": [100, 200, 300, 500, 700],
                       "shifts-upb": [2000], "ghz": [2000]}
    samples = args.samples or default_samples[name]
    if name != "random-ppt" and len(samples) != 1:
        raise CliError(f"{name} takes a single --samples value")
    if any(n < 0 for n in samples):
        raise CliError("--samples must be non-negative")
    try:
        grid = experiments.parse_grid(args.grid) if name == "horodecki" else []
        if any(not 0 <= a <= 1 for a in grid):
            raise ValueError("grid values must lie in [0, 1]")
        cfg = experiments.ExperimentConfig(
            experiment=name,
            seed=args.seed,
            samples=samples,
            trials=args.trials if args.trials is not None else 100_000,
            grid=grid,
            dims=args.dims or [[2, 2], [2, 3]],
            count=args.count,
            solver=experiments.SolverOptions(args.tol_feas, args.tol_gap, args.max_iter),
            threads=max(1, args.threads),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out or f"{name}.csv")
    manifest = experiments.run(cfg, out)
    print(f"wrote {out} and {out.name}.manifest.json ({len(manifest['rows'])} rows,"
          f" {g6(manifest['wall_time_total'])} s, backend {manifest['backend']})")
    if manifest["failures"]:
        print(f"{manifest['failures']} row(s) had solver failures", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_state_show(args) -> int:
    rho = load_state(args.name, args.dims)
    lam = eigvals_batch(rho.matrix[None], check=False)[0]
    rank = int(np.sum(lam > RANK_TOL))
    print(f"state: {args.name}")
    print(f"dims: {','.join(map(str, rho.dims))}  D: {rho.dim}")
    print(f"trace: {g6(np.trace(rho.matrix).real)}  rank: {rank}  min eigenvalue: {g6(lam[0])}"
          f"  purity: {g6(rho.purity())}")
    qualifier = "" if ppt_is_exact(rho.dims) else " (necessary-only)"
    for party in range(1, len(rho.dims) + 1):
        r = ppt_check(rho, party)
        print(f"PPT w.r.t. party {party}: {str(r.is_ppt).lower()}{qualifier}"
              f"  min eigenvalue of partial transpose: {g6(r.min_eig)}")
    if args.dump:
        with np.printoptions(precision=6, suppress=True, linewidth=160):
            print(rho.matrix)
    if args.out:
        write_state(args.out, rho)
        print(f"state written to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _report(exc, code, json_errors):
    if json_errors:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    json_errors = "--json-errors" in argv
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_INPUT
        if args.command == "find":
            return cmd_find(args)
        if args.command == "validate":
            return cmd_validate(args)
        if args.command == "experiment":
            return cmd_experiment(args)
        if args.command == "state" and args.state_command == "show":
            return cmd_state_show(args)
        raise CliError("missing command; try 'state show'")
    except CliError as exc:
        _report(exc, exc.code, json_errors)
        return exc.code
    except KeyboardInterrupt:
        print("interrupted; partial results flushed", file=sys.stderr)
        return EXIT_INTERRUPT


if __name__ == "__main__":
    sys.exit(main())
