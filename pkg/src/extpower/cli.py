"""Command line front end.

    extpower run <problem.json> [--out trace.csv]
    extpower predict <problem.json> --mu <shift>
    extpower reproduce {table1,table3,fig1,fig2} [--out file.csv]
    extpower oracle <problem.json>

Problem documents are JSON objects. A problem gives either a spectrum
(``pairs`` of ``[e, s]``, optional ``rotation_seed``) or explicit matrices
(``matrix_h`` and, for the extended method, ``matrix_s``), plus ``method``
and its parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .diagnostics import cost_summary, predict_limit
from .errors import ContractViolation, ExtPowerError, ProblemError
from .iteration import IterationConfig, IterationTrace, extended_run, inverse_run, power_run, rr2x2_run
from .linsolve import METHODS as SOLVERS
from .linsolve import SolveOptions
from .operators import CommutingPair, SymmetricOperator, commutator_norm
from .reproduce import REPRODUCTIONS
from .spectra import SpectrumSpec, build_commuting_pair, jacobi_eigensolve, simultaneous_eigenpairs

METHODS = ("power", "inverse", "rr2x2", "extended")
KEYS = {
    "dim", "pairs", "rotation_seed", "matrix_h", "matrix_s", "method", "preselected_s", "shift_mu",
    "tolerance", "max_steps", "solver", "start", "commutator_tolerance",
}
TRACE_COLUMNS = ("full_step", "phase", "e_estimate", "s_estimate", "h_residual", "s_residual",
                 "p2n", "matvecs", "solves")


@dataclass(frozen=True, eq=False)
class ProblemDocument:
    method: str
    config: IterationConfig
    H: SymmetricOperator
    S: Optional[SymmetricOperator] = None
    spectrum: Optional[SpectrumSpec] = None

    @property
    def dim(self) -> int:
        return self.H.dim

    @property
    def pair(self) -> CommutingPair:
        if self.S is None:
            raise ProblemError("this problem has no S operator")
        return CommutingPair(self.H, self.S, commutator_tolerance=math.inf)


def _number(doc, key, default=None, required=False):
    if key not in doc:
        if required:
            raise ProblemError(f"missing required field {key!r}")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemError(f"field {key!r} must be a number")
    return value


def _matrix(doc, key, dim):
    rows = doc[key]
    try:
        a = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError):
        raise ProblemError(f"field {key!r} must be a list of numeric rows") from None
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ProblemError(f"field {key!r} must be a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ProblemError(f"field {key!r} has dimension {a.shape[0]}, but dim is {dim}")
    try:
        return SymmetricOperator(a)
    except ContractViolation as exc:
        raise ProblemError(f"field {key!r}: {exc}") from None


def parse_problem(text: str) -> ProblemDocument:
    """Validate a JSON problem document and apply defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ProblemError("problem document must be a JSON object")
    unknown = sorted(set(doc) - KEYS)
    if unknown:
        raise ProblemError(f"unknown field(s): {', '.join(unknown)}")

    method = doc.get("method")
    if method is None:
        raise ProblemError("missing required field 'method'")
    if method not in METHODS:
        raise ProblemError(f"field 'method' must be one of {METHODS}, got {method!r}")

    dim = _number(doc, "dim")
    if dim is not None and (not isinstance(dim, int) or dim < 1):
        raise ProblemError("field 'dim' must be a positive integer")

    has_spectrum = "pairs" in doc
    has_matrices = "matrix_h" in doc or "matrix_s" in doc
    if has_spectrum == has_matrices:
        raise ProblemError("give exactly one of 'pairs' or explicit matrices ('matrix_h'/'matrix_s')")

    spectrum = None
    if has_spectrum:
        pairs = doc["pairs"]
        if (not isinstance(pairs, list) or not pairs
                or not all(isinstance(p, list) and len(p) == 2 for p in pairs)):
            raise ProblemError("field 'pairs' must be a non-empty list of [e, s] pairs")
        seed = doc.get("rotation_seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise ProblemError("field 'rotation_seed' must be an integer or null")
        if "commutator_tolerance" in doc:
            raise ProblemError("field 'commutator_tolerance' only applies to explicit matrices")
        try:
            spectrum = SpectrumSpec(tuple(tuple(p) for p in pairs), seed)
        except (TypeError, ValueError) as exc:
            raise ProblemError(f"field 'pairs': {exc}") from None
        if dim is not None and spectrum.dim != dim:
            raise ProblemError(f"'pairs' has {spectrum.dim} entries, but dim is {dim}")
        pair, _ = build_commuting_pair(spectrum)
        H, S = pair.H, pair.S
    else:
        if "matrix_h" not in doc:
            raise ProblemError("missing required field 'matrix_h'")
        H = _matrix(doc, "matrix_h", dim)
        S = _matrix(doc, "matrix_s", H.dim) if "matrix_s" in doc else None
        if S is not None:
            tol = _number(doc, "commutator_tolerance", 1e-10)
            measured = commutator_norm(H, S)
            if measured > tol:
                raise ProblemError(f"H and S do not commute: commutator norm {measured:.6g} exceeds {tol:g}")

    s = _number(doc, "preselected_s")
    mu = _number(doc, "shift_mu")
    if method == "extended":
        if S is None:
            raise ProblemError("method 'extended' needs 'matrix_s' (or a spectrum)")
        if s is None:
            raise ProblemError("method 'extended' requires field 'preselected_s'")
        if mu is None:
            raise ProblemError("method 'extended' requires field 'shift_mu'")
        if s - mu == 0:
            raise ProblemError("'preselected_s' and 'shift_mu' must differ")

    solver = doc.get("solver", "direct-gauss")
    if solver not in SOLVERS:
        raise ProblemError(f"field 'solver' must be one of {SOLVERS}, got {solver!r}")
    tolerance = _number(doc, "tolerance", 1e-10)
    if not tolerance > 0:
        raise ProblemError("field 'tolerance' must be positive")
    max_steps = _number(doc, "max_steps", 10000)
    if not isinstance(max_steps, int) or max_steps < 0:
        raise ProblemError("field 'max_steps' must be a nonnegative integer")

    start = doc.get("start")
    if start is not None:
        try:
            start = np.array(start, dtype=np.float64)
        except (TypeError, ValueError):
            raise ProblemError("field 'start' must be a list of numbers") from None
        if start.shape != (H.dim,):
            raise ProblemError(f"field 'start' must have {H.dim} components")

    try:
        config = IterationConfig(
            preselected_s=s if method == "extended" else None,
            shift_mu=0.0 if mu is None else float(mu),
            residual_tolerance=float(tolerance),
            max_full_steps=max_steps,
            solve_options=SolveOptions(method=solver),
            start=start,
        )
    except ExtPowerError as exc:
        raise ProblemError(str(exc)) from None
    return ProblemDocument(method, config, H, S, spectrum)


def run_problem(problem: ProblemDocument) -> IterationTrace:
    if problem.method == "extended":
        return extended_run(problem.pair, problem.config)
    runner = {"power": power_run, "inverse": inverse_run, "rr2x2": rr2x2_run}[problem.method]
    return runner(problem.H, problem.config, problem.S)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])


def trace_rows(trace: IterationTrace):
    for r in trace.all_records:
        yield (r.full_step_index, r.phase, r.e_estimate, r.s_estimate, r.h_residual, r.s_residual,
               r.p2n, r.matvec_count, r.solve_count)


def trace_csv(trace: IterationTrace) -> str:
    buf = io.StringIO()
    write_csv(buf, TRACE_COLUMNS, trace_rows(trace))
    return buf.getvalue()


def _summary(trace: IterationTrace, out) -> None:
    matvecs, solves, steps = cost_summary(trace)
    rec = trace.final
    print(f"method       {trace.method}", file=out)
    print(f"termination  {trace.termination}", file=out)
    print(f"full steps   {steps}", file=out)
    print(f"e_estimate   {_fmt(rec.e_estimate)}", file=out)
    print(f"s_estimate   {_fmt(rec.s_estimate)}", file=out)
    print(f"h_residual   {rec.h_residual:.3e}", file=out)
    print(f"matvecs      {matvecs}", file=out)
    print(f"solves       {solves}", file=out)


def _read_problem(path: str) -> ProblemDocument:
    return parse_problem(Path(path).read_text())


def cmd_run(args, out) -> int:
    problem = _read_problem(args.problem)
    target = Path(args.out) if args.out else Path(args.problem).with_suffix(".trace.csv")
    try:
        trace = run_problem(problem)
    except ExtPowerError as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None:
            target.write_text(trace_csv(partial))
        raise
    target.write_text(trace_csv(trace))
    _summary(trace, out)
    print(f"trace        {target}", file=out)
    return 0


def _spectrum_of(problem: ProblemDocument) -> SpectrumSpec:
    if problem.spectrum is not None:
        return problem.spectrum
    if problem.S is None:
        raise ProblemError("prediction needs S: give 'matrix_s' or a spectrum")
    pairs = [(e, s) for e, s, _ in simultaneous_eigenpairs(problem.pair)]
    return SpectrumSpec(tuple(pairs))


def cmd_predict(args, out) -> int:
    spec = _spectrum_of(_read_problem(args.problem))
    pred = predict_limit(spec, args.mu)
    print(f"{'state':>6} {'e':>12} {'s':>12} {'|e/(s-mu)|':>14}", file=out)
    for i, ((e, s), f) in enumerate(zip(spec.pairs, pred.factors)):
        mark = "  <- winner" if i in pred.tied_indices else ""
        print(f"{i + 1:>6} {e:>12.6g} {s:>12.6g} {f:>14.6g}{mark}", file=out)
    if pred.degenerate:
        print("winner: tie between states " + ", ".join(str(i + 1) for i in pred.tied_indices), file=out)
    else:
        print(f"winner: state {pred.winner_index + 1}", file=out)
    print(f"rate ratio: {pred.rate_ratio:.6g}", file=out)
    return 0


def cmd_reproduce(args, out) -> int:
    rep = REPRODUCTIONS[args.artifact]()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(fh, rep.header, rep.rows)
    if rep.name == "table1" or rep.name == "table3":
        write_csv(out, rep.header, rep.rows)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}", file=out)
    print(f"{rep.name}: {'all checks passed' if rep.passed else 'CHECKS FAILED'}", file=out)
    return 0 if rep.passed else 1


def cmd_oracle(args, out) -> int:
    problem = _read_problem(args.problem)
    if problem.S is None:
        dec = jacobi_eigensolve(problem.H)
        print(f"jacobi sweeps {dec.sweeps}, residual {dec.residual:.3e}", file=out)
        for lam, v in zip(dec.eigenvalues, dec.eigenvectors.T):
            print(f"e={_fmt(float(lam))}  v=" + " ".join(_fmt(float(x)) for x in v), file=out)
        return 0
    for e, s, v in simultaneous_eigenpairs(problem.pair):
        print(f"e={_fmt(e)}  s={_fmt(s)}  v=" + " ".join(_fmt(float(x)) for x in v), file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extpower", description="Extended power method toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the problem's method and write a trace CSV")
    p.add_argument("problem")
    p.add_argument("--out", help="trace CSV path (default: <problem>.trace.csv)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("predict", help="rank limit states for a shift")
    p.add_argument("problem")
    p.add_argument("--mu", type=float, required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("reproduce", help="regenerate a published table or curve set")
    p.add_argument("artifact", choices=sorted(REPRODUCTIONS))
    p.add_argument("--out", help="write the table/curves as CSV")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("oracle", help="dump the reference eigendecomposition")
    p.add_argument("problem")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ExtPowerError, OSError) as exc:
        print(f"extpower: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
