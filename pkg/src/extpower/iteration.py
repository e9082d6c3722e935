"""Iteration schemes and their run loops.

Four schemes share one trace format:

* :func:`power_run` - plain power method on ``H``;
* :func:`inverse_run` - inverse iteration with a fixed spectral shift;
* :func:`rr2x2_run` - Rayleigh-Ritz on ``span{v, Hv}`` (steepest descent);
* :func:`extended_run` - the coupled scheme for a commuting pair ``(H, S)``:
  multiply by ``H``, then solve ``(S - mu E) x = (s - mu) H v`` and normalize.
  The iteration settles on the simultaneous eigenvector whose factor
  ``|e_i / (s_i - mu)|`` is largest; choosing ``mu`` close to a wanted
  eigenvalue ``s`` of ``S`` steers it there.

Every run returns an :class:`IterationTrace`. The start vector is kept as
``trace.initial``; ``trace.records`` hold one record per step, or two per
full step for the extended scheme (a ``power`` half followed by an
``inverse`` half). Reported eigenvalue estimates are Rayleigh quotients; the
normalization constants of each half-step are kept in ``growth``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .errors import (
    ContractViolation,
    NonConvergenceError,
    SingularSystemError,
    ZeroVectorError,
)
from .linsolve import SolveOptions, solve
from .operators import (
    CommutingPair,
    StateVector,
    SymmetricOperator,
    _as_operator,
    all_ones,
    apply,
    normalize,
    shifted,
)

Phase = Literal["start", "power", "inverse", "rr2x2"]
Termination = Literal[
    "converged", "converged-elsewhere", "max-steps", "collapse", "singular-shift", "solver-failure"
]

# a Krylov residual this small relative to |Hv| means v is already an eigenvector
_RITZ_FIXED_POINT = 1e-14


@dataclass(frozen=True)
class IterationConfig:
    """Run parameters shared by all schemes.

    ``preselected_s`` is only needed by the extended scheme, ``shift_mu`` by
    the extended and inverse schemes. ``start`` defaults to the normalized
    all-ones vector.
    """

    preselected_s: Optional[float] = None
    shift_mu: float = 0.0
    residual_tolerance: float = 1e-10
    max_full_steps: int = 10000
    solve_options: SolveOptions = field(default_factory=SolveOptions)
    start: Optional[StateVector] = None
    ritz_mode: Literal["lower", "upper"] = "lower"

    def __post_init__(self):
        if not self.residual_tolerance > 0:
            raise ContractViolation("residual_tolerance must be positive")
        if self.max_full_steps < 0:
            raise ContractViolation("max_full_steps must be nonnegative")
        if self.preselected_s is not None and self.preselected_s - self.shift_mu == 0:
            raise ContractViolation("preselected_s and shift_mu must differ (factor s - mu is zero)")
        if self.ritz_mode not in ("lower", "upper"):
            raise ContractViolation(f"ritz_mode must be 'lower' or 'upper', got {self.ritz_mode!r}")
        if self.start is not None:
            start = self.start if isinstance(self.start, StateVector) else StateVector(self.start)
            if not start.is_normalized:
                start = normalize(start)[0]
            object.__setattr__(self, "start", start)

    def start_vector(self, dim: int) -> StateVector:
        if self.start is None:
            return all_ones(dim)
        if self.start.dim != dim:
            raise ContractViolation(f"start vector has {self.start.dim} components, expected {dim}")
        return self.start


@dataclass(frozen=True, eq=False)
class StepRecord:
    full_step_index: int
    phase: Phase
    state: StateVector
    e_estimate: float
    s_estimate: float
    h_residual: float
    s_residual: float
    p2n: float
    matvec_count: int
    solve_count: int
    # normalization constant of this half-step (|Hv| or |x|); nan for the start
    growth: float = math.nan
    # relative residual of the linear solve behind an inverse half; nan otherwise
    solve_residual: float = math.nan


@dataclass(frozen=True, eq=False)
class IterationTrace:
    method: str
    initial: StepRecord
    records: tuple
    termination: Termination
    preselected_s: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    @property
    def final(self) -> StepRecord:
        return self.records[-1] if self.records else self.initial

    @property
    def all_records(self) -> tuple:
        return (self.initial,) + tuple(self.records)

    @property
    def full_steps(self) -> int:
        return self.final.full_step_index

    @property
    def state(self) -> StateVector:
        return self.final.state

    def states(self, phase: Optional[str] = None) -> list:
        return [r.state for r in self.records if phase is None or r.phase == phase]


def observe(H, S, v: StateVector, index: int, phase: Phase, matvecs: int, solves: int,
            growth: float = math.nan, solve_residual: float = math.nan) -> StepRecord:
    """Build a record for state ``v``: Rayleigh quotients, residuals and ``|Hv|``."""
    x = v.components
    Hv = H.matrix @ x
    e = float(x @ Hv)
    h_res = float(np.linalg.norm(Hv - e * x))
    if S is not None:
        Sv = S.matrix @ x
        s = float(x @ Sv)
        s_res = float(np.linalg.norm(Sv - s * x))
    else:
        s = s_res = math.nan
    return StepRecord(index, phase, v, e, s, h_res, s_res, float(np.linalg.norm(Hv)),
                      matvecs, solves, growth, solve_residual)


# --- single steps -----------------------------------------------------------

def power_step(H, v) -> tuple[float, StateVector]:
    """One power-method step: ``v -> Hv / |Hv|``; returns ``(|Hv|, v_next)``.

    Raises ZeroVectorError when ``v`` lies in the null space of ``H``.
    """
    v_next, e_n = normalize(apply(H, v))
    return e_n, v_next


def inverse_step(A, mu: float, v, opts: SolveOptions = SolveOptions()) -> tuple[float, StateVector]:
    """One shifted inverse-iteration step.

    Solves ``(A - mu E) x = v`` and returns ``(|x|, x / |x|)``. Near
    convergence ``|x|`` approaches ``1 / |a - mu|`` for the eigenvalue ``a``
    closest to the shift.
    """
    x = solve(shifted(A, mu), v, opts).solution
    v_next, growth = normalize(x)
    return growth, v_next


def rr2x2_step(H, v, mode: str = "lower") -> tuple[float, StateVector]:
    """Rayleigh-Ritz on the two-dimensional Krylov space ``span{v, Hv}``.

    Returns the lower (or upper, with ``mode="upper"``) Ritz value and its
    normalized Ritz vector. If ``Hv`` is parallel to ``v`` the input is
    returned unchanged with its Rayleigh quotient.
    """
    H = _as_operator(H)
    x = v.components if isinstance(v, StateVector) else normalize(v)[0].components
    w = apply(H, x)
    wnorm = np.linalg.norm(w)
    normalize(w)  # collapse check
    alpha = float(x @ w)
    r = w - alpha * x
    r -= (x @ r) * x
    rnorm = float(np.linalg.norm(r))
    if rnorm <= _RITZ_FIXED_POINT * wnorm:
        return alpha, StateVector(x)
    q = r / rnorm
    beta = float(q @ (H.matrix @ q))
    values, vectors = np.linalg.eigh(np.array([[alpha, rnorm], [rnorm, beta]]))
    k = 0 if mode == "lower" else 1
    y = vectors[:, k]
    return float(values[k]), normalize(y[0] * x + y[1] * q)[0]


def _extended_halves(H, S, A, s: float, mu: float, v: StateVector, opts: SolveOptions,
                     index: int, matvecs: int, solves: int):
    w = H.matrix @ v.components
    u, wnorm = normalize(w)
    matvecs += 1
    power_rec = observe(H, S, u, index, "power", matvecs, solves, growth=wnorm)

    rhs = (s - mu) * w
    x0 = None
    if opts.warm_start and opts.method != "direct-gauss":
        Av = A.matrix @ v.components
        denom = float(v.components @ Av)
        if denom != 0.0:
            x0 = v.components * (float(v.components @ rhs) / denom)
    report = solve(A, rhs, opts, x0)
    v_next, xnorm = normalize(report.solution)
    matvecs += report.sweeps_used
    solves += 1
    inverse_rec = observe(H, S, v_next, index, "inverse", matvecs, solves,
                          growth=xnorm, solve_residual=report.relative_residual)
    return v_next, (power_rec, inverse_rec)


def _require_s(config: IterationConfig) -> float:
    if config.preselected_s is None:
        raise ContractViolation("the extended scheme needs config.preselected_s")
    return float(config.preselected_s)


def extended_step(pair: CommutingPair, config: IterationConfig, v, full_step_index: int = 1,
                  matvec_count: int = 0, solve_count: int = 0) -> tuple[StateVector, tuple]:
    """One full step of the extended power method.

    Power half: ``w = H v``. Inverse half: solve ``(S - mu E) x = (s - mu) w``
    with ``config.solve_options`` and normalize ``x``. Both halves are
    returned as records; counts continue from ``matvec_count``/``solve_count``.
    """
    s = _require_s(config)
    v = v if isinstance(v, StateVector) else StateVector(v)
    if not v.is_normalized:
        raise ContractViolation(f"extended_step needs a normalized state (norm {v.norm:.12g})")
    A = shifted(pair.S, config.shift_mu)
    return _extended_halves(pair.H, pair.S, A, s, config.shift_mu, v, config.solve_options,
                            full_step_index, matvec_count, solve_count)


# --- run loops --------------------------------------------------------------

_FAILURES = (
    (ZeroVectorError, "collapse"),
    (SingularSystemError, "singular-shift"),
    (NonConvergenceError, "solver-failure"),
)


def _loop(method: str, H: SymmetricOperator, S: Optional[SymmetricOperator], config: IterationConfig,
          step: Callable, check: Callable[[StepRecord], Optional[str]],
          preselected_s: Optional[float] = None) -> IterationTrace:
    """Drive ``step`` until ``check`` names a termination or steps run out.

    ``step(v, k, matvecs, solves)`` returns ``(v_next, records)``. Failures
    raised inside a step propagate with the partial trace attached as
    ``exc.trace``.
    """
    v = config.start_vector(H.dim)
    initial = observe(H, S, v, 0, "start", 0, 0)
    records: list = []

    def trace(termination):
        return IterationTrace(method, initial, tuple(records), termination, preselected_s)

    verdict = check(initial)
    if verdict is not None:
        return trace(verdict)
    matvecs = solves = 0
    for k in range(1, config.max_full_steps + 1):
        try:
            v, new = step(v, k, matvecs, solves)
        except Exception as exc:
            for kind, termination in _FAILURES:
                if isinstance(exc, kind):
                    exc.trace = trace(termination)
                    break
            raise
        records.extend(new)
        last = new[-1]
        matvecs, solves = last.matvec_count, last.solve_count
        verdict = check(last)
        if verdict is not None:
            return trace(verdict)
    return trace("max-steps")


def _h_converged(tol: float):
    return lambda rec: "converged" if rec.h_residual <= tol else None


def power_run(H, config: IterationConfig = IterationConfig(), S=None) -> IterationTrace:
    """Iterate :func:`power_step` until ``|Hv - <H>v| <= tol``.

    ``S`` is optional and only used to fill the ``s_*`` fields of records.
    """
    H = _as_operator(H)
    S = None if S is None else _as_operator(S)

    def step(v, k, matvecs, solves):
        growth, v_next = power_step(H, v)
        return v_next, [observe(H, S, v_next, k, "power", matvecs + 1, solves, growth=growth)]

    return _loop("power", H, S, config, step, _h_converged(config.residual_tolerance))


def inverse_run(A, config: IterationConfig = IterationConfig(), S=None) -> IterationTrace:
    """Shifted inverse iteration on ``A`` with shift ``config.shift_mu``.

    Records report Rayleigh quotients of ``A`` in the ``e_*`` fields.
    """
    A = _as_operator(A)
    S = None if S is None else _as_operator(S)
    mu = config.shift_mu
    M = shifted(A, mu)
    opts = config.solve_options

    def step(v, k, matvecs, solves):
        report = solve(M, v.components, opts)
        v_next, growth = normalize(report.solution)
        rec = observe(A, S, v_next, k, "inverse", matvecs + report.sweeps_used, solves + 1,
                      growth=growth, solve_residual=report.relative_residual)
        return v_next, [rec]

    return _loop("inverse", A, S, config, step, _h_converged(config.residual_tolerance))


def rr2x2_run(H, config: IterationConfig = IterationConfig(), S=None) -> IterationTrace:
    """Repeat :func:`rr2x2_step`; each step costs two products with ``H``."""
    H = _as_operator(H)
    S = None if S is None else _as_operator(S)

    def step(v, k, matvecs, solves):
        value, v_next = rr2x2_step(H, v, config.ritz_mode)
        return v_next, [observe(H, S, v_next, k, "rr2x2", matvecs + 2, solves, growth=value)]

    return _loop("rr2x2", H, S, config, step, _h_converged(config.residual_tolerance))


def extended_run(pair: CommutingPair, config: IterationConfig) -> IterationTrace:
    """Iterate :func:`extended_step` towards the eigenpair with ``S``-eigenvalue ``s``.

    Stops with ``converged`` once ``max(|Hv - <H>v|, |Sv - s v|) <= tol``.
    If both operators are converged on some other simultaneous eigenvector
    (its ``<S>`` more than ``100 * tol`` away from ``s``) the trace ends with
    ``converged-elsewhere``. Running out of steps gives ``max-steps``.
    """
    s = _require_s(config)
    H, S = pair.H, pair.S
    mu = config.shift_mu
    tol = config.residual_tolerance
    A = shifted(S, mu)
    opts = config.solve_options

    def step(v, k, matvecs, solves):
        return _extended_halves(H, S, A, s, mu, v, opts, k, matvecs, solves)

    def check(rec: StepRecord):
        x = rec.state.components
        s_pre_residual = float(np.linalg.norm(S.matrix @ x - s * x))
        if max(rec.h_residual, s_pre_residual) <= tol:
            return "converged"
        if rec.h_residual <= tol and rec.s_residual <= tol and abs(rec.s_estimate - s) > 100 * tol:
            return "converged-elsewhere"
        return None

    return _loop("extended", H, S, config, step, check, preselected_s=s)
