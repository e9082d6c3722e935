"""Linear solvers for the shifted system of each inverse half-step.

Three methods are offered: Gaussian elimination with partial pivoting and
the two classical stationary iterations (Jacobi, Gauss-Seidel). All take a
:class:`SolveOptions` and return a :class:`SolveReport` whose residual is
recomputed from the returned solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import (
    ContractViolation,
    NonConvergenceError,
    SingularSystemError,
    UnusableSplittingError,
)
from .operators import ZERO_NORM, SymmetricOperator, _as_array, _as_operator

Method = Literal["direct-gauss", "jacobi", "gauss-seidel"]
METHODS = ("direct-gauss", "jacobi", "gauss-seidel")


@dataclass(frozen=True)
class SolveOptions:
    method: Method = "direct-gauss"
    tolerance: float = 1e-12
    max_sweeps: int = 10000
    pivot_threshold: float = 1e-12
    # iterative methods only: start from a rescaled previous iterate
    warm_start: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractViolation(f"unknown solver method {self.method!r}; expected one of {METHODS}")
        if not self.tolerance > 0:
            raise ContractViolation("tolerance must be positive")
        if self.max_sweeps < 1:
            raise ContractViolation("max_sweeps must be at least 1")
        if not self.pivot_threshold > 0:
            raise ContractViolation("pivot_threshold must be positive")


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: np.ndarray
    relative_residual: float
    sweeps_used: int = 0


def relative_residual(A, x, b) -> float:
    """``||A x - b|| / max(||b||, 1e-300)``."""
    A = _as_operator(A)
    b = _as_array(b)
    return float(np.linalg.norm(A.matrix @ x - b) / max(np.linalg.norm(b), ZERO_NORM))


def _prepare(A, b):
    A = _as_operator(A)
    b = np.array(_as_array(b), dtype=np.float64)
    if b.size != A.dim:
        raise ContractViolation(f"dimension mismatch: operator {A.dim}, right-hand side {b.size}")
    return A, b


def _report(A: SymmetricOperator, x: np.ndarray, b: np.ndarray, sweeps: int) -> SolveReport:
    x.flags.writeable = False
    return SolveReport(x, relative_residual(A, x, b), sweeps)


def solve_gauss(A, b, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Gaussian elimination with partial pivoting.

    A pivot smaller than ``opts.pivot_threshold * max|A_ij|`` raises
    :class:`SingularSystemError`; the system is rejected even if ``b``
    happens to lie in the range of ``A``.
    """
    A, b = _prepare(A, b)
    n = A.dim
    M = np.array(A.matrix)
    y = b.copy()
    scale = np.max(np.abs(M))
    threshold = opts.pivot_threshold * scale
    if scale == 0.0:
        raise SingularSystemError("zero matrix")

    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if abs(M[p, k]) < threshold:
            raise SingularSystemError(
                f"pivot {abs(M[p, k]):.3g} at column {k} is below {threshold:.3g}"
            )
        if p != k:
            M[[k, p]] = M[[p, k]]
            y[[k, p]] = y[[p, k]]
        factors = M[k + 1:, k] / M[k, k]
        M[k + 1:, k:] -= np.outer(factors, M[k, k:])
        y[k + 1:] -= factors * y[k]

    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (y[k] - M[k, k + 1:] @ x[k + 1:]) / M[k, k]
    return _report(A, x, b, 0)


def _diagonal(A: SymmetricOperator) -> np.ndarray:
    d = np.diag(A.matrix).copy()
    zero = np.flatnonzero(d == 0.0)
    if zero.size:
        raise UnusableSplittingError(f"zero diagonal entry at index {int(zero[0])}")
    return d


def _start(n: int, x0) -> np.ndarray:
    if x0 is None:
        return np.zeros(n)
    x = np.array(_as_array(x0), dtype=np.float64)
    if x.size != n:
        raise ContractViolation(f"initial guess has {x.size} components, expected {n}")
    return x


def _stationary(A, b, opts, x0, sweep, name) -> SolveReport:
    A, b = _prepare(A, b)
    d = _diagonal(A)
    x = _start(A.dim, x0)
    bnorm = max(np.linalg.norm(b), ZERO_NORM)
    res = np.linalg.norm(A.matrix @ x - b) / bnorm
    if res <= opts.tolerance:
        return _report(A, x, b, 0)
    for k in range(1, opts.max_sweeps + 1):
        x = sweep(A.matrix, d, b, x)
        res = np.linalg.norm(A.matrix @ x - b) / bnorm
        if res <= opts.tolerance:
            return _report(A, x, b, k)
        if not np.isfinite(res):
            raise NonConvergenceError(
                f"{name} diverged after {k} sweeps", last_iterate=x, relative_residual=res, sweeps=k
            )
    raise NonConvergenceError(
        f"{name} did not reach relative residual {opts.tolerance:.3g} in {opts.max_sweeps} sweeps "
        f"(last {res:.3g})",
        last_iterate=x,
        relative_residual=res,
        sweeps=opts.max_sweeps,
    )


def _jacobi_sweep(M, d, b, x):
    return x + (b - M @ x) / d


def _gauss_seidel_sweep(M, d, b, x):
    x = x.copy()
    for i in range(x.size):
        x[i] += (b[i] - M[i] @ x) / d[i]
    return x


def solve_jacobi(A, b, opts: SolveOptions = SolveOptions(), x0=None) -> SolveReport:
    """Classical Jacobi iteration, zero start unless ``x0`` is given."""
    return _stationary(A, b, opts, x0, _jacobi_sweep, "Jacobi")


def solve_gauss_seidel(A, b, opts: SolveOptions = SolveOptions(), x0=None) -> SolveReport:
    """Forward Gauss-Seidel sweeps, updating components in place."""
    return _stationary(A, b, opts, x0, _gauss_seidel_sweep, "Gauss-Seidel")


def solve(A, b, opts: SolveOptions = SolveOptions(), x0: Optional[np.ndarray] = None) -> SolveReport:
    """Dispatch on ``opts.method``; ``x0`` is ignored by the direct method."""
    if opts.method == "direct-gauss":
        return solve_gauss(A, b, opts)
    if opts.method == "jacobi":
        return solve_jacobi(A, b, opts, x0)
    return solve_gauss_seidel(A, b, opts, x0)
