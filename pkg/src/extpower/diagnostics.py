"""Limit prediction, pseudo-convergence detection and work accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, SingularShiftError
from .iteration import IterationTrace
from .spectra import SpectrumSpec

SINGULAR_SHIFT_TOLERANCE = 1e-12
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ConvergencePrediction:
    """Which simultaneous eigenstate the extended iteration should end on.

    Indices are zero-based positions in the spectrum's pair list. Exact ties
    are not resolved: ``tied_indices`` then has more than one entry and
    ``rate_ratio`` is 1.
    """

    winner_index: int
    factors: tuple
    rate_ratio: float
    tied_indices: tuple = ()

    @property
    def degenerate(self) -> bool:
        return len(self.tied_indices) > 1


def predict_limit(spec: SpectrumSpec, mu: float) -> ConvergencePrediction:
    """Rank states by the per-step factor ``|e_i / (s_i - mu)|``.

    Each extended step multiplies the coefficient of state ``i`` by
    ``(s - mu) e_i / (s_i - mu)``; the common ``(s - mu)`` cannot change the
    ranking, so it is left out. ``rate_ratio`` is runner-up over winner and
    is the asymptotic contraction of the losing coefficients per step.
    """
    e, s = spec.e_values, spec.s_values
    gaps = s - mu
    hit = np.flatnonzero(np.abs(gaps) <= SINGULAR_SHIFT_TOLERANCE)
    if hit.size:
        raise SingularShiftError(f"shift {mu!r} coincides with s_{int(hit[0])} = {s[hit[0]]!r}")
    factors = np.abs(e / gaps)
    top = float(np.max(factors))
    tied = tuple(int(i) for i in np.flatnonzero(factors >= top * (1 - TIE_TOLERANCE)))
    winner = tied[0]
    if len(tied) > 1:
        ratio = 1.0
    elif factors.size == 1 or top == 0.0:
        ratio = 0.0
    else:
        ratio = float(np.max(np.delete(factors, winner)) / top)
    return ConvergencePrediction(winner, tuple(float(f) for f in factors), ratio, tied)


@dataclass(frozen=True)
class PseudoConvergenceReport:
    flagged_windows: tuple  # (start_step, end_step) pairs, full-step indices
    window: int
    value_eps: float
    residual_floor: float

    @property
    def criterion(self) -> tuple:
        return self.window, self.value_eps, self.residual_floor

    def __bool__(self):
        return bool(self.flagged_windows)


def _scanned_records(trace: IterationTrace):
    if trace.method == "extended":
        return [trace.initial] + [r for r in trace.records if r.phase == "power"]
    return list(trace.all_records)


def detect_pseudo_convergence(trace: IterationTrace, window: int = 5, value_eps: float = 1e-3,
                              residual_floor: float = 1e-2) -> PseudoConvergenceReport:
    """Find stretches where ``<H>`` stalls although the residual stays large.

    A window of ``window`` consecutive records is flagged when the spread
    (max - min) of its eigenvalue estimates is at most ``value_eps`` and every
    ``h_residual`` in it is at least ``residual_floor``. Overlapping flagged
    windows are merged. For extended traces only the start record and the
    power halves are scanned.
    """
    if window < 2:
        raise ContractViolation("window must be at least 2")
    recs = _scanned_records(trace)
    values = np.array([r.e_estimate for r in recs])
    residuals = np.array([r.h_residual for r in recs])
    steps = [r.full_step_index for r in recs]

    spans = []
    for i in range(len(recs) - window + 1):
        vals = values[i:i + window]
        if vals.max() - vals.min() <= value_eps and residuals[i:i + window].min() >= residual_floor:
            if spans and i <= spans[-1][1]:
                spans[-1][1] = i + window - 1
            else:
                spans.append([i, i + window - 1])
    flagged = tuple((steps[a], steps[b]) for a, b in spans)
    return PseudoConvergenceReport(flagged, window, value_eps, residual_floor)


def cost_summary(trace: IterationTrace) -> tuple[int, int, int]:
    """``(matvecs, solves, full_steps)`` taken from the last record."""
    last = trace.final
    return last.matvec_count, last.solve_count, last.full_step_index
