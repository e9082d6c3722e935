"""Commuting-pair problems built from declared spectra, plus a reference eigensolver.

A :class:`SpectrumSpec` lists simultaneous eigenvalue pairs ``(e_i, s_i)``.
:func:`build_commuting_pair` turns it into ``H = Q diag(e) Q^T`` and
``S = Q diag(s) Q^T`` with a shared orthonormal basis ``Q`` (the identity
unless a rotation seed is given). :func:`jacobi_eigensolve` is a cyclic
Jacobi-rotation eigensolver used as an oracle that shares no code with the
iteration schemes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation, OracleFailure
from .operators import CommutingPair, SymmetricOperator, _as_operator

JACOBI_MAX_SWEEPS = 100
JACOBI_OFFDIAG_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpectrumSpec:
    pairs: tuple
    rotation_seed: Optional[int] = None

    def __post_init__(self):
        pairs = tuple((float(e), float(s)) for e, s in self.pairs)
        if not pairs:
            raise ContractViolation("a spectrum needs at least one (e, s) pair")
        object.__setattr__(self, "pairs", pairs)

    @property
    def dim(self) -> int:
        return len(self.pairs)

    @property
    def e_values(self) -> np.ndarray:
        return np.array([e for e, _ in self.pairs])

    @property
    def s_values(self) -> np.ndarray:
        return np.array([s for _, s in self.pairs])


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    residual: float
    sweeps: int = 0


def random_orthogonal(n: int, seed: int) -> np.ndarray:
    """Seeded random orthogonal matrix.

    Draws a standard-normal ``n x n`` matrix from numpy's PCG64 generator
    (``numpy.random.default_rng(seed)``) and orthonormalizes it by QR, fixing
    column signs so that ``R`` has a positive diagonal.
    """
    if n < 1:
        raise ContractViolation("n must be positive")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def build_commuting_pair(spec: SpectrumSpec) -> tuple[CommutingPair, np.ndarray]:
    """Return the pair ``(H, S)`` realizing ``spec`` and the basis ``Q`` used."""
    n = spec.dim
    Q = np.eye(n) if spec.rotation_seed is None else random_orthogonal(n, spec.rotation_seed)
    H = (Q * spec.e_values) @ Q.T
    S = (Q * spec.s_values) @ Q.T
    return CommutingPair(SymmetricOperator(H), SymmetricOperator(S)), Q


def jacobi_eigensolve(A) -> EigenDecomposition:
    """Full eigendecomposition by cyclic Jacobi rotations.

    Sweeps over all off-diagonal positions until the off-diagonal Frobenius
    norm drops to ``1e-12 * |A|_F``. Eigenvalues are returned ascending with
    matching eigenvector columns.

    Raises
    ------
    OracleFailure
        When 100 sweeps do not reach the target, or the final decomposition
        misses ``|A V - V diag(lam)|_F <= 1e-9 |A|_F``.
    """
    A = _as_operator(A)
    n = A.dim
    M = np.array(A.matrix)
    V = np.eye(n)
    scale = np.linalg.norm(M)
    target = JACOBI_OFFDIAG_TOLERANCE * scale

    def off(M):
        return np.linalg.norm(M - np.diag(np.diag(M)))

    sweeps = 0
    while off(M) > target:
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise OracleFailure(f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if apq == 0.0:
                    continue
                theta = (M[q, q] - M[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # M <- J^T M J with J the (p, q) rotation
                mp, mq = M[:, p].copy(), M[:, q].copy()
                M[:, p] = c * mp - s * mq
                M[:, q] = s * mp + c * mq
                mp, mq = M[p, :].copy(), M[q, :].copy()
                M[p, :] = c * mp - s * mq
                M[q, :] = s * mp + c * mq
                M[p, q] = M[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    lam = np.diag(M).copy()
    order = np.argsort(lam, kind="stable")
    lam, V = lam[order], V[:, order]
    residual = float(np.linalg.norm(A.matrix @ V - V * lam))
    if residual > 1e-9 * max(scale, np.finfo(float).tiny):
        raise OracleFailure(f"Jacobi eigensolver residual {residual:.3g} too large")
    return EigenDecomposition(lam, V, residual, sweeps)


def simultaneous_eigenpairs(pair: CommutingPair, cluster_tolerance: float = 1e-8):
    """Oracle list of simultaneous eigenpairs ``(e, s, vector)`` of a commuting pair.

    Diagonalizes ``H`` by Jacobi rotations; inside every cluster of
    ``H``-eigenvalues closer than ``cluster_tolerance * max(1, |H|)`` the
    restriction of ``S`` is diagonalized as well, which fixes a basis of the
    degenerate subspace.
    """
    dec = jacobi_eigensolve(pair.H)
    lam, V = dec.eigenvalues, dec.eigenvectors
    gap = cluster_tolerance * max(1.0, float(np.max(np.abs(lam))))
    out = []
    start = 0
    n = lam.size
    while start < n:
        stop = start + 1
        while stop < n and lam[stop] - lam[stop - 1] <= gap:
            stop += 1
        block = V[:, start:stop]
        if stop - start == 1:
            v = block[:, 0]
            out.append((float(lam[start]), float(v @ pair.S.matrix @ v), v))
        else:
            sub = jacobi_eigensolve(SymmetricOperator(block.T @ pair.S.matrix @ block))
            for k in range(stop - start):
                v = block @ sub.eigenvectors[:, k]
                v = v / np.linalg.norm(v)
                out.append((float(v @ pair.H.matrix @ v), float(sub.eigenvalues[k]), v))
        start = stop
    return out


# --- built-in fixtures -----------------------------------------------------

TABLE1_PAIRS = ((1.0, 1.5), (2.0, 1.0), (3.0, 0.5))

# state number (1-based) -> (e, s); the remaining states are interpolated
TABLE2_ANCHORS = {
    1: (3.4, 0.3),
    5: (1.0, 1.5),
    6: (-0.1, 1.8),
    7: (-0.2, 1.9),
    8: (-2.0, 2.0),
    11: (-3.8, 2.9),
    15: (-5.4, 4.1),
}


def table1_fixture() -> SpectrumSpec:
    """Three-state diagonal example: ``H = diag(1, 2, 3)``, ``S = diag(1.5, 1, 0.5)``."""
    return SpectrumSpec(TABLE1_PAIRS)


def table2_fixture(rotation_seed: Optional[int] = None) -> SpectrumSpec:
    """Fifteen-state example.

    Only states 1, 5, 6, 7, 8, 11 and 15 have published eigenvalues; the
    others are filled by linear interpolation between the flanking anchors,
    which keeps ``s`` increasing and ``e`` decreasing.
    """
    known = sorted(TABLE2_ANCHORS)
    idx = np.arange(1, 16)
    e = np.interp(idx, known, [TABLE2_ANCHORS[k][0] for k in known])
    s = np.interp(idx, known, [TABLE2_ANCHORS[k][1] for k in known])
    # round away interpolation noise so fixture values are exact decimals
    return SpectrumSpec(tuple(zip(np.round(e, 12), np.round(s, 12))), rotation_seed)


# Pseudo-convergence fixture: the fifteen-state example with its two highest
# H-eigenvalues pushed close together, so a start vector loaded on them
# produces a long plateau of the power method.
FIG1_TOP_PAIRS = ((4.0, 0.3), (3.97, 0.6))
FIG1_START_WEIGHT = 1e6


def fig1_fixture() -> tuple[SpectrumSpec, np.ndarray]:
    """Pseudo-convergence fixture and its (unnormalized) start vector.

    The start vector has weight ``1e6`` on the two near-degenerate top
    states and ``1`` elsewhere.
    """
    pairs = list(table2_fixture().pairs)
    pairs[0], pairs[1] = FIG1_TOP_PAIRS
    start = np.ones(len(pairs))
    start[:2] = FIG1_START_WEIGHT
    return SpectrumSpec(tuple(pairs)), start
