"""Dense real-symmetric operators and unit state vectors.

Everything here is immutable: arrays held by the value types are copied on
construction and flagged read-only, so operators and states can be shared
freely between iteration runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, ZeroVectorError

SYMMETRY_TOLERANCE = 1e-9
ZERO_NORM = 1e-300
NORMALIZED_TOLERANCE = 1e-12
RAYLEIGH_NORM_TOLERANCE = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Dense ``dim x dim`` real symmetric matrix.

    Input is symmetrized as ``(A + A.T) / 2``; if that correction is larger
    than ``1e-9`` in Frobenius norm the input is rejected as non-symmetric.
    """

    matrix: np.ndarray

    def __post_init__(self):
        a = np.array(self.matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ContractViolation(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ContractViolation("matrix entries must be finite")
        sym = (a + a.T) / 2.0
        defect = np.linalg.norm(a - sym)
        if defect > SYMMETRY_TOLERANCE:
            raise ContractViolation(f"matrix is not symmetric (asymmetry {defect:.3g})")
        object.__setattr__(self, "matrix", _frozen(sym))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "SymmetricOperator":
        return cls(np.eye(dim))

    @classmethod
    def diagonal(cls, values) -> "SymmetricOperator":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"SymmetricOperator(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Real n-vector; iterates are always produced by :func:`normalize`."""

    components: np.ndarray

    def __post_init__(self):
        c = np.array(self.components, dtype=np.float64).ravel()
        if c.size < 1:
            raise ContractViolation("state vector must have at least one component")
        object.__setattr__(self, "components", _frozen(c))

    @property
    def dim(self) -> int:
        return self.components.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) <= NORMALIZED_TOLERANCE

    def canonical(self) -> "StateVector":
        """Sign representative whose largest-magnitude component is positive."""
        c = self.components
        if c[np.argmax(np.abs(c))] < 0:
            return StateVector(-c)
        return self

    def __array__(self, dtype=None, copy=None):
        return np.array(self.components, dtype=dtype)

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"StateVector({np.array2string(self.components, precision=6)})"


@dataclass(frozen=True, eq=False)
class CommutingPair:
    """Two operators of equal dimension whose commutator is (numerically) zero."""

    H: SymmetricOperator
    S: SymmetricOperator
    commutator_tolerance: float = 1e-10

    def __post_init__(self):
        if not isinstance(self.H, SymmetricOperator):
            object.__setattr__(self, "H", SymmetricOperator(self.H))
        if not isinstance(self.S, SymmetricOperator):
            object.__setattr__(self, "S", SymmetricOperator(self.S))
        if self.commutator_tolerance < 0:
            raise ContractViolation("commutator_tolerance must be nonnegative")
        if self.H.dim != self.S.dim:
            raise ContractViolation(f"H has dim {self.H.dim} but S has dim {self.S.dim}")
        measured = commutator_norm(self.H, self.S)
        if measured > self.commutator_tolerance:
            raise ContractViolation(
                f"H and S do not commute: ||HS - SH||_F = {measured:.6g} "
                f"> {self.commutator_tolerance:.3g}"
            )

    @property
    def dim(self) -> int:
        return self.H.dim


def _as_operator(A) -> SymmetricOperator:
    return A if isinstance(A, SymmetricOperator) else SymmetricOperator(A)


def _as_array(v) -> np.ndarray:
    if isinstance(v, StateVector):
        return v.components
    return np.asarray(v, dtype=np.float64).ravel()


def apply(A, v) -> np.ndarray:
    """Return the matrix-vector product ``A @ v`` as a fresh array."""
    A = _as_operator(A)
    x = _as_array(v)
    if x.size != A.dim:
        raise ContractViolation(f"dimension mismatch: operator {A.dim}, vector {x.size}")
    return A.matrix @ x


def rayleigh(A, v) -> float:
    """Expectation value ``<v|A|v>`` of a normalized vector."""
    x = _as_array(v)
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > RAYLEIGH_NORM_TOLERANCE:
        raise ContractViolation(f"rayleigh quotient needs a normalized vector (norm {norm:.12g})")
    return float(x @ apply(A, x))


def normalize(v) -> tuple[StateVector, float]:
    """Scale ``v`` to unit 2-norm.

    Returns
    -------
    (state, norm)
        The unit vector and the original length.

    Raises
    ------
    ZeroVectorError
        If the length is at or below ``1e-300``.
    """
    x = _as_array(v)
    norm = float(np.linalg.norm(x))
    if not np.isfinite(norm):
        raise ZeroVectorError("vector has non-finite norm")
    if norm <= ZERO_NORM:
        raise ZeroVectorError(f"vector collapsed to zero (norm {norm:.3g})")
    return StateVector(x / norm), norm


def commutator_norm(H, S) -> float:
    H = _as_operator(H)
    S = _as_operator(S)
    if H.dim != S.dim:
        raise ContractViolation(f"dimension mismatch: {H.dim} vs {S.dim}")
    HS = H.matrix @ S.matrix
    # SH is the transpose of HS for symmetric H and S, but form it explicitly
    # so that the result is symmetric in its arguments bit for bit.
    SH = S.matrix @ H.matrix
    return float(np.linalg.norm(HS - SH))


def shifted(S, mu: float) -> SymmetricOperator:
    """Return ``S - mu * E``."""
    S = _as_operator(S)
    a = np.array(S.matrix)
    a[np.diag_indices_from(a)] -= mu
    return SymmetricOperator(a)


def all_ones(dim: int) -> StateVector:
    """The default start vector: all components one, normalized."""
    return normalize(np.ones(dim))[0]
