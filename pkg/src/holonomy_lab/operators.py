"""Dense complex matrix algebra for few-qubit systems.

Everything here works on explicit ``numpy`` arrays; dimensions stay at or
below 16 (four qubits), so dense eigensolvers are used throughout.  The
validated wrapper types (:class:`HermitianOperator`, :class:`UnitaryOperator`,
:class:`SpectralFrame`) are immutable: their arrays are frozen at
construction and can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ClusteringAmbiguityError,
    DimensionMismatchError,
    HermiticityError,
    LevelTrackingError,
    OrthonormalityError,
    UnitarityError,
)

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
DEFAULT_CLUSTER_TOL = 1e-8

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULIS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z, "I": IDENTITY_2}


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def as_matrix(op) -> np.ndarray:
    """Return the underlying square array of an operator or array-like."""
    if isinstance(op, (HermitianOperator, UnitaryOperator)):
        return op.matrix
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class HermitianOperator:
    """A validated Hermitian matrix.

    Construction symmetrizes the input via (M + M†)/2 when the defect
    ``max|M - M†|`` is at most :data:`HERMITICITY_TOL`, and rejects it
    otherwise.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
        defect = np.abs(m - m.conj().T).max()
        if defect > HERMITICITY_TOL:
            raise HermiticityError(f"matrix is not Hermitian: max|M - M^dag| = {defect:.3e}")
        object.__setattr__(self, "matrix", _freeze((m + m.conj().T) / 2.0))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        """Spectral norm (largest absolute eigenvalue)."""
        return float(np.linalg.norm(self.matrix, 2))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if self.dim != other.dim:
            raise DimensionMismatchError(f"cannot add operators of dim {self.dim} and {other.dim}")
        return HermitianOperator(self.matrix + other.matrix)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(float(scalar) * self.matrix)

    def __neg__(self) -> "HermitianOperator":
        return (-1.0) * self


@dataclass(frozen=True)
class UnitaryOperator:
    """A validated unitary matrix; rejects inputs with max|U†U - I| > 1e-10."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
        defect = unitarity_defect(m)
        if defect > UNITARITY_TOL:
            raise UnitarityError(f"matrix is not unitary: max|U^dag U - I| = {defect:.3e}")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T)

    def __matmul__(self, other: "UnitaryOperator") -> "UnitaryOperator":
        if self.dim != other.dim:
            raise DimensionMismatchError(
                f"cannot compose unitaries of dim {self.dim} and {other.dim}"
            )
        return UnitaryOperator(self.matrix @ other.matrix)


def unitarity_defect(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


@dataclass(frozen=True)
class SpectralLevel:
    """One clustered eigenlevel: eigenvalue, degeneracy and an orthonormal
    basis of the eigenspace (columns of ``basis``)."""

    eigenvalue: float
    degeneracy: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[1] != self.degeneracy:
            raise DimensionMismatchError(
                f"basis shape {b.shape} does not match degeneracy {self.degeneracy}"
            )
        object.__setattr__(self, "basis", _freeze(b))

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True)
class SpectralFrame:
    """Clustered eigenvalues of a Hermitian operator with per-level bases.

    Levels are ordered by strictly increasing eigenvalue, their degeneracies
    sum to the Hilbert dimension, and all basis vectors are mutually
    orthonormal (checked to 1e-10 at construction).
    """

    levels: tuple[SpectralLevel, ...]
    dim: int

    def __post_init__(self):
        if sum(lv.degeneracy for lv in self.levels) != self.dim:
            raise DimensionMismatchError("level degeneracies do not sum to the dimension")
        evs = [lv.eigenvalue for lv in self.levels]
        if any(b <= a for a, b in zip(evs, evs[1:])):
            raise ClusteringAmbiguityError("level eigenvalues must be strictly increasing")
        full = np.hstack([lv.basis for lv in self.levels])
        gram_defect = np.abs(full.conj().T @ full - np.eye(self.dim)).max()
        if gram_defect > 1e-10:
            raise OrthonormalityError(
                f"frame basis is not orthonormal: max gram defect {gram_defect:.3e}"
            )

    @property
    def level_count(self) -> int:
        return len(self.levels)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([lv.eigenvalue for lv in self.levels])

    @property
    def degeneracies(self) -> tuple[int, ...]:
        return tuple(lv.degeneracy for lv in self.levels)

    def reconstruct(self) -> HermitianOperator:
        """Rebuild sum_n eps_n Pi_n."""
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for lv in self.levels:
            h += lv.eigenvalue * lv.projector
        return HermitianOperator(h)

    def with_level_basis(self, n: int, basis: np.ndarray) -> "SpectralFrame":
        """Return a copy where level ``n`` uses a different orthonormal basis
        of the same eigenspace."""
        levels = list(self.levels)
        old = levels[n]
        levels[n] = SpectralLevel(old.eigenvalue, old.degeneracy, basis)
        return SpectralFrame(tuple(levels), self.dim)


def pauli_string(n_qubits: int, factors: dict, scale: float = 1.0) -> HermitianOperator:
    """Tensor product of single-qubit Hermitian factors, identity elsewhere.

    ``factors`` maps 1-based qubit indices to 2x2 Hermitian matrices; qubit 1
    is the leftmost tensor slot.  The result is multiplied by ``scale``.
    """
    if n_qubits < 1:
        raise DimensionMismatchError("n_qubits must be at least 1")
    for idx, f in factors.items():
        if not (1 <= idx <= n_qubits):
            raise DimensionMismatchError(
                f"qubit index {idx} out of range for {n_qubits} qubit(s)"
            )
        fm = np.asarray(f, dtype=complex)
        if fm.shape != (2, 2):
            raise DimensionMismatchError(f"factor for qubit {idx} is not 2x2")
        if np.abs(fm - fm.conj().T).max() > HERMITICITY_TOL:
            raise HermiticityError(f"factor for qubit {idx} is not Hermitian")
    out = np.array([[1.0 + 0.0j]])
    for q in range(1, n_qubits + 1):
        out = np.kron(out, np.asarray(factors.get(q, IDENTITY_2), dtype=complex))
    return HermitianOperator(float(scale) * out)


def kron_all(*mats) -> np.ndarray:
    """Kronecker product of the given matrices, left to right."""
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def spectral_decompose(
    h: HermitianOperator, cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> SpectralFrame:
    """Eigendecomposition with degeneracy clustering.

    Raw eigenvalues are merged into one level when adjacent gaps are below
    half of ``cluster_tol * ||H||`` and kept separate above twice that
    threshold.  Gaps inside a factor two of the threshold raise
    :class:`ClusteringAmbiguityError` so callers can adjust tolerances
    instead of getting a silently unstable split.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(as_matrix(h))
    w, v = np.linalg.eigh(h.matrix)
    scale = max(float(np.abs(w).max()), 1e-300)
    tol = cluster_tol * scale
    gaps = np.diff(w)
    ambiguous = (gaps >= tol / 2) & (gaps <= 2 * tol)
    if ambiguous.any():
        k = int(np.argmax(ambiguous))
        raise ClusteringAmbiguityError(
            f"gap {gaps[k]:.3e} between raw eigenvalues {w[k]:.6g} and {w[k + 1]:.6g} "
            f"is within a factor 2 of the clustering threshold {tol:.3e}"
        )
    levels = []
    start = 0
    for i in range(1, h.dim + 1):
        if i == h.dim or w[i] - w[i - 1] > tol:
            levels.append(
                SpectralLevel(float(w[start:i].mean()), i - start, v[:, start:i])
            )
            start = i
    return SpectralFrame(tuple(levels), h.dim)


def frame_of(h: HermitianOperator, frame: SpectralFrame, tol: float = DEFAULT_CLUSTER_TOL) -> SpectralFrame:
    """Validate that ``frame`` is an eigenframe of ``h`` and return it.

    Used when a caller supplies its own basis convention (for example a
    product basis of a degenerate level) instead of the solver's arbitrary
    one.
    """
    hm = as_matrix(h)
    scale = max(float(np.linalg.norm(hm, 2)), 1e-300)
    for n, lv in enumerate(frame.levels):
        resid = np.abs(hm @ lv.basis - lv.eigenvalue * lv.basis).max()
        if resid > tol * scale:
            raise LevelTrackingError(
                f"supplied basis for level {n} is not an eigenbasis: residual {resid:.3e}"
            )
    return frame


def propagator_step(h: HermitianOperator, dt: float) -> UnitaryOperator:
    """exp(-i H dt) computed through the eigendecomposition of H."""
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    w, v = np.linalg.eigh(as_matrix(h))
    return UnitaryOperator((v * np.exp(-1j * w * dt)) @ v.conj().T)


def gate_fidelity(u, v) -> float:
    """|tr(U†V)| / N, invariant under a global phase of either argument."""
    um, vm = as_matrix(u), as_matrix(v)
    if um.shape != vm.shape:
        raise DimensionMismatchError(f"dimension mismatch: {um.shape} vs {vm.shape}")
    return float(min(1.0, abs(np.trace(um.conj().T @ vm)) / um.shape[0]))


def closest_unitary(m) -> UnitaryOperator:
    """Unitary polar factor of a matrix (the nearest unitary in Frobenius
    norm, unique when the matrix is nonsingular)."""
    u, _ = scipy.linalg.polar(as_matrix(m))
    return UnitaryOperator(u)


@dataclass(frozen=True)
class FactorizationReport:
    """Operator-Schmidt data of a matrix across a bipartite cut.

    ``residual`` is the normalized distance from the nearest product
    unitary; it vanishes exactly when the Schmidt rank is 1.  The unitary
    factors and the aligning phase are populated only when the input is
    rank 1 within ``rank1_tol`` of :func:`product_factorize`.
    """

    dims: tuple[int, int]
    schmidt_coefficients: np.ndarray
    residual: float
    factor_a: UnitaryOperator | None
    factor_b: UnitaryOperator | None
    phase: complex | None

    @property
    def is_product(self) -> bool:
        return self.factor_a is not None


def _realign(m: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    # (iA jB, kA lB) -> (iA kA, jB lB)
    return m.reshape(d_a, d_b, d_a, d_b).transpose(0, 2, 1, 3).reshape(d_a * d_a, d_b * d_b)


def product_factorize(
    u, dims: tuple[int, int], rank1_tol: float = 1e-6
) -> FactorizationReport:
    """Operator-Schmidt decomposition of a unitary across the ``dims`` cut.

    The singular values of the realigned matrix satisfy sum(s^2) = N for a
    unitary input.  The residual is computed from the tail,
    sqrt(sum_{r>=2} s_r^2 / N), which equals sqrt(1 - s_1^2/N) without the
    catastrophic cancellation of the direct form.  When the input is rank 1
    within ``rank1_tol`` the factors are extracted and projected to the
    nearest unitaries, and ``phase`` aligns factor_a x factor_b with the
    input.
    """
    um = as_matrix(u)
    d_a, d_b = int(dims[0]), int(dims[1])
    n = um.shape[0]
    if d_a * d_b != n or d_a < 1 or d_b < 1:
        raise DimensionMismatchError(
            f"cut dims {dims} incompatible with operator dimension {n}"
        )
    r = _realign(um, d_a, d_b)
    w, s, vh = np.linalg.svd(r)
    residual = float(np.sqrt(np.sum(s[1:] ** 2) / n))
    factor_a = factor_b = phase = None
    if residual <= rank1_tol:
        a0 = w[:, 0].reshape(d_a, d_a)
        b0 = vh[0, :].conj().reshape(d_b, d_b)
        factor_a = closest_unitary(a0)
        factor_b = closest_unitary(b0)
        prod = np.kron(factor_a.matrix, factor_b.matrix)
        tr = np.trace(prod.conj().T @ um)
        phase = complex(tr / abs(tr)) if abs(tr) > 0 else 1.0 + 0.0j
    return FactorizationReport((d_a, d_b), s, residual, factor_a, factor_b, phase)


def cyclic_permutation(vectors) -> UnitaryOperator:
    """Unitary sending each vector of an orthonormal family to the next one
    (cyclically) and acting as the identity on the orthogonal complement."""
    cols = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    k = len(cols)
    if k < 1:
        raise OrthonormalityError("need at least one vector")
    b = np.array(cols).T
    n = b.shape[0]
    gram_defect = np.abs(b.conj().T @ b - np.eye(k)).max()
    if gram_defect > 1e-10:
        raise OrthonormalityError(f"vectors are not orthonormal: gram defect {gram_defect:.3e}")
    proj = b @ b.conj().T
    c = np.eye(n, dtype=complex) - proj
    for j in range(k):
        c += np.outer(cols[(j + 1) % k], cols[j].conj())
    return UnitaryOperator(c)


def match_levels(previous: SpectralFrame, current: SpectralFrame) -> None:
    """Check that the levels of two nearby frames correspond one-to-one.

    Matching is by maximum projector overlap tr(Pi_n Pi_m) / d_n; a best
    overlap below 0.5, a non-identity assignment (a crossing) or a
    degeneracy change raises :class:`LevelTrackingError`.
    """
    if previous.level_count != current.level_count:
        raise LevelTrackingError(
            f"level count changed from {previous.level_count} to {current.level_count} "
            "(gap closed or opened)"
        )
    for n, lv in enumerate(previous.levels):
        overlaps = np.array(
            [
                np.sum(np.abs(lv.basis.conj().T @ other.basis) ** 2) / lv.degeneracy
                for other in current.levels
            ]
        )
        best = int(np.argmax(overlaps))
        if overlaps[best] < 0.5:
            raise LevelTrackingError(
                f"level {n}: best projector overlap {overlaps[best]:.3f} is below 0.5"
            )
        if best != n:
            raise LevelTrackingError(f"level crossing detected: level {n} maps to {best}")
        if current.levels[n].degeneracy != lv.degeneracy:
            raise LevelTrackingError(
                f"degeneracy of level {n} changed from {lv.degeneracy} "
                f"to {current.levels[n].degeneracy}"
            )
