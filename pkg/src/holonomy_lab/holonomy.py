"""Per-eigenspace geometric transformations along a path.

The path-ordered transport is realized discretely: spectral frames are
sampled along the curve and each level's basis at sample k+1 is re-gauged
by the unitary polar factor of its overlap with sample k.  In this gauge
consecutive overlaps are Hermitian positive, the solver's arbitrary
per-sample phases drop out, and the loop holonomy is simply the gauged
final frame expressed in the initial one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import AdiabaticityError, UndersamplingError
from .evolution import EvolutionResult
from .operators import (
    DEFAULT_CLUSTER_TOL,
    SpectralFrame,
    UnitaryOperator,
    closest_unitary,
    frame_of,
    match_levels,
    spectral_decompose,
)
from .paths import HamiltonianPath, sample_times

DEFAULT_MIN_OVERLAP = 0.9
DEFAULT_MAX_DEFECT = 1e-3


@dataclass(frozen=True)
class FrameTrack:
    """Spectral frames sampled along a path, in the parallel-transport gauge."""

    times: np.ndarray
    frames: tuple[SpectralFrame, ...]
    segment_starts: tuple[int, ...]
    is_loop: bool
    gauge: str = "parallel-transport"

    @property
    def level_count(self) -> int:
        return self.frames[0].level_count

    def eigenvalue_history(self, n: int) -> np.ndarray:
        return np.array([f.levels[n].eigenvalue for f in self.frames])


@dataclass(frozen=True)
class LevelHolonomy:
    """Geometric unitary and dynamical phase of one eigenlevel."""

    level: int
    matrix: UnitaryOperator
    dynamical_phase: float


@dataclass(frozen=True)
class HolonomyResult:
    """Per-level geometric unitaries with the frame convention they use.

    Matrices are expressed in ``basis_convention`` (the initial frame).  For
    open paths they are transfer isometries read against ``end_frame``.
    ``off_block_residual`` is populated by :func:`geometric_decompose` and
    measures how far the dynamical evolution was from block diagonal.
    """

    per_level: tuple[LevelHolonomy, ...]
    basis_convention: SpectralFrame
    end_frame: SpectralFrame | None
    max_unitarization_defect: float
    off_block_residual: float | None = None

    def matrix(self, n: int) -> np.ndarray:
        return self.per_level[n].matrix.matrix

    @property
    def dynamical_phases(self) -> np.ndarray:
        return np.array([lh.dynamical_phase for lh in self.per_level])

    def reassemble(self, with_dynamical_phases: bool = False) -> UnitaryOperator:
        """Full-space unitary sum_n B_n U_n B_n† (optionally times
        exp(-i omega_n) per level)."""
        frame = self.basis_convention
        u = np.zeros((frame.dim, frame.dim), dtype=complex)
        for lv, lh in zip(frame.levels, self.per_level):
            block = lh.matrix.matrix
            if with_dynamical_phases:
                block = np.exp(-1j * lh.dynamical_phase) * block
            u += lv.basis @ block @ lv.basis.conj().T
        return UnitaryOperator(u)


def track_frames(
    path: HamiltonianPath,
    n_samples: int,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    initial_frame: SpectralFrame | None = None,
    min_overlap: float = DEFAULT_MIN_OVERLAP,
) -> FrameTrack:
    """Sample spectral frames along the path in the parallel-transport gauge.

    ``initial_frame`` fixes the basis convention at the base point (it must
    be an eigenframe of H(0)); by default the solver's frame is used.  An
    overlap whose smallest singular value drops below ``min_overlap`` raises
    :class:`UndersamplingError`.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    times, segment_starts = sample_times(path, n_samples)
    if initial_frame is not None:
        first = frame_of(path.evaluate(0.0), initial_frame, cluster_tol)
    else:
        first = spectral_decompose(path.evaluate(0.0), cluster_tol)
    frames = [first]
    for t in times[1:]:
        raw = spectral_decompose(path.evaluate(float(t)), cluster_tol)
        match_levels(frames[-1], raw)
        gauged = raw
        for n, lv in enumerate(raw.levels):
            overlap = frames[-1].levels[n].basis.conj().T @ lv.basis
            smin = np.linalg.svd(overlap, compute_uv=False)[-1]
            if smin < min_overlap:
                raise UndersamplingError(
                    f"overlap singular value {smin:.3f} below {min_overlap} for level {n} "
                    f"at t={t:.6g}; increase n_samples"
                )
            w, _ = scipy.linalg.polar(overlap)
            gauged = gauged.with_level_basis(n, lv.basis @ w.conj().T)
        frames.append(gauged)
    return FrameTrack(times, tuple(frames), segment_starts, path.is_loop)


def _dynamical_phases(track: FrameTrack) -> np.ndarray:
    """omega_n = integral of eps_n dt by per-segment composite Simpson rule.

    Integrating segment by segment keeps full accuracy across the derivative
    kinks at segment joins.
    """
    phases = np.zeros(track.level_count)
    bounds = list(track.segment_starts) + [len(track.times) - 1]
    for n in range(track.level_count):
        eps = track.eigenvalue_history(n)
        total = 0.0
        for a, b in zip(bounds, bounds[1:]):
            total += scipy.integrate.simpson(eps[a : b + 1], x=track.times[a : b + 1])
        phases[n] = total
    return phases


def parallel_transport_holonomy(
    track: FrameTrack, max_defect: float = DEFAULT_MAX_DEFECT
) -> HolonomyResult:
    """Geometric transformation of each level accumulated along the track.

    For a loop the result is the holonomy matrix in the initial frame: the
    gauged final basis read against the initial one, projected to the
    nearest unitary.  For an open path the endpoint reference is the
    solver's frame at H(T), so the matrices are transfer isometries between
    the two conventions.  Dynamical phases come from quadrature of the
    sampled eigenvalues.
    """
    initial = track.frames[0]
    final = track.frames[-1]
    if track.is_loop:
        reference = initial
        end_frame = None
    else:
        # the final frame determines sum_n eps_n Pi_n = H(T); decomposing it
        # recovers the solver's endpoint convention
        reference = spectral_decompose(final.reconstruct())
        match_levels(final, reference)
        end_frame = reference
    phases = _dynamical_phases(track)
    per_level = []
    worst = 0.0
    for n in range(track.level_count):
        raw = reference.levels[n].basis.conj().T @ final.levels[n].basis
        u = closest_unitary(raw)
        worst = max(worst, float(np.abs(raw - u.matrix).max()))
        per_level.append(LevelHolonomy(n, u, float(phases[n])))
    if worst > max_defect:
        raise AdiabaticityError(
            f"pre-unitarization defect {worst:.3e} exceeds {max_defect:.1e}; "
            "the track does not close cleanly"
        )
    return HolonomyResult(tuple(per_level), initial, end_frame, worst)


def geometric_decompose(
    path: HamiltonianPath,
    evolution: EvolutionResult,
    track: FrameTrack,
    max_off_block: float = 0.1,
    max_defect: float = DEFAULT_MAX_DEFECT,
) -> HolonomyResult:
    """Strip dynamical phases from a full loop evolution, block by block.

    Projects U(T) onto the initial eigenspaces, divides level n by
    exp(-i omega_n), expresses the block in the initial frame and projects
    to the nearest unitary.  The worst off-block residual
    max_n ||(1 - Pi_n) U Pi_n||_2 is attached to the result as a leakage
    diagnostic; above ``max_off_block`` it raises
    :class:`AdiabaticityError`.
    """
    if not path.is_loop:
        raise ValueError("geometric decomposition needs a closed loop")
    initial = track.frames[0]
    u = evolution.total_unitary.matrix
    phases = _dynamical_phases(track)
    eye = np.eye(initial.dim)
    off = 0.0
    per_level = []
    worst = 0.0
    for n, lv in enumerate(initial.levels):
        p = lv.projector
        off = max(off, float(np.linalg.norm((eye - p) @ u @ p, 2)))
        block = lv.basis.conj().T @ u @ lv.basis
        geo = np.exp(1j * phases[n]) * block
        un = closest_unitary(geo)
        worst = max(worst, float(np.abs(geo - un.matrix).max()))
        per_level.append(LevelHolonomy(n, un, float(phases[n])))
    if off > max_off_block:
        raise AdiabaticityError(
            f"off-block residual {off:.3e} exceeds {max_off_block:.1e}; "
            "evolution was not adiabatic enough"
        )
    if worst > max_defect:
        raise AdiabaticityError(
            f"pre-unitarization defect {worst:.3e} exceeds {max_defect:.1e}"
        )
    return HolonomyResult(tuple(per_level), initial, None, worst, off)
