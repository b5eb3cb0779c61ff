"""Time-ordered propagation along a Hamiltonian path.

The integrator is a midpoint-sampled exponential product: each sub-step
applies exp(-i H(t_mid) dt), which is second order in the step size.  A
step-doubling pass supplies a Richardson-style error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LevelTrackingError
from .operators import (
    DEFAULT_CLUSTER_TOL,
    SpectralFrame,
    UnitaryOperator,
    match_levels,
    propagator_step,
    spectral_decompose,
)
from .paths import HamiltonianPath, sample_times


@dataclass(frozen=True)
class EvolutionResult:
    """Total unitary generated by a path plus integration metadata."""

    total_unitary: UnitaryOperator
    duration: float
    steps: int
    step_error_estimate: float


def _propagate(path: HamiltonianPath, steps_per_segment: int) -> np.ndarray:
    u = np.eye(path.dim, dtype=complex)
    acc = 0.0
    for seg in path.segments:
        dt = seg.duration / steps_per_segment
        for k in range(steps_per_segment):
            h = seg.evaluate((k + 0.5) * dt)
            u = propagator_step(h, dt).matrix @ u
        acc += seg.duration
    return u


def evolve(path: HamiltonianPath, steps_per_segment: int) -> EvolutionResult:
    """Ordered product of midpoint-rule propagator steps over the path.

    The returned unitary uses ``steps_per_segment`` sub-steps per segment;
    the error estimate is max|U_N - U_2N| from one internal pass at double
    resolution.
    """
    if steps_per_segment < 1:
        raise ValueError("steps_per_segment must be at least 1")
    u_n = _propagate(path, steps_per_segment)
    u_2n = _propagate(path, 2 * steps_per_segment)
    return EvolutionResult(
        total_unitary=UnitaryOperator(u_n),
        duration=path.total_duration,
        steps=steps_per_segment * len(path.segments),
        step_error_estimate=float(np.abs(u_n - u_2n).max()),
    )


def track_endpoint_frame(
    path: HamiltonianPath,
    n_samples: int = 256,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> tuple[SpectralFrame, SpectralFrame]:
    """Initial and final spectral frames with levels matched by continuity.

    Frames at intermediate samples are only used to confirm that no level
    crossing occurs; a crossing raises :class:`LevelTrackingError`.
    """
    times, _ = sample_times(path, n_samples)
    frames = [spectral_decompose(path.evaluate(t), cluster_tol) for t in times]
    for prev, cur in zip(frames, frames[1:]):
        match_levels(prev, cur)
    return frames[0], frames[-1]


def adiabatic_leakage(
    path: HamiltonianPath,
    steps_per_segment: int,
    track_samples: int = 256,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> float:
    """Worst-case escape of an evolved eigenspace from its tracked image.

    Evolves each initial projector and measures
    max_n || (1 - Pi_n(T)) U Pi_n(0) ||_2, where Pi_n(T) is the endpoint
    eigenprojector matched to level n by continuous tracking.  Zero means
    perfectly adiabatic transport.
    """
    start, end = track_endpoint_frame(path, track_samples, cluster_tol)
    u = evolve(path, steps_per_segment).total_unitary.matrix
    eye = np.eye(path.dim)
    leak = 0.0
    for lv0, lv1 in zip(start.levels, end.levels):
        if lv0.degeneracy != lv1.degeneracy:
            raise LevelTrackingError("endpoint degeneracy mismatch")
        p0 = lv0.projector
        p1 = lv1.projector
        leak = max(leak, float(np.linalg.norm((eye - p1) @ u @ p0, 2)))
    return min(1.0, leak)
