"""Control curves in Hamiltonian space.

A path is an ordered list of scheduled two-point interpolations
H(t) = f(t/T) H_start + g(t/T) H_end.  Both supported schedules satisfy
f(0) = g(1) = 1 and f(1) = g(0) = 0, and are reflection symmetric
(f(s) = g(1 - s)), which makes path reversal a pure endpoint swap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, PathContinuityError, ClusteringAmbiguityError
from .operators import (
    DEFAULT_CLUSTER_TOL,
    HermitianOperator,
    UnitaryOperator,
    spectral_decompose,
)

CONTINUITY_TOL = 1e-12


@dataclass(frozen=True)
class Schedule:
    """Named interpolation weight pair (f, g) on [0, 1]."""

    kind: str

    def __post_init__(self):
        if self.kind not in ("linear", "cosine"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def f(self, s: float) -> float:
        if self.kind == "linear":
            return 1.0 - s
        return math.cos(math.pi * s / 2) ** 2

    def g(self, s: float) -> float:
        if self.kind == "linear":
            return s
        return math.sin(math.pi * s / 2) ** 2

    def f_prime(self, s: float) -> float:
        if self.kind == "linear":
            return -1.0
        return -(math.pi / 2) * math.sin(math.pi * s)

    def g_prime(self, s: float) -> float:
        return -self.f_prime(s)


LINEAR = Schedule("linear")
COSINE = Schedule("cosine")


@dataclass(frozen=True)
class PathSegment:
    """One scheduled interpolation between two Hamiltonians."""

    h_start: HermitianOperator
    h_end: HermitianOperator
    schedule: Schedule
    duration: float

    def __post_init__(self):
        if self.h_start.dim != self.h_end.dim:
            raise DimensionMismatchError(
                f"segment endpoints have dims {self.h_start.dim} and {self.h_end.dim}"
            )
        if not (self.duration > 0 and np.isfinite(self.duration)):
            raise ValueError(f"segment duration must be positive, got {self.duration}")

    @property
    def dim(self) -> int:
        return self.h_start.dim

    def evaluate(self, t: float) -> HermitianOperator:
        """Hamiltonian at local time t in [0, duration]."""
        s = min(max(t / self.duration, 0.0), 1.0)
        return HermitianOperator(
            self.schedule.f(s) * self.h_start.matrix + self.schedule.g(s) * self.h_end.matrix
        )

    def derivative(self, t: float) -> np.ndarray:
        """dH/dt at local time t (exact, from the schedule derivatives)."""
        s = min(max(t / self.duration, 0.0), 1.0)
        return (
            self.schedule.f_prime(s) * self.h_start.matrix
            + self.schedule.g_prime(s) * self.h_end.matrix
        ) / self.duration

    def reversed(self) -> "PathSegment":
        # valid because both schedule kinds satisfy f(s) = g(1 - s)
        return PathSegment(self.h_end, self.h_start, self.schedule, self.duration)


@dataclass(frozen=True)
class HamiltonianPath:
    """Piecewise interpolation curve; continuous across segment joins."""

    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))
        dims = {seg.dim for seg in self.segments}
        if len(dims) != 1:
            raise DimensionMismatchError(f"segments act on different dimensions: {sorted(dims)}")
        for k, (a, b) in enumerate(zip(self.segments, self.segments[1:])):
            jump = np.abs(a.h_end.matrix - b.h_start.matrix).max()
            if jump > CONTINUITY_TOL:
                raise PathContinuityError(
                    f"segments {k} and {k + 1} do not join: max-norm jump {jump:.3e}"
                )

    @property
    def dim(self) -> int:
        return self.segments[0].dim

    @property
    def total_duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))

    @property
    def is_loop(self) -> bool:
        jump = np.abs(
            self.segments[0].h_start.matrix - self.segments[-1].h_end.matrix
        ).max()
        return bool(jump <= CONTINUITY_TOL)

    @property
    def base(self) -> HermitianOperator:
        return self.segments[0].h_start

    def boundaries(self) -> np.ndarray:
        """Global times of all segment joins, including 0 and the end."""
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def locate(self, t: float) -> tuple[int, float]:
        """Map a global time to (segment index, local time)."""
        if not 0.0 <= t <= self.total_duration * (1 + 1e-12):
            raise ValueError(f"time {t} outside [0, {self.total_duration}]")
        acc = 0.0
        for k, seg in enumerate(self.segments):
            if t <= acc + seg.duration or k == len(self.segments) - 1:
                return k, min(t - acc, seg.duration)
            acc += seg.duration
        raise AssertionError("unreachable")

    def evaluate(self, t: float) -> HermitianOperator:
        k, local = self.locate(t)
        return self.segments[k].evaluate(local)


def segment(
    h0: HermitianOperator,
    h1: HermitianOperator,
    schedule: Schedule = COSINE,
    duration: float = 1.0,
) -> PathSegment:
    """Build one interpolation segment from h0 to h1."""
    return PathSegment(h0, h1, schedule, duration)


def interpolation_path(
    waypoints,
    schedule: Schedule = COSINE,
    segment_duration: float = 1.0,
) -> HamiltonianPath:
    """Path visiting the given Hamiltonians in order, one segment per pair."""
    wps = list(waypoints)
    if len(wps) < 2:
        raise ValueError("need at least two waypoints")
    segs = [
        PathSegment(a, b, schedule, segment_duration) for a, b in zip(wps, wps[1:])
    ]
    return HamiltonianPath(tuple(segs))


def concat(paths) -> HamiltonianPath:
    """Join several paths end to start into one."""
    segs: list[PathSegment] = []
    for p in paths:
        segs.extend(p.segments)
    return HamiltonianPath(tuple(segs))


def reverse_path(path: HamiltonianPath) -> HamiltonianPath:
    """The same curve traversed backwards."""
    return HamiltonianPath(tuple(seg.reversed() for seg in reversed(path.segments)))


def conjugate_path(path: HamiltonianPath, v: UnitaryOperator) -> HamiltonianPath:
    """Replace every H(t) by V H(t) V†; schedules and durations unchanged.

    Conjugation commutes with the interpolation weights, so mapping the
    endpoints is exact for every intermediate time as well.
    """
    if v.dim != path.dim:
        raise DimensionMismatchError(
            f"conjugating unitary has dim {v.dim}, path has dim {path.dim}"
        )
    vm = v.matrix

    def conj(h: HermitianOperator) -> HermitianOperator:
        return HermitianOperator(vm @ h.matrix @ vm.conj().T)

    segs = [
        PathSegment(conj(s.h_start), conj(s.h_end), s.schedule, s.duration)
        for s in path.segments
    ]
    return HamiltonianPath(tuple(segs))


def with_total_duration(path: HamiltonianPath, total_duration: float) -> HamiltonianPath:
    """Rescale all segment durations by a common factor to hit the target
    total; the traversed curve is unchanged."""
    if total_duration <= 0:
        raise ValueError("total duration must be positive")
    factor = total_duration / path.total_duration
    segs = [
        PathSegment(s.h_start, s.h_end, s.schedule, s.duration * factor)
        for s in path.segments
    ]
    return HamiltonianPath(tuple(segs))


def sample_times(path: HamiltonianPath, n_samples: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Sample times covering the path, segment joins always included.

    Samples are distributed over segments proportionally to duration (at
    least two intervals each).  Returns the times and the indices at which
    each segment starts; the total count is close to ``n_samples``.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    total = path.total_duration
    times = [0.0]
    starts = []
    acc = 0.0
    for seg in path.segments:
        starts.append(len(times) - 1)
        m = max(2, round(n_samples * seg.duration / total))
        local = np.linspace(0.0, seg.duration, m + 1)[1:]
        times.extend((acc + local).tolist())
        acc += seg.duration
    return np.array(times), tuple(starts)


def min_gap(
    path: HamiltonianPath, n_samples: int, cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> float:
    """Smallest distance between adjacent clustered eigenvalues over sampled
    times; 0 if any sampled point is fully degenerate.

    A clustering ambiguity at a sample means the local gap sits at the
    clustering scale, so the raw adjacent difference is used there.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    times, _ = sample_times(path, n_samples)
    gap = np.inf
    for t in times:
        h = path.evaluate(t)
        try:
            evs = spectral_decompose(h, cluster_tol).eigenvalues
        except ClusteringAmbiguityError:
            evs = np.unique(np.linalg.eigvalsh(h.matrix))
        if len(evs) < 2:
            return 0.0
        gap = min(gap, float(np.diff(evs).min()))
    return float(gap)
