"""Exception types raised by the library.

Each failure mode that callers are expected to handle separately gets its
own class; everything derives from :class:`HolonomyLabError` so coarse
handling remains possible.
"""


class HolonomyLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(HolonomyLabError):
    """Operands act on Hilbert spaces of different dimension."""


class HermiticityError(HolonomyLabError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class UnitarityError(HolonomyLabError):
    """A matrix that must be unitary is not, beyond tolerance."""


class OrthonormalityError(HolonomyLabError):
    """A supplied vector family is not orthonormal."""


class ClusteringAmbiguityError(HolonomyLabError):
    """A spectral gap is too close to the clustering tolerance to decide
    whether two raw eigenvalues belong to the same degenerate level."""


class LevelTrackingError(HolonomyLabError):
    """Eigenlevel correspondence across samples could not be established
    (closing gap, level crossing, or overlap below the matching threshold)."""


class UndersamplingError(HolonomyLabError):
    """Consecutive frame overlaps are too small for reliable transport;
    the path needs more samples."""


class AdiabaticityError(HolonomyLabError):
    """Dynamical evolution strayed too far from the adiabatic block
    structure for a geometric decomposition to be meaningful."""


class PathContinuityError(HolonomyLabError):
    """Adjacent path segments do not join continuously."""


class SpectralCollisionError(HolonomyLabError):
    """Block Hamiltonians whose spectra must be disjoint are not."""


class ProtocolError(HolonomyLabError):
    """A gate protocol is malformed or requests an unsupported target."""


class ConfigError(HolonomyLabError):
    """A CLI configuration file or expression could not be parsed."""
