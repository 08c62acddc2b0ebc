"""Units convention, dipole configurations and the small dense matrix algebra
shared by every other module.

Everything is expressed in natural units: the transition wavelength is the
length unit (lambda0 = 1), the speed of light is 1, so the transition angular
frequency is omega0 = 2*pi.  Distances facing the user are the dimensionless
round-trip distance zeta = 2*z/lambda0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "UnitsConvention",
    "UNITS",
    "DipolePair",
    "standard_dipoles",
    "dipole_matrices",
    "frob",
]


@dataclass(frozen=True)
class UnitsConvention:
    """Natural units: lambda0 = c = 1, omega0 = 2*pi."""

    lambda0: float = 1.0
    c: float = 1.0

    @property
    def omega0(self) -> float:
        return 2.0 * np.pi * self.c / self.lambda0

    def zeta(self, z):
        """Dimensionless round-trip distance: omega0*z/(pi*c) = 2*z/lambda0."""
        return 2.0 * np.asarray(z) / self.lambda0

    def length(self, zeta):
        """Inverse of :meth:`zeta`: simulation length for a given zeta."""
        return np.asarray(zeta) * self.lambda0 / 2.0


UNITS = UnitsConvention()


def frob(a: np.ndarray, b: np.ndarray) -> complex:
    """Unconjugated elementwise sum-product sum_ij A_ij * B_ij."""
    return complex(np.sum(np.asarray(a) * np.asarray(b)))


@dataclass(frozen=True)
class DipolePair:
    """The two transition dipole moments of the Lambda system.

    d and mu are complex 3-vectors in arbitrary (common) units.  The derived
    matrices K = d* (x) mu and N = d* (x) d + mu* (x) mu are cached on first
    access; N is Hermitian PSD and Tr K = d* . mu.
    """

    d: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=complex).reshape(3).copy()
        mu = np.asarray(self.mu, dtype=complex).reshape(3).copy()
        d.flags.writeable = False
        mu.flags.writeable = False
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "mu", mu)

    @cached_property
    def K(self) -> np.ndarray:
        k = np.outer(self.d.conj(), self.mu)
        k.flags.writeable = False
        return k

    @cached_property
    def N(self) -> np.ndarray:
        n = np.outer(self.d.conj(), self.d) + np.outer(self.mu.conj(), self.mu)
        n.flags.writeable = False
        return n


def dipole_matrices(pair: DipolePair) -> tuple[np.ndarray, np.ndarray]:
    """Return (K, N) for the pair (cached on the pair itself)."""
    return pair.K, pair.N


def standard_dipoles(rotation: str, d: float, mu: float) -> DipolePair:
    """The two standard orthogonal circular configurations.

    ``perpendicular`` rotates in the yz plane (perpendicular to the xy
    optimization plane), ``parallel`` in the xy plane.  Both satisfy
    d* . mu = 0.
    """
    if d <= 0 or mu <= 0:
        raise ValueError("dipole magnitudes must be positive")
    if rotation == "perpendicular":
        dv = d / np.sqrt(2.0) * np.array([0.0, 1.0, 1.0j])
        mv = mu / np.sqrt(2.0) * np.array([0.0, 1.0, -1.0j])
    elif rotation == "parallel":
        dv = d / np.sqrt(2.0) * np.array([1.0, 1.0j, 0.0])
        mv = mu / np.sqrt(2.0) * np.array([1.0, -1.0j, 0.0])
    else:
        raise ValueError(f"unknown rotation {rotation!r}")
    return DipolePair(dv, mv)
