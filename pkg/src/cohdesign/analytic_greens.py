"""Closed-form dyadic Green's tensors: free space and the perfectly
reflecting half-space, evaluated on the z-axis.

These are the analytic oracles against which the FDTD extraction is
validated.  The free-space tensor omits the delta-function contact term, so
coincident arguments are rejected; only the (finite) imaginary part is
defined at equal points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import UNITS

__all__ = [
    "vacuum_greens",
    "vacuum_im_greens_equal",
    "HalfSpaceScatterDiag",
    "reflector_scatter_equal",
    "reflector_im_greens_equal",
]


def vacuum_greens(r, r_prime, omega: float) -> np.ndarray:
    """Free-space dyadic Green's tensor G0(r, r', omega), contact term dropped.

    Raises ValueError at coincident points; use
    :func:`vacuum_im_greens_equal` for the equal-point imaginary part.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(r_prime, dtype=float)
    R = r - rp
    Rn = float(np.linalg.norm(R))
    if Rn == 0.0:
        raise ValueError(
            "vacuum Green's tensor is singular at coincident points; "
            "use vacuum_im_greens_equal for the equal-point imaginary part"
        )
    k = omega / UNITS.c
    kR = k * Rn
    Rhat = R / Rn
    pre = -np.exp(1j * kR) / (4.0 * np.pi * k**2 * Rn**3)
    return pre * (
        (1.0 - 1j * kR - kR**2) * np.eye(3)
        - (3.0 - 3j * kR - kR**2) * np.outer(Rhat, Rhat)
    )


def vacuum_im_greens_equal(omega: float) -> np.ndarray:
    """Equal-point imaginary part in free space: (omega / 6 pi c) * I."""
    return omega / (6.0 * np.pi * UNITS.c) * np.eye(3)


@dataclass(frozen=True)
class HalfSpaceScatterDiag:
    """Diagonal scattering part of the half-space tensor at equal points.

    Off-diagonal elements vanish identically for the perfect reflector, so
    the two distinct entries (gxx = gyy, gzz) describe the tensor completely.
    """

    gxx: complex
    gzz: complex

    def as_matrix(self) -> np.ndarray:
        return np.diag([self.gxx, self.gxx, self.gzz])


def reflector_scatter_equal(zeta: float, omega: float) -> HalfSpaceScatterDiag:
    """Equal-point scattering tensor above a perfect mirror at height zeta.

    zeta is the dimensionless round-trip distance from the surface; the
    physical height z is recovered through the units convention.
    """
    if zeta <= 0:
        raise ValueError("zeta must be positive (atom above the mirror)")
    z = np.pi * UNITS.c * zeta / omega  # zeta = omega*z/(pi*c)
    ph = np.exp(2j * np.pi * zeta)
    gxx = ph * (1.0 - 2j * np.pi * zeta - 4.0 * np.pi**2 * zeta**2) / (
        32.0 * np.pi**3 * zeta**2 * z
    )
    gzz = ph * (1.0 - 2j * np.pi * zeta) / (16.0 * np.pi**3 * zeta**2 * z)
    return HalfSpaceScatterDiag(gxx=complex(gxx), gzz=complex(gzz))


def reflector_im_greens_equal(zeta: float, omega: float) -> np.ndarray:
    """Im G(r, r, omega) on the z-axis above a perfect mirror.

    Vacuum term plus the diag(1,1,0) and diag(0,0,1) scattering terms.
    """
    if zeta <= 0:
        raise ValueError("zeta must be positive (atom above the mirror)")
    z = np.pi * UNITS.c * zeta / omega
    s = np.sin(2.0 * np.pi * zeta)
    c = np.cos(2.0 * np.pi * zeta)
    para = ((1.0 - 4.0 * np.pi**2 * zeta**2) * s - 2.0 * np.pi * zeta * c) / (
        32.0 * np.pi**3 * zeta**2 * z
    )
    perp = (s - 2.0 * np.pi * zeta * c) / (16.0 * np.pi**3 * zeta**2 * z)
    return (
        vacuum_im_greens_equal(omega)
        + para * np.diag([1.0, 1.0, 0.0])
        + perp * np.diag([0.0, 0.0, 1.0])
    )
