"""Lambda-system observables: decay rates, cross-coupling, steady-state
coherence, the perfect-reflector closed form, antinode positions, and a
fixed-step master-equation integrator used as an independent oracle for the
steady-state formula.

Rates are reported in reduced units: the common positive prefactor
2*omega0^2/(hbar*eps0*c^2) multiplying every rate is set to one.  It cancels
in the coherence, which is the quantity being optimized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import DipolePair, frob

__all__ = [
    "RateSet",
    "rates_from_greens",
    "steady_coherence",
    "reflector_coherence",
    "antinodes",
    "evolve_master",
]


@dataclass(frozen=True)
class RateSet:
    """Decay rates of the two transitions and their cross-coupling."""

    gamma1: float
    gamma2: float
    kappa12: complex

    def __post_init__(self):
        bound = np.sqrt(max(self.gamma1, 0.0) * max(self.gamma2, 0.0))
        if abs(self.kappa12) > bound + 1e-12 * max(bound, 1.0):
            raise ValueError(
                f"|kappa12| = {abs(self.kappa12):g} exceeds the "
                f"Cauchy-Schwarz bound sqrt(gamma1*gamma2) = {bound:g}"
            )


def _check_environment(im_g: np.ndarray) -> np.ndarray:
    im_g = np.asarray(im_g)
    scale = max(np.abs(im_g).max(), 1e-300)
    if np.abs(im_g - im_g.T).max() > 1e-10 * scale:
        raise ValueError("Im G must be symmetric (reciprocal medium)")
    sym = 0.5 * (im_g + im_g.T).real
    tr = np.trace(sym)
    evals = np.linalg.eigvalsh(sym)
    if evals.min() < -1e-9 * max(tr, 1e-300):
        raise ValueError(
            f"Im G has negative eigenvalue {evals.min():g}: non-physical environment"
        )
    return sym


def rates_from_greens(im_g: np.ndarray, pair: DipolePair) -> RateSet:
    """gamma1 = d*.ImG.d, gamma2 = mu*.ImG.mu, kappa12 = d*.ImG.mu."""
    sym = _check_environment(im_g)
    g1 = complex(pair.d.conj() @ sym @ pair.d)
    g2 = complex(pair.mu.conj() @ sym @ pair.mu)
    k12 = complex(pair.d.conj() @ sym @ pair.mu)
    return RateSet(gamma1=g1.real, gamma2=g2.real, kappa12=k12)


def steady_coherence(im_g: np.ndarray, pair: DipolePair) -> complex:
    """Steady-state rho_12 = (K . ImG) / (N . ImG), with . the
    unconjugated elementwise contraction."""
    sym = _check_environment(im_g)
    denom = frob(pair.N, sym).real
    if denom <= 0:
        raise ValueError("total decay rate N . ImG is not positive: no decay channel")
    return frob(pair.K, sym) / denom


def reflector_coherence(zeta: float, d: float = 1.0, mu: float = 1.0) -> float:
    """Closed-form coherence above a perfect reflector for the perpendicular
    (yz-rotating) dipole pair, including the 2*d*mu/(d^2+mu^2) prefactor."""
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    s = np.sin(2.0 * np.pi * zeta)
    c = np.cos(2.0 * np.pi * zeta)
    num = 6.0 * np.pi * zeta * c - 3.0 * (4.0 * np.pi**2 * zeta**2 + 1.0) * s
    den = (
        (4.0 * np.pi * zeta) ** 3
        - 6.0 * (4.0 * np.pi**2 * zeta**2 - 3.0) * s
        - 36.0 * np.pi * zeta * c
    )
    return 2.0 * d * mu / (mu**2 + d**2) * num / den


def _abs_coherence_slope(zeta: float) -> float:
    h = 1e-8
    return (abs(reflector_coherence(zeta + h)) - abs(reflector_coherence(zeta - h))) / (
        2.0 * h
    )


def antinodes(count: int) -> list[float]:
    """First `count` local maxima of |reflector_coherence| for zeta > 0.05.

    Brackets are centered on the near-resonance guesses (n + 1/2)/2 and the
    slope sign change is bisected; the at-surface maximum is excluded.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for n in range(1, count + 1):
        guess = 0.5 * (n + 0.5)
        lo, hi = guess - 0.15, guess + 0.15
        flo, fhi = _abs_coherence_slope(lo), _abs_coherence_slope(hi)
        if flo * fhi > 0:
            lo, hi = guess - 0.24, guess + 0.24
            flo, fhi = _abs_coherence_slope(lo), _abs_coherence_slope(hi)
            if flo * fhi > 0:
                raise RuntimeError(
                    f"antinode bracketing failed for n={n}: slope({lo:g})={flo:g}, "
                    f"slope({hi:g})={fhi:g}"
                )
        out.append(float(brentq(_abs_coherence_slope, lo, hi, xtol=1e-10)))
    return out


def _check_density_matrix(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ValueError("density matrix must be 3x3")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("density matrix must have unit trace")
    diag = np.diag(rho).real
    if diag.min() < -1e-12 or diag.max() > 1.0 + 1e-12:
        raise ValueError("populations must lie in [0, 1]")
    return rho


def evolve_master(
    rates: RateSet,
    rho0: np.ndarray,
    t_final: float,
    dt: float,
    omega0: float = 2.0 * np.pi,
) -> np.ndarray:
    """Integrate the Lambda-system master equation with classic RK4.

    Basis ordering is {|0>, |1>, |2>} with |0> the upper state.  kappa21 is
    taken as kappa12* so that rho21 = rho12* is preserved.
    """
    rho = _check_density_matrix(rho0)
    g1, g2, k12 = rates.gamma1, rates.gamma2, rates.kappa12
    gtot = g1 + g2
    if dt * gtot >= 0.1:
        raise ValueError("dt too large: require dt*(gamma1+gamma2) < 0.1")
    k21 = np.conj(k12)

    a00 = -(1j * omega0 + 0.5 * gtot)
    feed = np.zeros((3, 3), dtype=complex)
    feed[1, 1] = 0.5 * g1
    feed[2, 2] = 0.5 * g2
    feed[2, 1] = 0.5 * k21
    feed[1, 2] = 0.5 * k12

    def rhs(r):
        half = np.zeros((3, 3), dtype=complex)
        half[0, :] = a00 * r[0, :]  # |0><0| rho term
        half += r[0, 0] * feed
        return half + half.conj().T

    n_steps = int(np.ceil(t_final / dt))
    h = t_final / n_steps
    for _ in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho
