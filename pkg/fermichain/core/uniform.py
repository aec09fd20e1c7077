"""
Closed-form momentum-space analytics of the translation-invariant chain.

Public functions take J > 0 and h >= 0. The h < 0 and antiferromagnetic
cases follow from these by the particle-hole mapping c_j -> c_j^dagger
(h -> -h) and the sublattice rotation of every other spin (J -> -J); they
are not evaluated here.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from fermichain.config import settings
from fermichain.core.model import ParitySector
from fermichain.errors import (
    DegenerateEllipseError,
    DegeneratePointError,
    InvalidRangeError,
    UndefinedIndexError,
    UnsupportedSizeError,
)


@dataclass(frozen=True)
class KGrid:
    """Momenta of one parity sector, sorted in (-pi, pi]."""

    sector: ParitySector
    ks: np.ndarray

    @property
    def L(self) -> int:
        return len(self.ks)

    @property
    def positive(self) -> np.ndarray:
        """Momenta strictly between 0 and pi."""
        return self.ks[(self.ks > 0) & (self.ks < np.pi)]


@dataclass(frozen=True)
class Dispersion:
    """
    Bogoliubov dispersion of the uniform chain.

    The k-resolved problem is the 2x2 matrix [[z, -iy], [iy, -z]] with
    z_k = 2(h - J cos k), y_k = 2 kappa J sin k and eigenvalues +-eps_k.
    """

    J: float = 1.0
    h: float = 0.0
    kappa: float = 1.0

    def z(self, k):
        return 2.0 * (self.h - self.J * np.cos(k))

    def y(self, k):
        return 2.0 * self.kappa * self.J * np.sin(k)

    def epsilon(self, k):
        return np.hypot(self.z(k), self.y(k))

    def matrix(self, k) -> np.ndarray:
        """The 2x2 momentum-space BdG matrix (times two) at a single k."""
        z, y = self.z(k), self.y(k)
        return np.array([[z, -1j * y], [1j * y, -z]])

    def amplitudes(self, k) -> Tuple[np.ndarray, np.ndarray]:
        """
        Positive-energy eigenvector (u_k, v_k) = (eps + z, i y) / norm.

        Where eps + z underflows (z < 0) the parallel vector
        (|y|, i sgn(y) (eps - z)) is used instead, which keeps
        u_{-k} = u_k and v_{-k} = -v_k.

        Raises:
            DegeneratePointError: If eps_k vanishes at any requested k.
        """
        k = np.asarray(k, dtype=float)
        z, y = self.z(k), self.y(k)
        eps = np.hypot(z, y)
        scale = max(1.0, 2.0 * abs(self.J), 2.0 * abs(self.h))
        if np.any(eps <= 1e-13 * scale):
            raise DegeneratePointError(
                f"eps_k = 0 at a requested momentum (J={self.J}, h={self.h})"
            )
        sgn = np.where(y >= 0, 1.0, -1.0)
        upper = z >= 0
        with np.errstate(invalid="ignore", divide="ignore"):
            n_up = np.sqrt(2.0 * eps * (eps + z))
            n_dn = np.sqrt(2.0 * eps * (eps - z))
            u = np.where(upper, (eps + z) / n_up, np.abs(y) / n_dn)
            v = np.where(upper, 1j * y / n_up, 1j * sgn * (eps - z) / n_dn)
        return u.astype(complex), v.astype(complex)


def _check_uniform(J: float, h: float):
    if J <= 0:
        raise InvalidRangeError(f"J must be positive, got {J}")
    if h < 0:
        raise InvalidRangeError(f"h must be nonnegative, got {h}")


def k_grid(L: int, sector: ParitySector) -> KGrid:
    """
    Momentum grid of a parity sector.

    Args:
        L (int): Even number of sites.
        sector (ParitySector): EVEN gives k = +-(2n-1)pi/L (antiperiodic
            fermions), ODD gives k = 2n pi/L including 0 and pi.

    Returns:
        KGrid: The sorted grid.

    Raises:
        UnsupportedSizeError: If L is odd or not positive.
    """
    if L <= 0 or L % 2:
        raise UnsupportedSizeError(f"Momentum grids need an even L, got {L}")
    sector = ParitySector(sector)
    if sector == ParitySector.ODD:
        n = np.arange(-L // 2 + 1, L // 2 + 1)
        ks = 2.0 * np.pi * n / L
    else:
        n = np.arange(1, L // 2 + 1)
        pos = (2 * n - 1) * np.pi / L
        ks = np.concatenate([-pos[::-1], pos])
    return KGrid(sector=sector, ks=ks)


def epsilon_k(k, J: float = 1.0, h: float = 0.0, kappa: float = 1.0):
    """eps_k = 2J sqrt((cos k - h/J)^2 + kappa^2 sin^2 k), positive branch."""
    return Dispersion(J, h, kappa).epsilon(k)


def amplitudes(k, J: float = 1.0, h: float = 0.0, kappa: float = 1.0):
    """Bogoliubov amplitudes (u_k, v_k) of the positive-energy solution."""
    return Dispersion(J, h, kappa).amplitudes(k)


def sector_ground_energy(
    L: int, J: float, h: float, kappa: float, sector: ParitySector
) -> float:
    """
    Lowest energy of the chain restricted to one parity sector.

    EVEN: -sum over k > 0 of eps_k on the antiperiodic grid.
    ODD: -2J - sum over 0 < k < pi of eps_k on the periodic grid; the
    unpaired k = 0 and k = pi modes contribute the fixed -2J.
    """
    _check_uniform(J, h)
    grid = k_grid(L, sector)
    eps = epsilon_k(grid.positive, J, h, kappa)
    if grid.sector == ParitySector.ODD:
        return float(-2.0 * J - eps.sum())
    return float(-eps.sum())


def sector_gap(L: int, J: float, h: float, kappa: float = 1.0) -> float:
    """Energy splitting E0(odd sector) - E0(even sector)."""
    return sector_ground_energy(
        L, J, h, kappa, ParitySector.ODD
    ) - sector_ground_energy(L, J, h, kappa, ParitySector.EVEN)


def sector_excitation_energies(
    L: int, J: float, h: float, kappa: float, sector: ParitySector
) -> np.ndarray:
    """Sorted eps_k over the full sector grid (equal to the sorted 2 eps_mu)."""
    return np.sort(epsilon_k(k_grid(L, sector).ks, J, h, kappa))


def ground_pairing(
    L: int, J: float, h: float, kappa: float = 1.0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Momentum-diagonal pairing amplitudes of the even-sector ground state.

    The Thouless matrix of the even-sector vacuum is Z = -F diag(v*/u*) F^H
    with F_{jk} = exp(ikj)/sqrt(L), so each pair (k, -k) carries -conj(v_k/u_k).

    Returns:
        Tuple[np.ndarray, np.ndarray]: The antiperiodic grid and the
            amplitudes -conj(v_k / u_k) in grid order.
    """
    _check_uniform(J, h)
    ks = k_grid(L, ParitySector.EVEN).ks
    u, v = amplitudes(ks, J, h, kappa)
    return ks, -np.conj(v / u)


def winding_index(
    J: float = 1.0,
    h: float = 0.0,
    kappa: float = 1.0,
    samples: Optional[int] = None,
) -> int:
    """
    Number of revolutions of (z_k, y_k) around the origin across the zone.

    The angle of the curve is accumulated over `samples` uniform momenta
    and total / 2 pi is rounded to the nearest integer.

    Raises:
        DegenerateEllipseError: If kappa = 0.
        UndefinedIndexError: If |h| = J or the curve comes within
            1e-8 * 2J of the origin.
    """
    _check_uniform(J, h)
    if kappa == 0:
        raise DegenerateEllipseError("The winding index needs kappa != 0")
    if abs(h) == J:
        raise UndefinedIndexError(f"The index is not defined for h = J = {J}")
    samples = samples or settings.WINDING_SAMPLES

    disp = Dispersion(J, h, kappa)
    ks = np.linspace(-np.pi, np.pi, samples + 1)
    z, y = disp.z(ks), disp.y(ks)
    r_min = np.hypot(z, y).min()
    if r_min < 1e-8 * 2.0 * J:
        raise UndefinedIndexError(
            f"Curve passes within {r_min:.3e} of the origin at h={h}"
        )
    angle = np.unwrap(np.arctan2(y, z))
    turns = (angle[-1] - angle[0]) / (2.0 * np.pi)
    logger.debug(f"Winding at h={h}, kappa={kappa}: {turns:.6f} turns")
    return int(abs(round(turns)))


def bands(J: float, h: float, kappa: float, ks) -> pd.DataFrame:
    """Tabulate the two branches +-eps_k over the given momenta."""
    ks = np.asarray(ks, dtype=float)
    eps = epsilon_k(ks, J, h, kappa)
    return pd.DataFrame({"k": ks, "eps_plus": eps, "eps_minus": -eps})
