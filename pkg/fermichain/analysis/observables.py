"""
Spin observables of Gaussian states.

Sites are 0-based. sz_j = 1 - 2 n_j and the Majoranas are
A_j = c_j + c_j^dagger, B_j = i(c_j^dagger - c_j).
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from loguru import logger
from scipy.special import xlogy

from fermichain.core.bdg import BogoliubovBasis, diagonalize
from fermichain.core.gaussian import excited_basis
from fermichain.core.model import ChainSpec, ParitySector, assemble_bdg
from fermichain.errors import (
    EmptyBlockError,
    InvalidInputError,
    NonEquilibriumUnsupportedError,
)
from fermichain.evolution.dynamics import (
    MajoranaCorrelation,
    NambuGreen,
    green_functions,
    majorana_correlation,
)

EQUILIBRIUM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ContractionMatrix:
    """
    Window of M = 1 - 2(G + F), M_{j j'} = -i <B_j A_j'>.

    Rows j1..j2-1 and columns j1+1..j2 of the full matrix, whose
    determinant is the sx sx string correlator between j1 and j2.
    """

    M: np.ndarray
    j1: int
    j2: int

    @property
    def value(self) -> float:
        return float(np.linalg.det(self.M)) if self.M.size else 1.0


@dataclass(frozen=True)
class EntropyResult:
    """
    Entanglement entropy of a block of sites.

    Attributes:
        block (Tuple[int, ...]): The sites.
        lambdas (np.ndarray): Canonical values in [-1, 1].
        entropy (float): Entropy in nats, or bits when `bits` is set.
        bits (bool): Units flag.
    """

    block: Tuple[int, ...]
    lambdas: np.ndarray
    entropy: float
    bits: bool = False


def full_contraction(g: NambuGreen) -> np.ndarray:
    """
    The L x L matrix 1 - 2(G + F) of an equilibrium state.

    Raises:
        NonEquilibriumUnsupportedError: If G or F has imaginary parts above
            1e-10.
    """
    residue = max(
        np.abs(np.imag(g.G)).max(initial=0.0),
        np.abs(np.imag(g.F)).max(initial=0.0),
    )
    if residue > EQUILIBRIUM_TOLERANCE:
        raise NonEquilibriumUnsupportedError(
            f"String correlators need real G, F; imaginary residue {residue:.3e}"
        )
    return g.weight * np.eye(g.L) - 2.0 * np.real(g.G + g.F)


def contraction_matrix(g: NambuGreen, j1: int, j2: int) -> ContractionMatrix:
    """Determinant window of the sx sx correlator between sites j1 < j2."""
    if not 0 <= j1 < j2 < g.L:
        raise InvalidInputError(
            f"Need 0 <= j1 < j2 < L={g.L}, got ({j1}, {j2})"
        )
    M = full_contraction(g)
    return ContractionMatrix(M=M[j1:j2, j1 + 1 : j2 + 1], j1=j1, j2=j2)


def transverse_magnetization(g: NambuGreen, j: int) -> float:
    """<sz_j> = 2 Re G_jj - 1."""
    return float(2.0 * np.real(g.G[j, j]) - g.weight)


def magnetization_profile(g: NambuGreen) -> np.ndarray:
    return 2.0 * np.real(np.diag(g.G)) - g.weight


def xx_correlator(g: NambuGreen, j1: int, j2: int) -> float:
    """
    <sx_j1 sx_j2> for j1 < j2 as the determinant of the contraction window.

    The window runs upward from j1 and never crosses the ring bond, so no
    sector sign enters.
    """
    return contraction_matrix(g, j1, j2).value


def xx_correlation_profile(g: NambuGreen, j1: int = 0) -> np.ndarray:
    """C_{j1, j1+r} for r = 1 .. L-1-j1."""
    M = full_contraction(g)
    return np.array(
        [
            np.linalg.det(M[j1:j2, j1 + 1 : j2 + 1])
            for j2 in range(j1 + 1, g.L)
        ]
    )


def vacuum_parity(basis: Union[BogoliubovBasis, NambuGreen]) -> int:
    """
    Fermion parity (-1)^L det(1 - 2(G + F)) of a Bogoliubov vacuum.

    A determinant whose magnitude is off 1 by more than 1e-6 signals
    unresolved zero modes and is logged as a warning; the sign is returned.
    """
    g = basis if isinstance(basis, NambuGreen) else green_functions(
        basis.U, basis.V
    )
    L = g.L
    det = np.linalg.det(np.eye(L) - 2.0 * (g.G + g.F)) * (-1) ** L
    if abs(det.imag) > 1e-6 or abs(abs(det.real) - 1.0) > 1e-6:
        logger.warning(
            f"Vacuum parity determinant {det:.6g} is not +-1; "
            "zero modes may be unresolved"
        )
    return 1 if det.real >= 0 else -1


def entanglement_entropy(
    m: MajoranaCorrelation, block: Sequence[int], bits: bool = False
) -> EntropyResult:
    """
    Entropy of a block of sites from the restricted Majorana matrix.

    The 2l x 2l restriction of A to (sites, sites + L) is brought to real
    Schur form, whose 2x2 blocks [[0, lam], [-lam, 0]] give P = (1 + lam)/2
    and S = -sum [P ln P + (1 - P) ln(1 - P)].

    Raises:
        EmptyBlockError: If the block has no sites.
        InvalidInputError: If a site lies outside the chain.
    """
    block = tuple(int(s) for s in block)
    l = len(block)
    if l == 0:
        raise EmptyBlockError("Entanglement block has no sites")
    L = m.L
    if any(not 0 <= s < L for s in block):
        raise InvalidInputError(f"Block {block} outside 0..{L - 1}")

    idx = list(block) + [L + s for s in block]
    sub = m.Amat[np.ix_(idx, idx)]
    T, _ = scipy.linalg.schur(sub, output="real")
    scale = max(1.0, float(np.abs(sub).max(initial=0.0)))
    lambdas = []
    i = 0
    while i < 2 * l:
        if i + 1 < 2 * l and abs(T[i + 1, i]) > 1e-14 * scale:
            lambdas.append(np.sqrt(abs(T[i, i + 1] * T[i + 1, i])))
            i += 2
        else:
            lambdas.append(0.0)
            i += 1
    # Zero 1x1 blocks come in pairs
    lambdas = np.array(lambdas)
    nonzero = lambdas[lambdas > 0]
    lambdas = np.concatenate([nonzero, np.zeros(l - len(nonzero))])[:l]

    if np.any(np.abs(lambdas) > 1 + 1e-8):
        logger.warning(f"Canonical values exceed 1: max {lambdas.max():.10f}")
    lambdas = np.clip(lambdas, -1.0, 1.0)
    P = (1.0 + lambdas) / 2
    S = -float(np.sum(xlogy(P, P) + xlogy(1 - P, 1 - P)))
    S = max(S, 0.0)
    if bits:
        S /= np.log(2)
    return EntropyResult(block=block, lambdas=lambdas, entropy=S, bits=bits)


def block_entropy(g: NambuGreen, block: Sequence[int], bits: bool = False):
    """Entanglement entropy of a block straight from Green functions."""
    return entanglement_entropy(majorana_correlation(g), block, bits)


def zz_correlator(g: NambuGreen, j1: int, j2: int) -> float:
    """
    <sz_j1 sz_j2> from the Wick contractions of A_j1 B_j1 A_j2 B_j2.

    Equals the Pfaffian of the 4x4 restriction of A to (A_j1, B_j1, A_j2, B_j2).
    """
    if j1 == j2:
        return 1.0
    L = g.L
    A = majorana_correlation(g).Amat
    a1, b1, a2, b2 = j1, L + j1, j2, L + j2
    return float(
        A[a1, b1] * A[a2, b2] - A[a1, a2] * A[b1, b2] + A[a1, b2] * A[b1, a2]
    )


def sector_ground_state(
    spec: ChainSpec, sector: ParitySector = ParitySector.EVEN
) -> BogoliubovBasis:
    """
    Lowest physical state of a parity sector as a Bogoliubov basis.

    The vacuum of the sector's BdG matrix is kept when its parity equals
    (-1)^p; otherwise the lowest mode is occupied.
    """
    sector = ParitySector(sector)
    basis = diagonalize(assemble_bdg(spec, sector))
    if vacuum_parity(basis) == sector.boundary_sign:
        return basis
    logger.debug(f"Sector {int(sector)} vacuum has the wrong parity")
    return excited_basis(basis, [0])
