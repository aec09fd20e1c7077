"""
Gaussian-state algebra over Bogoliubov vacua.

Only squared overlap magnitudes are a stable contract. Amplitudes carry
the global phase of whatever eigenvectors the solver returned.
"""

from dataclasses import dataclass, replace
from typing import FrozenSet, Iterable, Optional, Sequence, Union

import numpy as np
from loguru import logger

from fermichain.core.bdg import BogoliubovBasis
from fermichain.errors import (
    InvalidDimensionError,
    InvalidInputError,
    OrthogonalVacuumError,
)

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class PairingMatrix:
    """
    Antisymmetric Z with |target> = N exp(1/2 sum Z_{mu nu} g+_mu g+_nu)|ref>.

    Attributes:
        Z (np.ndarray): L x L antisymmetric pairing matrix.
        overlap (float): |N| = |<ref|target>|.
    """

    Z: np.ndarray
    overlap: float = 1.0

    @property
    def asymmetry(self) -> float:
        return float(np.abs(self.Z + self.Z.T).max(initial=0.0))


@dataclass(frozen=True)
class OccupationPattern:
    """Set of occupied quasiparticle modes (0-based)."""

    occupied: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, modes: Iterable[int]) -> "OccupationPattern":
        return cls(frozenset(int(m) for m in modes))

    @property
    def parity(self) -> int:
        return len(self.occupied) % 2

    def check(self, L: int, parity: Optional[int] = None):
        """
        Validate mode indices and, optionally, the number parity.

        Raises:
            InvalidInputError: On an out-of-range mode or a parity mismatch.
        """
        bad = [m for m in self.occupied if not 0 <= m < L]
        if bad:
            raise InvalidInputError(f"Modes {sorted(bad)} outside 0..{L - 1}")
        if parity is not None and self.parity != parity % 2:
            raise InvalidInputError(
                f"Pattern with {len(self.occupied)} modes has parity "
                f"{self.parity}, expected {parity % 2}"
            )


def _as_pattern(occ) -> OccupationPattern:
    if isinstance(occ, OccupationPattern):
        return occ
    return OccupationPattern.of(occ)


def _pairing(U: np.ndarray, V: np.ndarray) -> PairingMatrix:
    if U.shape[0] and np.linalg.cond(U) > CONDITION_LIMIT:
        raise OrthogonalVacuumError(
            "U is numerically singular: the vacuum is orthogonal to the "
            "reference vacuum"
        )
    Z = -np.linalg.solve(U.conj().T, V.conj().T)
    Z = (Z - Z.T) / 2
    overlap = float(np.sqrt(np.abs(np.linalg.det(U))))
    return PairingMatrix(Z=Z, overlap=overlap)


def thouless(basis: BogoliubovBasis) -> PairingMatrix:
    """
    Thouless pairing matrix Z = -(U^dagger)^-1 V^dagger of a vacuum.

    Z expresses the vacuum of `basis` as a Gaussian over the empty state.

    Raises:
        OrthogonalVacuumError: If cond(U) exceeds 1e12.
    """
    return _pairing(basis.U, basis.V)


def relative_amplitudes(b0: BogoliubovBasis, b1: BogoliubovBasis):
    """
    Blocks of the quasiparticles of b1 written in the quasiparticles of b0.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (U0^H U1 + V0^H V1, V0^T U1 + U0^T V1).
    """
    if b0.L != b1.L:
        raise InvalidDimensionError(
            f"Bases of different length: {b0.L} and {b1.L}"
        )
    U0, V0, U1, V1 = b0.U, b0.V, b1.U, b1.V
    Ub = U0.conj().T @ U1 + V0.conj().T @ V1
    Vb = V0.T @ U1 + U0.T @ V1
    return Ub, Vb


def relative_thouless(b0: BogoliubovBasis, b1: BogoliubovBasis) -> PairingMatrix:
    """Pairing matrix of the vacuum of b1 over the quasiparticles of b0."""
    return _pairing(*relative_amplitudes(b0, b1))


def onishi_overlap_sq(b0: BogoliubovBasis, b1: BogoliubovBasis) -> float:
    """|<vac0|vac1>|^2 = |det(U0^H U1 + V0^H V1)|; 0 for orthogonal vacua."""
    Ub, _ = relative_amplitudes(b0, b1)
    return float(np.abs(np.linalg.det(Ub)))


def excited_basis(
    basis: BogoliubovBasis, occ: Union[OccupationPattern, Sequence[int]]
) -> BogoliubovBasis:
    """
    Basis whose vacuum is prod_{mu in occ} gamma+_mu |vac>.

    Columns of occupied modes are particle-hole swapped, U' = V*, V' = U*,
    and carry energy -eps_mu.
    """
    occ = _as_pattern(occ)
    occ.check(basis.L)
    idx = sorted(occ.occupied)
    U, V, eps = basis.U.copy(), basis.V.copy(), basis.eps.copy()
    if idx:
        U = U.astype(complex)
        V = V.astype(complex)
        U[:, idx] = basis.V[:, idx].conj()
        V[:, idx] = basis.U[:, idx].conj()
        eps[idx] = -eps[idx]
    return replace(basis, U=U, V=V, eps=eps)


def excited_overlap_sq(
    b0: BogoliubovBasis,
    b1: BogoliubovBasis,
    occ: Union[OccupationPattern, Sequence[int]],
) -> float:
    """|<vac0| prod_{mu in occ} gamma1+_mu |vac1>|^2 by the column swap."""
    return onishi_overlap_sq(b0, excited_basis(b1, occ))


def pfaffian(m: np.ndarray, tol: float = 1e-12):
    """
    Pfaffian of an even-dimensional antisymmetric matrix.

    Parlett-Reid tridiagonalization with partial pivoting; every row and
    column interchange flips the sign of the result.

    Args:
        m (np.ndarray): Antisymmetric square matrix.
        tol (float): Allowed asymmetry relative to max(1, max|m|).

    Returns:
        The Pfaffian, real for real input.

    Raises:
        InvalidDimensionError: If m is not square or has odd dimension.
        InvalidInputError: If m + m^T exceeds the tolerance.
    """
    m = np.asarray(m)
    A = np.array(m, dtype=np.result_type(m.dtype, float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidDimensionError(f"Pfaffian needs a square matrix, got {A.shape}")
    n = A.shape[0]
    if n % 2:
        raise InvalidDimensionError(f"Pfaffian of odd dimension {n} is undefined")
    if n == 0:
        return A.dtype.type(1.0)
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A + A.T).max() > tol * scale:
        raise InvalidInputError("Pfaffian input is not antisymmetric")

    pf = A.dtype.type(1.0)
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(A[k + 1 :, k]).argmax())
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return A.dtype.type(0.0)
        pf = pf * A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2 :] / A[k, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, A[k + 2 :, k + 1])
            A[k + 2 :, k + 2 :] -= np.outer(A[k + 2 :, k + 1], tau)
    return pf


def vacuum_matrix_elements(
    b0: BogoliubovBasis, Z: PairingMatrix, modes: Sequence[int]
):
    """
    <vac0| gamma_{m_2n} ... gamma_{m_1} |vac1> = |<vac0|vac1>| Pf(Z[modes, modes]).

    Z must be the pairing matrix of vac1 over the quasiparticles of b0
    (see `relative_thouless`). The phase of <vac0|vac1> is dropped.

    Returns:
        The matrix element; 0 for an odd number of modes.
    """
    modes = [int(m) for m in modes]
    if len(modes) % 2:
        return 0.0
    if Z.Z.shape != (b0.L, b0.L):
        raise InvalidDimensionError(
            f"Pairing matrix {Z.Z.shape} does not match L={b0.L}"
        )
    OccupationPattern.of(modes).check(b0.L)
    sub = Z.Z[np.ix_(modes, modes)]
    logger.debug(f"Vacuum matrix element over {len(modes)} modes")
    return Z.overlap * pfaffian(sub)
