"""
Dense diagonalization of BdG matrices into canonical Bogoliubov bases.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np
from loguru import logger

from fermichain.config import settings
from fermichain.core.model import (
    BdGMatrix,
    BoundaryCondition,
    ChainSpec,
    ParitySector,
    assemble_bdg,
)
from fermichain.errors import InvalidInputError, KernelParityError


@dataclass(frozen=True)
class BogoliubovBasis:
    """
    Quasiparticle basis gamma_mu = sum_j (U*_{j mu} c_j + V*_{j mu} c_j^dagger).

    The columns (U_mu, V_mu) are the positive-energy eigenvectors of the
    BdG matrix, so that H = sum_mu 2 eps_mu (gamma^dagger gamma - 1/2).

    Attributes:
        U (np.ndarray): L x L particle amplitudes.
        V (np.ndarray): L x L hole amplitudes.
        eps (np.ndarray): Energies eps_mu >= 0 in nondecreasing order.
        sector (ParitySector): Sector of the BdG matrix the basis diagonalizes.
        kernel (np.ndarray): 2L x d eigenvectors of the numerical kernel
            that still need canonicalization (empty once canonical).
        kernel_values (np.ndarray): Their eigenvalues.
    """

    U: np.ndarray
    V: np.ndarray
    eps: np.ndarray
    sector: ParitySector = ParitySector.EVEN
    kernel: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    kernel_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def L(self) -> int:
        return self.U.shape[0]

    @cached_property
    def unitary(self) -> np.ndarray:
        """The 2L x 2L transformation [[U, V*], [V, U*]]."""
        return np.block(
            [[self.U, self.V.conj()], [self.V, self.U.conj()]]
        )

    @property
    def ground_energy(self) -> float:
        """Energy of the Bogoliubov vacuum, -sum eps_mu."""
        return float(-np.sum(self.eps))

    @property
    def weights(self) -> np.ndarray:
        """Site weights |U_j mu|^2 + |V_j mu|^2, one column per mode."""
        return np.abs(self.U) ** 2 + np.abs(self.V) ** 2

    def canonical_defect(self) -> float:
        """Largest violation of the four canonical relations."""
        U, V = self.U, self.V
        eye = np.eye(self.L)
        return float(
            max(
                np.abs(U.conj().T @ U + V.conj().T @ V - eye).max(),
                np.abs(V.T @ U + U.T @ V).max(),
                np.abs(U @ U.conj().T + V.conj() @ V.T - eye).max(),
                np.abs(U @ V.conj().T + V.conj() @ U.T).max(),
            )
        )


def bare_vacuum(
    L: int, sector: ParitySector = ParitySector.EVEN
) -> BogoliubovBasis:
    """The basis gamma_mu = c_mu, whose vacuum is the empty state."""
    return BogoliubovBasis(
        U=np.eye(L), V=np.zeros((L, L)), eps=np.zeros(L), sector=sector
    )


def _check_bdg(m: BdGMatrix):
    scale = max(
        1.0,
        float(np.abs(m.A).max(initial=0.0)),
        float(np.abs(m.B).max(initial=0.0)),
    )
    if not np.allclose(m.A, m.A.T, rtol=0.0, atol=1e-12 * scale):
        raise InvalidInputError("BdG block A is not symmetric")
    if not np.allclose(m.B, -m.B.T, rtol=0.0, atol=1e-12 * scale):
        raise InvalidInputError("BdG block B is not antisymmetric")


def _orthonormalize_degenerate(X: np.ndarray, w: np.ndarray, tol: float):
    """QR pass over columns of X sharing an eigenvalue within tol."""
    X = X.copy()
    start = 0
    for stop in range(1, len(w) + 1):
        if stop == len(w) or w[stop] - w[start] > tol:
            if stop - start > 1:
                Q, R = np.linalg.qr(X[:, start:stop])
                X[:, start:stop] = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
            start = stop
    return X


def diagonalize(
    m: BdGMatrix, ker_threshold: Optional[float] = None
) -> BogoliubovBasis:
    """
    Diagonalize a BdG matrix into a canonical Bogoliubov basis.

    Only the positive half of the spectrum is taken from the eigensolver;
    the negative half is the particle-hole image (V*, U*) of the positive
    columns. Eigenvalues below ker_threshold (default
    ZERO_MODE_TOLERANCE * max(1, ||H||_2)) are treated as zero modes and
    rebuilt by `canonicalize_zero_modes`.

    Args:
        m (BdGMatrix): The BdG matrix.
        ker_threshold (Optional[float]): Absolute kernel threshold.

    Returns:
        BogoliubovBasis: Canonical basis with eps in nondecreasing order.

    Raises:
        InvalidInputError: If A is not symmetric or B not antisymmetric.
        KernelParityError: If the numerical kernel is odd-dimensional or
            the rebuilt zero modes are not annihilated by H.
    """
    _check_bdg(m)
    L = m.L
    H = m.hamiltonian
    if ker_threshold is None:
        ker_threshold = settings.ZERO_MODE_TOLERANCE * max(1.0, m.norm)

    w, X = np.linalg.eigh(H)
    pos = w > ker_threshold
    ker = np.abs(w) <= ker_threshold
    d = int(ker.sum())
    logger.debug(
        f"Diagonalized {2 * L}x{2 * L} BdG matrix: kernel dimension {d}"
    )
    if d % 2 or int(pos.sum()) + d // 2 != L:
        raise KernelParityError(
            f"Kernel of dimension {d} with {int(pos.sum())} positive "
            f"eigenvalues is inconsistent with L={L}"
        )

    Xp = _orthonormalize_degenerate(X[:, pos], w[pos], ker_threshold)
    basis = BogoliubovBasis(
        U=Xp[:L],
        V=Xp[L:],
        eps=w[pos],
        sector=m.sector,
        kernel=X[:, ker],
        kernel_values=w[ker],
    )
    return canonicalize_zero_modes(basis, ker_threshold)


def canonicalize_zero_modes(
    basis: BogoliubovBasis, ker_threshold: float
) -> BogoliubovBasis:
    """
    Rebuild the zero-energy columns so the whole basis is canonical.

    The zero subspace collects the stored kernel vectors together with every
    column (and its particle-hole partner) whose eps lies below
    ker_threshold. The swap matrix restricted to that subspace splits it
    into swap-even vectors (a, a) and swap-odd vectors (b, -b), which are
    paired into new columns U = (a + b)/sqrt(2), V = (a - b)/sqrt(2) with
    eps = 0.

    Args:
        basis (BogoliubovBasis): Basis with possibly unresolved zero modes.
        ker_threshold (float): Absolute energy below which a mode is zero.

    Returns:
        BogoliubovBasis: The canonical basis, unchanged if no mode is zero.

    Raises:
        InvalidInputError: If the zero subspace is not real.
        KernelParityError: If the subspace is odd-dimensional, the swap
            parities are unbalanced or the rebuilt columns carry energy.
    """
    L = basis.L
    small = basis.eps < ker_threshold
    if not small.any() and basis.kernel.size == 0:
        return basis

    Xs = np.vstack([basis.U[:, small], basis.V[:, small]])
    partners = np.vstack([basis.V[:, small].conj(), basis.U[:, small].conj()])
    kernel = basis.kernel.reshape(2 * L, -1)
    Y = np.hstack([kernel, Xs, partners])
    lam = np.concatenate(
        [basis.kernel_values, basis.eps[small], -basis.eps[small]]
    )
    d = Y.shape[1]
    if d % 2:
        raise KernelParityError(f"Numerical kernel has odd dimension {d}")
    if np.abs(Y.imag).max(initial=0.0) > 1e-12:
        raise InvalidInputError("Zero-mode canonicalization needs real modes")
    Y = Y.real

    # Swap parity inside the zero subspace
    S_K = Y[:L].T @ Y[L:] + Y[L:].T @ Y[:L]
    s_vals, s_vecs = np.linalg.eigh((S_K + S_K.T) / 2)
    odd = s_vecs[:, s_vals < 0]
    even = s_vecs[:, s_vals > 0]
    if even.shape[1] != d // 2 or odd.shape[1] != d // 2:
        raise KernelParityError(
            f"Zero subspace has {even.shape[1]} swap-even and "
            f"{odd.shape[1]} swap-odd vectors"
        )

    coeffs = (even + odd) / np.sqrt(2.0)
    residual = np.linalg.norm(lam[:, None] * coeffs, axis=0).max()
    scale = max(1.0, float(np.max(basis.eps, initial=0.0)))
    if residual > settings.ZERO_MODE_RESIDUAL * scale:
        raise KernelParityError(
            f"Rebuilt zero modes have residual {residual:.3e}; "
            f"threshold {ker_threshold:.3e} is too large"
        )
    Z = Y @ coeffs

    keep = ~small
    U = np.hstack([Z[:L], basis.U[:, keep]])
    V = np.hstack([Z[L:], basis.V[:, keep]])
    eps = np.concatenate([np.zeros(d // 2), basis.eps[keep]])
    order = np.argsort(eps, kind="stable")
    if d:
        logger.debug(f"Canonicalized {d // 2} zero mode(s)")
    return replace(
        basis,
        U=U[:, order],
        V=V[:, order],
        eps=eps[order],
        kernel=np.zeros((0, 0)),
        kernel_values=np.zeros(0),
    )


def ipr(basis: BogoliubovBasis) -> np.ndarray:
    """Inverse participation ratio sum_j (|U_j mu|^2 + |V_j mu|^2)^2 per mode."""
    return np.sum(basis.weights**2, axis=0)


def localization_centers(basis: BogoliubovBasis) -> np.ndarray:
    """Site of largest weight of each mode."""
    return np.argmax(basis.weights, axis=0)


def envelope_slopes(
    basis: BogoliubovBasis, periodic: bool = False
) -> np.ndarray:
    """
    Least-squares slope of log sqrt(weight) against distance from the center.

    A negative slope -1/xi signals an exponentially localized mode.

    Args:
        basis (BogoliubovBasis): The basis.
        periodic (bool): Measure distances around the ring.

    Returns:
        np.ndarray: One slope per mode.
    """
    L = basis.L
    w = basis.weights
    centers = localization_centers(basis)
    dist = np.abs(np.arange(L)[:, None] - centers[None, :]).astype(float)
    if periodic:
        dist = np.minimum(dist, L - dist)
    y = 0.5 * np.log(np.maximum(w, np.finfo(float).tiny))
    dc = dist - dist.mean(axis=0)
    yc = y - y.mean(axis=0)
    return np.sum(dc * yc, axis=0) / np.sum(dc * dc, axis=0)


def obc_majorana_gap(spec: ChainSpec) -> float:
    """
    Smallest eps_mu of an open chain.

    Raises:
        InvalidInputError: If the chain is not open.
    """
    if spec.bc != BoundaryCondition.OBC:
        raise InvalidInputError("The Majorana gap is defined for open chains")
    return float(diagonalize(assemble_bdg(spec)).eps.min())
