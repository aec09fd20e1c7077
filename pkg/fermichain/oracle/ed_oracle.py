"""
Dense exact diagonalization of the spin chain, the ground truth for the
free-fermion machinery at small L.

Basis states are sz product states indexed by sum_j b_j 2^j, where b_j = 1
means spin down (n_j = 1). Site 0 is the least significant bit.
"""

from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import product
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sparse
from loguru import logger
from scipy.special import logsumexp, xlogy

from fermichain.analysis.observables import vacuum_parity
from fermichain.config import settings
from fermichain.core.bdg import diagonalize
from fermichain.core.gaussian import OccupationPattern
from fermichain.core.model import (
    BoundaryCondition,
    ChainSpec,
    ParitySector,
    assemble_bdg,
)
from fermichain.errors import (
    EmptyBlockError,
    InvalidInputError,
    SizeLimitError,
)

PAULI = {
    "i": sparse.identity(2, format="csr"),
    "x": sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])),
    "y": sparse.csr_matrix(np.array([[0.0, -1j], [1j, 0.0]])),
    "z": sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]])),
}
# |0><1|: removes a down spin, i.e. annihilates the fermion on the site
LOWER = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))

PauliString = Sequence[Tuple[int, str]]


def _check_size(L: int, limit: Optional[int] = None):
    limit = settings.ED_MAX_SITES if limit is None else limit
    if L > limit:
        raise SizeLimitError(
            f"Exact diagonalization is limited to L <= {limit}, got {L}"
        )


def site_operator(L: int, j: int, op, string: bool = False):
    """
    Embed a 2x2 operator on site j of an L-site chain.

    Args:
        L (int): Chain length.
        j (int): Site, 0-based.
        op: Pauli tag or 2x2 (sparse) matrix.
        string (bool): Multiply by the Jordan-Wigner string prod_{l<j} sz_l.
    """
    if not 0 <= j < L:
        raise InvalidInputError(f"Site {j} outside 0..{L - 1}")
    op = PAULI[op.lower()] if isinstance(op, str) else sparse.csr_matrix(op)
    low = PAULI["z"] if string else PAULI["i"]
    factors = (
        [PAULI["i"]] * (L - 1 - j) + [op] + [low] * j
    )
    return reduce(lambda a, b: sparse.kron(a, b, format="csr"), factors)


def pauli_string(L: int, ops: PauliString):
    """
    Sparse product of Pauli operators, e.g. [(0, "x"), (3, "x")].

    Raises:
        InvalidInputError: On an unknown tag or a site outside the chain.
    """
    result = sparse.identity(2**L, format="csr")
    for j, tag in ops:
        if tag.lower() not in PAULI:
            raise InvalidInputError(f"Unknown Pauli tag {tag!r}")
        result = result @ site_operator(L, int(j), tag)
    return result


def fermion_operators(L: int):
    """Jordan-Wigner annihilators c_j = prod_{l<j} sz_l sigma+_j."""
    return [site_operator(L, j, LOWER, string=True) for j in range(L)]


def occupation_bits(L: int) -> np.ndarray:
    """2^L x L array of the bits b_j of every basis state."""
    idx = np.arange(2**L)
    return (idx[:, None] >> np.arange(L)[None, :]) & 1


def parity_diagonal(L: int) -> np.ndarray:
    """Diagonal of exp(i pi N) = prod_j sz_j."""
    return 1 - 2 * (occupation_bits(L).sum(axis=1) % 2)


@dataclass(frozen=True)
class DenseSpinSystem:
    """
    The 2^L x 2^L spin Hamiltonian of a chain.

    Attributes:
        spec (ChainSpec): The chain.
        H (np.ndarray): Real symmetric Hamiltonian.
    """

    spec: ChainSpec
    H: np.ndarray

    @property
    def L(self) -> int:
        return self.spec.L

    @cached_property
    def parity(self) -> np.ndarray:
        return parity_diagonal(self.L)

    @cached_property
    def eigh(self) -> Tuple[np.ndarray, np.ndarray]:
        logger.debug(f"Dense eigh of a {self.H.shape[0]}-dimensional system")
        return np.linalg.eigh(self.H)

    def parity_leakage(self) -> float:
        """Largest matrix element between the two parity blocks."""
        even = self.parity > 0
        return float(np.abs(self.H[np.ix_(even, ~even)]).max(initial=0.0))


def build(spec: ChainSpec) -> DenseSpinSystem:
    """
    Assemble H = -sum_j (Jx_j sx sx + Jy_j sy sy) - sum_j h_j sz.

    Jx = J (1 + kappa) / 2 and Jy = J (1 - kappa) / 2; the ring bond
    (L-1, 0) is present only for periodic chains.

    Raises:
        SizeLimitError: If L exceeds ED_MAX_SITES.
    """
    L = spec.L
    _check_size(L)
    J = spec.couplings
    h = spec.fields
    kappa = spec.kappa
    dim = 2**L
    H = sparse.csr_matrix((dim, dim), dtype=float)
    for j in range(L):
        H = H - h[j] * site_operator(L, j, "z")
    bonds = L if spec.bc == BoundaryCondition.PBC and L > 1 else L - 1
    for j in range(bonds):
        k = (j + 1) % L
        jx = J[j] * (1 + kappa) / 2
        jy = J[j] * (1 - kappa) / 2
        xx = site_operator(L, j, "x") @ site_operator(L, k, "x")
        yy = site_operator(L, j, "y") @ site_operator(L, k, "y")
        H = H - jx * xx - (jy * yy).real
    return DenseSpinSystem(spec=spec, H=H.toarray().real)


def spectrum(spec: ChainSpec) -> np.ndarray:
    """All 2^L eigenvalues in ascending order."""
    return build(spec).eigh[0]


def _sector_mask(system: DenseSpinSystem, parity: Optional[int]):
    if parity is None:
        return np.ones(system.H.shape[0], dtype=bool)
    return system.parity == (1 if int(parity) % 2 == 0 else -1)


def ground(
    spec: ChainSpec, parity: Optional[int] = None
) -> Tuple[float, np.ndarray]:
    """
    Lowest eigenpair, optionally restricted to one fermion parity.

    Returns:
        Tuple[float, np.ndarray]: E0 and the normalized state.
    """
    system = build(spec)
    if parity is None:
        w, X = system.eigh
        return float(w[0]), X[:, 0]
    mask = _sector_mask(system, parity)
    w, X = np.linalg.eigh(system.H[np.ix_(mask, mask)])
    psi = np.zeros(system.H.shape[0])
    psi[mask] = X[:, 0]
    return float(w[0]), psi


def log_partition(spec: ChainSpec, beta: float) -> float:
    """log Tr exp(-beta H) over the full spin space."""
    _check_size(spec.L, settings.ED_THERMAL_MAX_SITES)
    return float(logsumexp(-beta * spectrum(spec)))


def _observable(system: DenseSpinSystem, tag: Union[str, PauliString]):
    if isinstance(tag, str):
        if tag.lower() != "energy":
            raise InvalidInputError(f"Unknown observable {tag!r}")
        return system.H
    return pauli_string(system.L, tag).toarray()


def thermal_average(
    spec: ChainSpec, beta: float, tag: Union[str, PauliString] = "energy"
) -> float:
    """
    Tr(O exp(-beta H)) / Z for "energy" or a Pauli string.

    Raises:
        SizeLimitError: If L exceeds ED_THERMAL_MAX_SITES.
    """
    _check_size(spec.L, settings.ED_THERMAL_MAX_SITES)
    system = build(spec)
    w, X = system.eigh
    weights = np.exp(-beta * w - logsumexp(-beta * w))
    O = _observable(system, tag)
    diag = np.einsum("in,ij,jn->n", X.conj(), O, X)
    return float(np.real(np.sum(weights * diag)))


def correlator(
    spec: ChainSpec,
    ops: str,
    sites: Sequence[int],
    parity: Optional[int] = None,
) -> float:
    """
    Ground-state expectation of a Pauli string, e.g. ("xx", (0, 4)).

    Args:
        spec (ChainSpec): The chain.
        ops (str): One Pauli tag per site.
        sites (Sequence[int]): The sites, 0-based.
        parity (Optional[int]): Restrict the ground state to one parity.
    """
    if len(ops) != len(sites):
        raise InvalidInputError(
            f"{len(ops)} operators for {len(sites)} sites"
        )
    _, psi = ground(spec, parity)
    O = pauli_string(spec.L, list(zip(sites, ops)))
    return float(np.real(psi.conj() @ (O @ psi)))


def state_entropy(
    psi: np.ndarray, L: int, block: Sequence[int], bits: bool = False
) -> float:
    """Entanglement entropy of a block of sites in a pure state."""
    block = [int(s) for s in block]
    if not block:
        raise EmptyBlockError("Entanglement block has no sites")
    if any(not 0 <= s < L for s in block):
        raise InvalidInputError(f"Block {block} outside 0..{L - 1}")
    # C-order axis a carries site L - 1 - a
    axes = [L - 1 - s for s in block]
    rest = [a for a in range(L) if a not in axes]
    tensor = np.asarray(psi).reshape((2,) * L).transpose(axes + rest)
    s = np.linalg.svd(
        tensor.reshape(2 ** len(block), -1), compute_uv=False
    )
    p = s**2
    S = max(-float(np.sum(xlogy(p, p))), 0.0)
    return S / np.log(2) if bits else S


def reduced_entropy(
    spec: ChainSpec,
    block: Sequence[int],
    parity: Optional[int] = None,
    bits: bool = False,
) -> float:
    """Entanglement entropy of a block in the (parity-restricted) ground state."""
    _, psi = ground(spec, parity)
    return state_entropy(psi, spec.L, block, bits)


def fock_state(
    U: np.ndarray,
    V: np.ndarray,
    occupied: Union[OccupationPattern, Sequence[int]] = (),
) -> np.ndarray:
    """
    Spin-basis vector of prod_{mu in occ} gamma+_mu |vac>.

    The vacuum is the null vector of sum_mu gamma+_mu gamma_mu with
    gamma_mu = sum_j (U*_{j mu} c_j + V*_{j mu} c+_j).

    Raises:
        InvalidInputError: If the columns do not define a vacuum.
    """
    L = U.shape[0]
    _check_size(L)
    if not isinstance(occupied, OccupationPattern):
        occupied = OccupationPattern.of(occupied)
    occupied.check(L)
    cs = fermion_operators(L)
    gammas = [
        sum(
            np.conj(U[j, mu]) * cs[j] + np.conj(V[j, mu]) * cs[j].conj().T
            for j in range(L)
        )
        for mu in range(L)
    ]
    number = sum(g.conj().T @ g for g in gammas).toarray()
    w, X = np.linalg.eigh((number + number.conj().T) / 2)
    if abs(w[0]) > 1e-8 or (len(w) > 1 and w[1] < 0.5):
        raise InvalidInputError(
            f"Columns do not define a unique vacuum: lowest levels {w[:2]}"
        )
    psi = X[:, 0]
    for mu in sorted(occupied.occupied):
        psi = gammas[mu].conj().T @ psi
    return psi / np.linalg.norm(psi)


def fock_energies(spec: ChainSpec) -> np.ndarray:
    """
    Parity-filtered free-fermion spectrum of the spin chain.

    A Fock state of sector p, with energy E0_p + sum 2 n_mu eps_mu, is kept
    when its parity, that of the vacuum times (-1)^{sum n}, equals (-1)^p.
    """
    L = spec.L
    _check_size(L)
    n = np.array(list(product((0, 1), repeat=L)), dtype=float)
    energies = []
    for p in (ParitySector.EVEN, ParitySector.ODD):
        basis = diagonalize(assemble_bdg(spec, p))
        parity = vacuum_parity(basis) * (1 - 2 * (n.sum(axis=1) % 2))
        E = basis.ground_energy + 2.0 * n @ basis.eps
        energies.append(E[parity == p.boundary_sign])
    return np.sort(np.concatenate(energies))


def state_overlap(
    spec_a: ChainSpec,
    spec_b: ChainSpec,
    occ_a: Sequence[int] = (),
    occ_b: Sequence[int] = (),
    sector: ParitySector = ParitySector.EVEN,
) -> complex:
    """<Fock_a|Fock_b> of two excited Bogoliubov vacua of one sector."""
    if spec_a.L != spec_b.L:
        raise InvalidInputError(
            f"Chains of different length: {spec_a.L} and {spec_b.L}"
        )
    ba = diagonalize(assemble_bdg(spec_a, sector))
    bb = diagonalize(assemble_bdg(spec_b, sector))
    return complex(
        np.vdot(fock_state(ba.U, ba.V, occ_a), fock_state(bb.U, bb.V, occ_b))
    )
