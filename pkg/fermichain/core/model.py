"""
Chain specifications and the Nambu one-body matrix of the fermionized
XY / transverse-field Ising chain

    H = -sum_j (Jx_j sx_j sx_{j+1} + Jy_j sy_j sy_{j+1}) - sum_j h_j sz_j

with Jx_j = J_j (1 + kappa) / 2 and Jy_j = J_j (1 - kappa) / 2.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from fermichain.errors import InvalidRangeError, InvalidSizeError


class BoundaryCondition(str, Enum):
    """Spin boundary condition of the chain."""

    OBC = "obc"
    PBC = "pbc"


class ParitySector(IntEnum):
    """
    Fermion parity sector p of the PBC spin chain.

    The even sector (p=0) carries antiperiodic fermions, the odd sector
    (p=1) periodic ones. The (L,1) corner elements of A and B are assembled
    with the bulk sign times (-1)^(p+1).
    """

    EVEN = 0
    ODD = 1

    @property
    def boundary_sign(self) -> int:
        return 1 if self == ParitySector.EVEN else -1


class ChainSpec(BaseModel):
    """
    A clean or disordered chain.

    Attributes:
        L (int): Number of sites.
        J (List[float]): Bond couplings J_1..J_L; J_L closes the ring.
        kappa (float): Anisotropy.
        h (List[float]): Transverse fields h_1..h_L.
        bc (BoundaryCondition): Spin boundary condition.
        seed (Optional[int]): Seed the disorder was drawn with, if any.
    """

    model_config = ConfigDict(frozen=True)

    L: int = Field(..., ge=1)
    J: List[float]
    kappa: float = 1.0
    h: List[float]
    bc: BoundaryCondition = BoundaryCondition.PBC
    seed: Optional[int] = None

    @model_validator(mode="after")
    def check_lengths(self) -> "ChainSpec":
        if len(self.J) != self.L or len(self.h) != self.L:
            raise ValueError(
                f"J and h must have length L={self.L}, "
                f"got {len(self.J)} and {len(self.h)}"
            )
        return self

    @property
    def couplings(self) -> np.ndarray:
        """Effective bond couplings; J_L is exactly 0 for OBC."""
        J = np.array(self.J, dtype=float)
        if self.bc == BoundaryCondition.OBC:
            J[-1] = 0.0
        return J

    @property
    def fields(self) -> np.ndarray:
        return np.array(self.h, dtype=float)

    def with_fields(self, h) -> "ChainSpec":
        """Return a copy with the transverse fields replaced."""
        h = np.broadcast_to(np.asarray(h, dtype=float), (self.L,))
        return self.model_copy(update={"h": [float(x) for x in h]})

    def with_couplings(self, J) -> "ChainSpec":
        """Return a copy with the bond couplings replaced."""
        J = np.broadcast_to(np.asarray(J, dtype=float), (self.L,))
        return self.model_copy(update={"J": [float(x) for x in J]})

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        return cls.model_validate_json(text)


def make_uniform(
    L: int,
    J: float = 1.0,
    kappa: float = 1.0,
    h: float = 0.0,
    bc: BoundaryCondition = BoundaryCondition.PBC,
) -> ChainSpec:
    """
    Build a translation-invariant chain.

    Args:
        L (int): Number of sites, at least 2.
        J (float): Bond coupling.
        kappa (float): Anisotropy.
        h (float): Transverse field.
        bc (BoundaryCondition): Boundary condition.

    Returns:
        ChainSpec: The uniform chain.

    Raises:
        InvalidSizeError: If L < 2.
    """
    if L < 2:
        raise InvalidSizeError(f"Chain length must be at least 2, got {L}")
    return ChainSpec(
        L=L,
        J=[float(J)] * L,
        kappa=kappa,
        h=[float(h)] * L,
        bc=BoundaryCondition(bc),
    )


def make_disordered(
    L: int,
    J_range: Tuple[float, float],
    h_range: Tuple[float, float],
    kappa: float = 1.0,
    seed: int = 0,
    bc: BoundaryCondition = BoundaryCondition.PBC,
) -> ChainSpec:
    """
    Draw a disordered chain with i.i.d. uniform couplings and fields.

    Couplings are drawn first, then fields, from a PCG64 generator seeded
    with `seed`, so a given seed always yields the same chain.

    Args:
        L (int): Number of sites, at least 2.
        J_range (Tuple[float, float]): (J_min, J_max) with 0 < J_min <= J_max.
        h_range (Tuple[float, float]): (h_min, h_max) with 0 <= h_min <= h_max.
        kappa (float): Anisotropy.
        seed (int): Disorder seed.
        bc (BoundaryCondition): Boundary condition.

    Returns:
        ChainSpec: The disordered chain, with its seed recorded.

    Raises:
        InvalidSizeError: If L < 2.
        InvalidRangeError: If a range is inverted or J_min <= 0.
    """
    if L < 2:
        raise InvalidSizeError(f"Chain length must be at least 2, got {L}")
    J_min, J_max = J_range
    h_min, h_max = h_range
    if J_min <= 0:
        raise InvalidRangeError(f"J_min must be positive, got {J_min}")
    if J_max < J_min:
        raise InvalidRangeError(f"J range is inverted: [{J_min}, {J_max}]")
    if h_min < 0 or h_max < h_min:
        raise InvalidRangeError(f"Invalid h range: [{h_min}, {h_max}]")

    rng = np.random.Generator(np.random.PCG64(seed))
    J = rng.uniform(J_min, J_max, size=L)
    h = rng.uniform(h_min, h_max, size=L)
    logger.debug(f"Drew disordered chain L={L} with PCG64 seed {seed}")
    return ChainSpec(
        L=L,
        J=J.tolist(),
        kappa=kappa,
        h=h.tolist(),
        bc=BoundaryCondition(bc),
        seed=seed,
    )


@dataclass(frozen=True)
class BdGMatrix:
    """
    Real 2L x 2L BdG matrix [[A, B], [-B, -A]] of one parity sector.

    Attributes:
        A (np.ndarray): L x L symmetric normal block.
        B (np.ndarray): L x L antisymmetric pairing block.
        sector (ParitySector): The sector the corner signs belong to.
    """

    A: np.ndarray
    B: np.ndarray
    sector: ParitySector = ParitySector.EVEN

    @property
    def L(self) -> int:
        return self.A.shape[0]

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return np.block([[self.A, self.B], [-self.B, -self.A]])

    @cached_property
    def norm(self) -> float:
        """Spectral norm of the full matrix."""
        return float(np.linalg.norm(self.hamiltonian, 2)) if self.L else 0.0


def assemble_bdg(
    spec: ChainSpec, sector: ParitySector = ParitySector.EVEN
) -> BdGMatrix:
    """
    Assemble the BdG blocks of a chain in one parity sector.

    A_jj = h_j, A_{j,j+1} = A_{j+1,j} = -J_j/2, B_{j,j+1} = -kappa J_j/2 and
    B_{j+1,j} = +kappa J_j/2. For PBC the ring-closing bond enters with
    A_{L,1} = A_{1,L} = (-1)^p J_L/2 and B_{L,1} = -B_{1,L} = (-1)^p kappa J_L/2.
    OBC yields the same matrices in both sectors.

    Args:
        spec (ChainSpec): The chain.
        sector (ParitySector): Fermion parity sector.

    Returns:
        BdGMatrix: The assembled blocks.
    """
    sector = ParitySector(sector)
    L = spec.L
    J = spec.couplings
    kappa = spec.kappa

    A = np.diag(spec.fields)
    B = np.zeros((L, L))
    for j in range(L - 1):
        A[j, j + 1] -= J[j] / 2
        A[j + 1, j] -= J[j] / 2
        B[j, j + 1] -= kappa * J[j] / 2
        B[j + 1, j] += kappa * J[j] / 2

    if spec.bc == BoundaryCondition.PBC and J[-1] != 0.0:
        if L < 2:
            raise InvalidSizeError("A periodic chain needs at least 2 sites")
        # Accumulate so that L=2 adds onto the bulk bond
        s = sector.boundary_sign
        A[L - 1, 0] += s * J[-1] / 2
        A[0, L - 1] += s * J[-1] / 2
        B[L - 1, 0] += s * kappa * J[-1] / 2
        B[0, L - 1] -= s * kappa * J[-1] / 2

    return BdGMatrix(A=A, B=B, sector=sector)


def swap_matrix(L: int) -> np.ndarray:
    """Return the 2L x 2L swap matrix [[0, 1], [1, 0]] in L x L blocks."""
    eye = np.eye(L)
    zero = np.zeros((L, L))
    return np.block([[zero, eye], [eye, zero]])
