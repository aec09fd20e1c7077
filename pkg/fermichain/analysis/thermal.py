"""
Parity-projected thermal averages of the spin chain.

The physical Gibbs state is sum_p P_p exp(-beta H_p) P_p with P_p the
projector on fermion parity (-1)^p. In the quasiparticle basis of sector p,
exp(i pi N) = eta_p (-1)^p prod_mu (1 - 2 n_mu), and every trace reduces to
products of (1 +- exp(-2 beta eps)), evaluated here in log space.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from loguru import logger
from scipy.special import logsumexp

from fermichain.analysis.observables import vacuum_parity
from fermichain.core.bdg import BogoliubovBasis, diagonalize
from fermichain.core.model import BdGMatrix, ChainSpec, ParitySector, assemble_bdg
from fermichain.errors import InvalidRangeError
from fermichain.evolution.dynamics import NambuGreen, energy

SECTORS = (ParitySector.EVEN, ParitySector.ODD)


@dataclass(frozen=True)
class ThermalContext:
    """
    Both sector bases of a chain at inverse temperature beta.

    Attributes:
        beta (float): Inverse temperature.
        bases (Tuple[BogoliubovBasis, BogoliubovBasis]): Per-sector bases.
        eta (Tuple[int, int]): eta_p = (-1)^p <vac_p| exp(i pi N) |vac_p>.
        matrices (Tuple[BdGMatrix, BdGMatrix]): Per-sector BdG matrices.
    """

    beta: float
    bases: Tuple[BogoliubovBasis, BogoliubovBasis]
    eta: Tuple[int, int]
    matrices: Tuple[BdGMatrix, BdGMatrix]

    @property
    def L(self) -> int:
        return self.bases[0].L


def build_context(spec: ChainSpec, beta: float) -> ThermalContext:
    """
    Diagonalize both parity sectors and fix the vacuum parities.

    Raises:
        InvalidRangeError: If beta is negative or not finite.
    """
    if not np.isfinite(beta) or beta < 0:
        raise InvalidRangeError(f"beta must be finite and >= 0, got {beta}")
    matrices = tuple(assemble_bdg(spec, p) for p in SECTORS)
    bases = tuple(diagonalize(m) for m in matrices)
    eta = tuple(
        int((-1) ** int(p) * vacuum_parity(b)) for p, b in zip(SECTORS, bases)
    )
    logger.debug(f"Thermal context at beta={beta}: eta={eta}")
    return ThermalContext(beta=beta, bases=bases, eta=eta, matrices=matrices)


def _atanh_terms(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.arctanh(x)


def _sector_log_terms(ctx: ThermalContext, sector: ParitySector) -> float:
    """log of 2 Tr(P_p exp(-beta H_p))."""
    p = int(sector)
    eps = ctx.bases[p].eps
    x = np.exp(-2.0 * ctx.beta * eps)
    d = 2.0 * np.sum(_atanh_terms(x))
    tail = np.exp(-d)
    if ctx.eta[p] > 0:
        parity_term = np.log1p(tail)
    else:
        with np.errstate(divide="ignore"):
            parity_term = np.log(-np.expm1(-d))
    return float(ctx.beta * eps.sum() + np.sum(np.log1p(x)) + parity_term)


def partition_function(ctx: ThermalContext) -> float:
    """log Z of the parity-projected Gibbs state."""
    terms = [_sector_log_terms(ctx, p) for p in SECTORS]
    return float(logsumexp(terms) - np.log(2.0))


def sector_weight(ctx: ThermalContext, sector: ParitySector) -> float:
    """<P_p>: probability of parity sector p."""
    log_z = partition_function(ctx)
    return float(
        np.exp(_sector_log_terms(ctx, sector) - np.log(2.0) - log_z)
    )


def occupations(
    ctx: ThermalContext, sector: ParitySector, normalized: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projected occupations of every mode of a sector.

    Args:
        ctx (ThermalContext): Both sector bases at beta.
        sector (ParitySector): The sector p.
        normalized (bool): Divide the traces by Z. Without it the values are
            Tr(g+_mu g_mu P_p exp(-beta H_p)) and Tr(g_mu g+_mu P_p ...),
            which overflow for large beta * L.

    Returns:
        Tuple[np.ndarray, np.ndarray]: <g+_mu g_mu P_p> and <g_mu g+_mu P_p>.
            Normalized, their sum is <P_p> for every mu.
    """
    p = int(sector)
    beta = ctx.beta
    eps = ctx.bases[p].eps
    eta = ctx.eta[p]
    x = np.exp(-2.0 * beta * eps)
    log1p_x = np.log1p(x)
    at = _atanh_terms(x)

    # Leave-one-out sums with infinite (zero-mode) terms counted apart
    inf = np.isinf(at)
    finite_total = np.sum(at[~inf])
    others_inf = inf.sum() - inf.astype(int)
    own = np.where(inf, 0.0, at)
    d_mu = np.where(others_inf > 0, np.inf, 2.0 * (finite_total - own))
    tail = np.exp(-d_mu)

    base = (
        beta * eps.sum()
        + (log1p_x.sum() - log1p_x)
        - np.log(2.0)
    )
    if normalized:
        base = base - partition_function(ctx)
    n = np.exp(base - 2.0 * beta * eps) * (1.0 - eta * tail)
    nbar = np.exp(base) * (1.0 + eta * tail)
    return n, nbar


def gamma_occupation(
    ctx: ThermalContext, sector: ParitySector, mu: int
) -> Tuple[float, float]:
    """
    Trace-weighted (Tr(g+_mu g_mu P_p e^{-beta H_p}), Tr(g_mu g+_mu P_p ...)).

    Not divided by Z; `occupations` gives the normalized averages.
    """
    n, nbar = occupations(ctx, sector, normalized=False)
    return float(n[mu]), float(nbar[mu])


def sector_green(ctx: ThermalContext, sector: ParitySector) -> NambuGreen:
    """
    Projected Green functions of one sector.

    G_p = U diag(nbar) U^H + V* diag(n) V^T and
    F_p = U diag(nbar) V^H + V* diag(n) U^T, with weight <P_p>.
    """
    p = int(sector)
    b = ctx.bases[p]
    n, nbar = occupations(ctx, sector)
    U, V = b.U, b.V
    G = (U * nbar) @ U.conj().T + (V.conj() * n) @ V.T
    F = (U * nbar) @ V.conj().T + (V.conj() * n) @ U.T
    return NambuGreen(G=G, F=F, weight=sector_weight(ctx, sector))


def thermal_green(ctx: ThermalContext) -> NambuGreen:
    """Sector-weighted sum of the projected Green functions."""
    return sector_green(ctx, SECTORS[0]) + sector_green(ctx, SECTORS[1])


def energy_density(ctx: ThermalContext) -> float:
    """<H>/L with <H> = sum_p -Tr(H_p G_p)."""
    total = sum(
        energy(ctx.matrices[int(p)], sector_green(ctx, p)) for p in SECTORS
    )
    return float(total / ctx.L)
