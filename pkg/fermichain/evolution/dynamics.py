"""
Time-dependent BdG propagation, equal-time Green functions and the
observables of quenches and anneals.

Columns X = [U; V] obey i dX/dt = 2 H(t) X (hbar = 1).
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from fermichain.config import settings
from fermichain.core.bdg import BogoliubovBasis, diagonalize
from fermichain.core.gaussian import onishi_overlap_sq
from fermichain.core.model import (
    BdGMatrix,
    BoundaryCondition,
    ChainSpec,
    ParitySector,
)
from fermichain.core.uniform import Dispersion, k_grid
from fermichain.errors import (
    InconsistentGreenError,
    InvalidInputError,
    InvalidScheduleError,
    StepSizeError,
)
from fermichain.evolution.schedules import Schedule


@dataclass(frozen=True)
class NambuGreen:
    """
    Equal-time one-body correlators G = <c c^dagger> and F = <c c>.

    Attributes:
        G (np.ndarray): Normal block, Hermitian.
        F (np.ndarray): Anomalous block, antisymmetric.
        t (float): Time stamp.
        weight (float): Trace weight; 1 for a normalized state, the sector
            probability for one parity sector of a thermal state.
    """

    G: np.ndarray
    F: np.ndarray
    t: float = 0.0
    weight: float = 1.0

    @property
    def L(self) -> int:
        return self.G.shape[0]

    def nambu(self) -> np.ndarray:
        """The 2L x 2L matrix [[G, F], [F^H, w - G^T]] = <Psi Psi^H>."""
        eye = np.eye(self.L)
        return np.block(
            [
                [self.G, self.F],
                [self.F.conj().T, self.weight * eye - self.G.T],
            ]
        )

    def defect(self) -> float:
        """Largest violation of G = G^H and F = -F^T."""
        return float(
            max(
                np.abs(self.G - self.G.conj().T).max(initial=0.0),
                np.abs(self.F + self.F.T).max(initial=0.0),
            )
        )

    def __add__(self, other: "NambuGreen") -> "NambuGreen":
        return NambuGreen(
            G=self.G + other.G,
            F=self.F + other.F,
            t=self.t,
            weight=self.weight + other.weight,
        )


@dataclass(frozen=True)
class MajoranaCorrelation:
    """
    Real antisymmetric A with <a_m a_n> = delta_mn + i A_mn.

    The Majoranas are ordered (A_1..A_L, B_1..B_L) with A_j = c_j + c_j^dagger
    and B_j = i(c_j^dagger - c_j).
    """

    Amat: np.ndarray
    t: float = 0.0

    @property
    def L(self) -> int:
        return self.Amat.shape[0] // 2


@dataclass(frozen=True)
class StepPolicy:
    """
    Step-size policy shared by the integrators.

    Each output interval is split into n equal steps with
    n >= span * max||2H|| / safety and, when dt_max is set,
    n >= span / dt_max.
    """

    dt_max: Optional[float] = None
    safety: float = field(default_factory=lambda: settings.STEP_SAFETY)
    method: str = field(default_factory=lambda: settings.DEFAULT_PROPAGATOR)
    drift_limit: float = field(
        default_factory=lambda: settings.UNITARITY_DRIFT_LIMIT
    )

    def __post_init__(self):
        if self.method not in ("expm", "rk4"):
            raise InvalidInputError(f"Unknown propagator '{self.method}'")
        if self.dt_max is not None and self.dt_max <= 0:
            raise InvalidInputError(f"dt_max must be positive, got {self.dt_max}")

    def steps(self, span: float, bound: float) -> int:
        n = int(np.ceil(span * bound / self.safety))
        if self.dt_max is not None:
            n = max(n, int(np.ceil(span / self.dt_max - 1e-12)))
        return max(n, 1)


@dataclass(frozen=True)
class EvolvedBasis:
    """Snapshot (U(t), V(t)) of propagated Bogoliubov columns."""

    t: float
    U: np.ndarray
    V: np.ndarray
    sector: ParitySector = ParitySector.EVEN

    @property
    def L(self) -> int:
        return self.U.shape[0]

    def canonical_defect(self) -> float:
        return self.to_basis().canonical_defect()

    def to_basis(self) -> BogoliubovBasis:
        return BogoliubovBasis(
            U=self.U, V=self.V, eps=np.zeros(self.L), sector=self.sector
        )


def _check_grid(t_grid) -> np.ndarray:
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0.0:
        raise InvalidScheduleError("Time grid must start at t = 0")
    if np.any(np.diff(t_grid) <= 0):
        raise InvalidScheduleError("Time grid must be strictly increasing")
    return t_grid


def gershgorin_bound(m: BdGMatrix) -> float:
    """Upper bound on ||2H||_2 from the largest absolute row sum."""
    return 2.0 * float(np.abs(m.hamiltonian).sum(axis=1).max(initial=0.0))


def expm_step(H: np.ndarray, dt: float) -> np.ndarray:
    """exp(-2i H dt) for real symmetric H."""
    w, Q = np.linalg.eigh(H)
    return (Q * np.exp(-2j * w * dt)) @ Q.T


def _rk4_step(hfun, t: float, X: np.ndarray, dt: float) -> np.ndarray:
    k1 = -2j * hfun(t) @ X
    k2 = -2j * hfun(t + dt / 2) @ (X + dt / 2 * k1)
    k3 = -2j * hfun(t + dt / 2) @ (X + dt / 2 * k2)
    k4 = -2j * hfun(t + dt) @ (X + dt * k3)
    return X + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve_columns(
    X: np.ndarray,
    spec: ChainSpec,
    schedule: Schedule,
    t_grid: Sequence[float],
    policy: Optional[StepPolicy] = None,
    sector: ParitySector = ParitySector.EVEN,
    t0: float = 0.0,
) -> Iterator[np.ndarray]:
    """
    Yield X(t) for every t in t_grid, starting from X at t_grid[0].

    Schedule time is shifted by t0, so the columns see H(t0 + t).
    """
    policy = policy or StepPolicy()
    t_grid = np.asarray(t_grid, dtype=float)

    def hfun(t):
        return schedule.bdg_at(spec, t0 + t, sector).hamiltonian

    def bound(t):
        return gershgorin_bound(schedule.bdg_at(spec, t0 + t, sector))

    X = np.array(X, dtype=complex)
    yield X.copy()
    cached = None
    for t_a, t_b in zip(t_grid[:-1], t_grid[1:]):
        span = t_b - t_a
        if schedule.static and policy.method == "expm":
            n = 1
        else:
            n = policy.steps(span, max(bound(t_a), bound(t_b)))
        dt = span / n
        logger.debug(f"Propagating [{t_a:.4g}, {t_b:.4g}] in {n} steps")
        for i in range(n):
            t = t_a + i * dt
            if policy.method == "rk4":
                X = _rk4_step(hfun, t, X, dt)
            elif schedule.static:
                if cached is None or cached[0] != dt:
                    cached = (dt, expm_step(hfun(0.0), dt))
                X = cached[1] @ X
            else:
                X = expm_step(hfun(t + dt / 2), dt) @ X
        yield X.copy()


def propagate(
    b0: BogoliubovBasis,
    spec: ChainSpec,
    schedule: Schedule,
    t_grid: Sequence[float],
    policy: Optional[StepPolicy] = None,
    sector: Optional[ParitySector] = None,
    check_initial: bool = True,
) -> List[EvolvedBasis]:
    """
    Integrate the time-dependent BdG equations i dX/dt = 2 H(t) X.

    The default propagator applies exp(-2i H(t + dt/2) dt) per step, exact
    for constant H; "rk4" is the classical Runge-Kutta scheme. The canonical
    relations are monitored at every output time and never re-imposed.

    Args:
        b0 (BogoliubovBasis): Initial columns.
        spec (ChainSpec): The chain the schedule acts on.
        schedule (Schedule): Time dependence of the couplings.
        t_grid (Sequence[float]): Output times, strictly increasing from 0.
        policy (Optional[StepPolicy]): Step-size policy.
        sector (Optional[ParitySector]): Defaults to the sector of b0.
        check_initial (bool): Require b0 to diagonalize H(0) to 1e-8.

    Returns:
        List[EvolvedBasis]: One snapshot per output time.

    Raises:
        InvalidScheduleError: On a malformed time grid.
        InvalidInputError: If check_initial fails.
        StepSizeError: If the canonical drift exceeds the policy limit.
    """
    policy = policy or StepPolicy()
    sector = ParitySector(b0.sector if sector is None else sector)
    t_grid = _check_grid(t_grid)
    L = b0.L

    X = np.vstack([b0.U, b0.V]).astype(complex)
    if check_initial:
        m0 = schedule.bdg_at(spec, 0.0, sector)
        res = np.abs(m0.hamiltonian @ X - X * b0.eps).max(initial=0.0)
        if res > 1e-8 * max(1.0, m0.norm):
            raise InvalidInputError(
                f"Initial basis does not diagonalize H(0): residual {res:.3e}"
            )
    base_defect = b0.canonical_defect()

    snapshots = []
    for t, Xt in zip(
        t_grid, evolve_columns(X, spec, schedule, t_grid, policy, sector)
    ):
        snap = EvolvedBasis(float(t), Xt[:L].copy(), Xt[L:].copy(), sector)
        drift = snap.canonical_defect() - base_defect
        if drift > policy.drift_limit:
            raise StepSizeError(
                f"Canonical drift {drift:.3e} at t={t:.4g} exceeds "
                f"{policy.drift_limit:.1e}; halve dt"
            )
        snapshots.append(snap)
    return snapshots


def green_functions(U: np.ndarray, V: np.ndarray, t: float = 0.0) -> NambuGreen:
    """G = U U^H and F = U V^H of the vacuum of the columns (U, V)."""
    return NambuGreen(G=U @ U.conj().T, F=U @ V.conj().T, t=t)


def majorana_correlation(g: NambuGreen) -> MajoranaCorrelation:
    """
    Real antisymmetric A from M = W G_nambu W^H = w + i A.

    Raises:
        InconsistentGreenError: If A has an imaginary residue above 1e-8.
    """
    L = g.L
    eye = np.eye(L)
    W = np.block([[eye, eye], [-1j * eye, 1j * eye]])
    M = W @ g.nambu() @ W.conj().T
    A = -1j * (M - g.weight * np.eye(2 * L))
    residue = np.abs(A.imag).max(initial=0.0)
    if residue > 1e-8:
        raise InconsistentGreenError(
            f"Majorana matrix has imaginary residue {residue:.3e}"
        )
    A = A.real
    return MajoranaCorrelation(Amat=(A - A.T) / 2, t=g.t)


def bond_correlators(
    g: NambuGreen,
    spec: ChainSpec,
    sector: ParitySector = ParitySector.EVEN,
) -> np.ndarray:
    """
    Nearest-neighbour <sx_j sx_{j+1}> = -i <B_j A_{j+1}> for every bond.

    This is a single Majorana contraction and holds out of equilibrium.
    The PBC ring bond picks up the sector sign -(-1)^p.
    """
    A = majorana_correlation(g).Amat
    L = g.L
    C = np.array([A[L + j, j + 1] for j in range(L - 1)])
    if spec.bc == BoundaryCondition.PBC:
        wrap = -ParitySector(sector).boundary_sign * A[2 * L - 1, 0]
        C = np.append(C, wrap)
    return C


def defect_density(
    g: NambuGreen,
    spec: ChainSpec,
    sector: ParitySector = ParitySector.EVEN,
) -> float:
    """Kink density (1 / 2 n_b) sum over bonds of (1 - <sx sx>)."""
    C = bond_correlators(g, spec, sector)
    return float(np.sum(1.0 - C) / (2 * len(C)))


def energy(m: BdGMatrix, g: NambuGreen) -> float:
    """<H> = -Re Tr(H G_nambu)."""
    return float(-np.real(np.trace(m.hamiltonian @ g.nambu())))


def loschmidt_echo(
    b0: BogoliubovBasis, snapshots: Sequence[EvolvedBasis]
) -> np.ndarray:
    """|<psi(0)|psi(t)>|^2 along a trajectory by the Onishi formula."""
    return np.array([onishi_overlap_sq(b0, s) for s in snapshots])


# #################
# Momentum-resolved evolution
# #################


@dataclass(frozen=True)
class MomentumTrajectory:
    """
    Per-k evolution of a uniform periodic chain in the even sector.

    Attributes:
        t (np.ndarray): Output times.
        ks (np.ndarray): The antiperiodic grid.
        a (np.ndarray): Particle amplitudes, shape (len(t), L).
        b (np.ndarray): Hole amplitudes, shape (len(t), L).
        energy (np.ndarray): <H>(t).
        correlator (np.ndarray): <sx_j sx_{j+1}>(t).
        excitation (np.ndarray): Quasiparticle density relative to the
            instantaneous ground state.
    """

    t: np.ndarray
    ks: np.ndarray
    a: np.ndarray
    b: np.ndarray
    energy: np.ndarray
    correlator: np.ndarray
    excitation: np.ndarray

    @property
    def rho(self) -> np.ndarray:
        return (1.0 - self.correlator) / 2

    def columns(self, i: int):
        """Real-space (U, V) at output i, U = F diag(a), F_jk = e^{ikj}/sqrt(L)."""
        L = len(self.ks)
        F = np.exp(1j * np.outer(np.arange(L), self.ks)) / np.sqrt(L)
        return F * self.a[i], F * self.b[i]


def _check_uniform_ring(spec: ChainSpec):
    if spec.bc != BoundaryCondition.PBC:
        raise InvalidInputError("Momentum evolution needs a periodic chain")
    if np.ptp(spec.J) != 0 or np.ptp(spec.h) != 0:
        raise InvalidInputError("Momentum evolution needs a uniform chain")


def propagate_momentum(
    spec: ChainSpec,
    schedule: Schedule,
    t_grid: Sequence[float],
    policy: Optional[StepPolicy] = None,
) -> MomentumTrajectory:
    """
    Evolve each momentum pair with its own 2x2 problem
    i d/dt (a, b) = [[z, -iy], [iy, -z]] (a, b), starting from the
    positive-energy amplitudes of H(0). The midpoint exponential
    cos(eps dt) - i sin(eps dt) H_k / eps is applied per step.

    Raises:
        InvalidInputError: If the chain is not uniform and periodic.
    """
    _check_uniform_ring(spec)
    policy = policy or StepPolicy()
    t_grid = _check_grid(t_grid)
    ks = k_grid(spec.L, ParitySector.EVEN).ks
    J, kappa = spec.J[0], spec.kappa

    def disp(t):
        h_t = schedule.h_of_t(t, spec)
        J_t = schedule.J_of_t(t, spec)
        return Dispersion(float(J_t[0]), float(h_t[0]), kappa)

    a, b = disp(0.0).amplitudes(ks)
    pos = ks > 0
    cos_k, sin_k = np.cos(ks[pos]), np.sin(ks[pos])
    L = spec.L

    def observe(t, a, b):
        d = disp(t)
        z, y = d.z(ks[pos]), d.y(ks[pos])
        ap, bp = a[pos], b[pos]
        e_k = (
            z * (np.abs(ap) ** 2 - np.abs(bp) ** 2)
            + 2 * y * np.imag(np.conj(ap) * bp)
        )
        corr = (4.0 / L) * np.sum(
            cos_k * np.abs(bp) ** 2 - sin_k * np.imag(ap * np.conj(bp))
        )
        u0, v0 = d.amplitudes(ks[pos])
        p_k = 1.0 - np.abs(np.conj(u0) * ap + np.conj(v0) * bp) ** 2
        return -np.sum(e_k), corr, 2.0 * np.sum(p_k) / L

    out_a, out_b, energies, corrs, excs = [], [], [], [], []

    def record(t):
        out_a.append(a.copy())
        out_b.append(b.copy())
        e, c, x = observe(t, a, b)
        energies.append(e)
        corrs.append(c)
        excs.append(x)

    record(0.0)
    for t_a, t_b in zip(t_grid[:-1], t_grid[1:]):
        span = t_b - t_a
        bound = 2.0 * max(
            abs(float(schedule.J_of_t(t, spec)[0])) * max(1.0, abs(kappa))
            + abs(float(schedule.h_of_t(t, spec)[0]))
            for t in (t_a, t_b)
        )
        n = policy.steps(span, bound)
        dt = span / n
        for i in range(n):
            d = disp(t_a + (i + 0.5) * dt)
            z, y = d.z(ks), d.y(ks)
            eps = np.hypot(z, y)
            c = np.cos(eps * dt)
            s = np.where(eps > 0, np.sin(eps * dt) / np.where(eps > 0, eps, 1), dt)
            a, b = (
                (c - 1j * s * z) * a - s * y * b,
                s * y * a + (c + 1j * s * z) * b,
            )
        record(t_b)

    logger.debug(f"Momentum evolution of {L} modes to t={t_grid[-1]:.4g}")
    return MomentumTrajectory(
        t=t_grid,
        ks=ks,
        a=np.array(out_a),
        b=np.array(out_b),
        energy=np.array(energies),
        correlator=np.array(corrs),
        excitation=np.array(excs),
    )


# #################
# Annealing
# #################


@dataclass(frozen=True)
class AnnealTrajectory:
    """Observables of an anneal at the output times."""

    t: np.ndarray
    rho: np.ndarray
    energy: np.ndarray
    excitation: Optional[np.ndarray] = None
    greens: Dict[float, NambuGreen] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.t, "rho": self.rho, "energy": self.energy})
        if self.excitation is not None:
            frame["excitation"] = self.excitation
        return frame


def anneal(
    spec: ChainSpec,
    schedule: Schedule,
    policy: Optional[StepPolicy] = None,
    t_out: Optional[Sequence[float]] = None,
    sector: ParitySector = ParitySector.EVEN,
    method: str = "bdg",
    snapshot_times: Sequence[float] = (),
) -> AnnealTrajectory:
    """
    Start in the ground state of H(0) and follow the schedule to tau.

    Args:
        spec (ChainSpec): The chain.
        schedule (Schedule): The anneal schedule.
        policy (Optional[StepPolicy]): Step-size policy.
        t_out (Optional[Sequence[float]]): Output times; defaults to
            [0, tau] (just [0] when tau = 0).
        sector (ParitySector): Parity sector of the dynamics.
        method (str): "bdg" for full-matrix propagation, "momentum" for
            per-k evolution of a uniform ring (even sector only).
        snapshot_times (Sequence[float]): Output times whose Green
            functions are kept (bdg method).

    Returns:
        AnnealTrajectory: rho_def and energy at every output time.
    """
    if t_out is None:
        t_out = [0.0] if schedule.tau == 0 else [0.0, schedule.tau]
    t_out = _check_grid(t_out)

    if method == "momentum":
        if ParitySector(sector) != ParitySector.EVEN:
            raise InvalidInputError("Momentum evolution covers the even sector")
        traj = propagate_momentum(spec, schedule, t_out, policy)
        return AnnealTrajectory(
            t=traj.t, rho=traj.rho, energy=traj.energy, excitation=traj.excitation
        )
    if method != "bdg":
        raise InvalidInputError(f"Unknown anneal method '{method}'")

    b0 = diagonalize(schedule.bdg_at(spec, 0.0, sector))
    snaps = propagate(b0, spec, schedule, t_out, policy, sector)
    rho, en, greens = [], [], {}
    keep = {float(t) for t in snapshot_times}
    for snap in snaps:
        g = green_functions(snap.U, snap.V, snap.t)
        rho.append(defect_density(g, spec, sector))
        en.append(energy(schedule.bdg_at(spec, snap.t, sector), g))
        if snap.t in keep:
            greens[snap.t] = g
    return AnnealTrajectory(
        t=t_out, rho=np.array(rho), energy=np.array(en), greens=greens
    )
