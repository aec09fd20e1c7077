"""
Floquet analysis of periodically driven chains.

The monodromy is the one-period propagator of i dX/dt = 2 H(t) X. Its
eigenvalues exp(-i q tau) come in pairs (q, -q) because the particle-hole
map C x = S x* commutes with it. Quasi-energies q live in the zone
(-pi/tau, pi/tau].
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from loguru import logger

from fermichain.config import settings
from fermichain.core.bdg import BogoliubovBasis
from fermichain.core.gaussian import thouless
from fermichain.core.model import ChainSpec, ParitySector
from fermichain.errors import (
    InvalidScheduleError,
    ParticleHoleViolationError,
    StepSizeError,
)
from fermichain.evolution.dynamics import (
    StepPolicy,
    evolve_columns,
    gershgorin_bound,
)
from fermichain.evolution.schedules import Schedule

PAIRING_TOLERANCE = 1e-8
SELF_CONJUGATE_TOLERANCE = 1e-7


@dataclass(frozen=True)
class FloquetSpectrum:
    """
    Quasi-energies and periodic Floquet modes of one parity sector.

    Attributes:
        tau (float): Period.
        quasi (np.ndarray): L nonnegative quasi-energies, ascending.
        U0 (np.ndarray): Floquet modes U_F(0).
        V0 (np.ndarray): Floquet modes V_F(0).
        times (Optional[np.ndarray]): Sample times over one period.
        U_P (Optional[np.ndarray]): Periodic parts, shape (samples, L, L).
        V_P (Optional[np.ndarray]): Periodic parts, shape (samples, L, L).
        sector (ParitySector): The sector analysed.
    """

    tau: float
    quasi: np.ndarray
    U0: np.ndarray
    V0: np.ndarray
    times: Optional[np.ndarray] = None
    U_P: Optional[np.ndarray] = None
    V_P: Optional[np.ndarray] = None
    sector: ParitySector = ParitySector.EVEN

    @property
    def L(self) -> int:
        return self.U0.shape[0]

    def basis_at(self, i: int) -> BogoliubovBasis:
        """Periodic-part columns at sample i as a basis."""
        return BogoliubovBasis(
            U=self.U_P[i], V=self.V_P[i], eps=self.quasi / 2, sector=self.sector
        )


def fold(q, tau: float):
    """Map quasi-energies into (-pi/tau, pi/tau]."""
    w = 2 * np.pi / tau
    q = np.asarray(q, dtype=float)
    return q - w * np.ceil((q - np.pi / tau) / w)


def unitarity_defect(M: np.ndarray) -> float:
    return float(np.abs(M.conj().T @ M - np.eye(M.shape[0])).max())


def period_grid(
    spec: ChainSpec,
    schedule: Schedule,
    tau: float,
    samples: int,
    policy: Optional[StepPolicy] = None,
    sector: ParitySector = ParitySector.EVEN,
    t0: float = 0.0,
) -> Tuple[np.ndarray, int]:
    """
    Integration grid over one period and the stride of the stored samples.

    The step count is taken from the policy, with at least FLOQUET_SAMPLES
    steps per period, and rounded up to a multiple of samples. Storing fewer
    samples therefore never coarsens the integration.
    """
    policy = policy or StepPolicy()
    scan = np.linspace(0.0, tau, settings.FLOQUET_SAMPLES + 1)
    bound = max(
        gershgorin_bound(schedule.bdg_at(spec, t0 + t, sector)) for t in scan
    )
    steps = max(policy.steps(tau, bound), settings.FLOQUET_SAMPLES)
    stride = -(-steps // samples)
    return np.linspace(0.0, tau, samples * stride + 1), stride


def monodromy(
    spec: ChainSpec,
    schedule: Schedule,
    tau: Optional[float] = None,
    sector: ParitySector = ParitySector.EVEN,
    policy: Optional[StepPolicy] = None,
    t0: float = 0.0,
    samples: Optional[int] = None,
) -> np.ndarray:
    """
    One-period propagator of the BdG equations starting at time t0.

    Args:
        spec (ChainSpec): The chain.
        schedule (Schedule): A periodic schedule.
        tau (Optional[float]): The period; defaults to schedule.tau.
        sector (ParitySector): Parity sector.
        policy (Optional[StepPolicy]): Step-size policy.
        t0 (float): Start of the period window.
        samples (Optional[int]): Stored intervals per period; shared with
            `periodic_modes`. The integration grid comes from `period_grid`.

    Returns:
        np.ndarray: The 2L x 2L unitary monodromy.

    Raises:
        InvalidScheduleError: If H(t0 + tau) differs from H(t0) by more than
            1e-12 relative, or the schedule is not periodic.
        StepSizeError: If the result is not unitary to 1e-8.
    """
    tau = schedule.tau if tau is None else tau
    if not (schedule.periodic or schedule.static) or tau <= 0:
        raise InvalidScheduleError("Monodromy needs a periodic schedule")
    H0 = schedule.bdg_at(spec, t0, sector)
    H1 = schedule.bdg_at(spec, t0 + tau, sector)
    mismatch = np.abs(H1.hamiltonian - H0.hamiltonian).max(initial=0.0)
    if mismatch > 1e-12 * max(1.0, H0.norm):
        raise InvalidScheduleError(
            f"H(t0 + tau) differs from H(t0) by {mismatch:.3e}"
        )

    samples = samples or settings.FLOQUET_SAMPLES
    times, _ = period_grid(spec, schedule, tau, samples, policy, sector, t0)
    X = np.eye(2 * spec.L, dtype=complex)
    *_, M = evolve_columns(X, spec, schedule, times, policy, sector, t0=t0)
    defect = unitarity_defect(M)
    if defect > 1e-8:
        raise StepSizeError(f"Monodromy unitarity defect {defect:.3e}")
    logger.debug(f"Monodromy over tau={tau}: unitarity defect {defect:.2e}")
    return M


def _self_conjugate_basis(E: np.ndarray) -> np.ndarray:
    """
    Columns x_i, C x_i spanning a C-invariant subspace.

    E holds an orthonormal basis of the subspace. The C-fixed vectors
    (a, a*) form a real subspace of the same dimension; pairs of its
    orthonormal vectors f1, f2 give x = (f1 + i f2) / sqrt(2).
    """
    L2, d = E.shape
    L = L2 // 2
    if d == 0:
        return np.zeros((L2, 0), dtype=complex)
    if d % 2:
        raise ParticleHoleViolationError(
            f"Self-conjugate subspace of odd dimension {d}"
        )
    R = E.conj().T @ np.vstack([E[L:].conj(), E[:L].conj()])
    K = np.block([[R.real, R.imag], [R.imag, -R.real]]) - np.eye(2 * d)
    _, sv, Vh = np.linalg.svd(K)
    coeffs = Vh[-d:].T
    fixed = E @ (coeffs[:d] + 1j * coeffs[d:])
    real_form = np.vstack([fixed.real, fixed.imag])
    Q, _ = np.linalg.qr(real_form)
    F = Q[:L2] + 1j * Q[L2:]
    return (F[:, 0::2] + 1j * F[:, 1::2]) / np.sqrt(2.0)


def quasi_energies(
    M: np.ndarray,
    tau: float,
    spec: Optional[ChainSpec] = None,
    schedule: Optional[Schedule] = None,
    sector: ParitySector = ParitySector.EVEN,
    policy: Optional[StepPolicy] = None,
    samples: Optional[int] = None,
) -> FloquetSpectrum:
    """
    Quasi-energies and Floquet modes from a monodromy.

    Eigenvectors come from the complex Schur form of the (normal) monodromy.
    Each generic pair keeps its member with 0 < q < pi/tau. The q = 0 and
    q = pi/tau subspaces are rebuilt from C-fixed vectors so that the
    (U, V) / (V*, U*) column pairing holds. With spec and schedule given,
    the modes are propagated over one period and their phases stripped,
    U_P(t) = U_F(t) exp(+i q t).

    Raises:
        ParticleHoleViolationError: If an eigenvalue has no conjugate partner
            within 1e-8 or the pairing counts do not add up to L.
    """
    L = M.shape[0] // 2
    T, Z = scipy.linalg.schur(M, output="complex")
    lam = np.diag(T)
    gap = np.abs(lam[:, None] - lam.conj()[None, :]).min(axis=1)
    if gap.max() > PAIRING_TOLERANCE:
        raise ParticleHoleViolationError(
            f"Eigenphase pairing violated by {gap.max():.3e}"
        )

    q = fold(-np.angle(lam) / tau, tau)
    zero = np.abs(lam - 1.0) <= SELF_CONJUGATE_TOLERANCE
    edge = np.abs(lam + 1.0) <= SELF_CONJUGATE_TOLERANCE
    generic = (~zero) & (~edge) & (q > 0)

    cols = [
        Z[:, generic],
        _self_conjugate_basis(Z[:, zero]),
        _self_conjugate_basis(Z[:, edge]),
    ]
    qs = np.concatenate(
        [
            q[generic],
            np.zeros(cols[1].shape[1]),
            np.full(cols[2].shape[1], np.pi / tau),
        ]
    )
    X = np.hstack(cols)
    if X.shape[1] != L:
        raise ParticleHoleViolationError(
            f"Found {X.shape[1]} positive Floquet modes for L={L}"
        )
    order = np.argsort(qs, kind="stable")
    X, qs = X[:, order], qs[order]

    spectrum = FloquetSpectrum(
        tau=tau, quasi=qs, U0=X[:L], V0=X[L:], sector=ParitySector(sector)
    )
    if spec is None or schedule is None:
        return spectrum
    return periodic_modes(spectrum, spec, schedule, policy, samples)


def periodic_modes(
    spectrum: FloquetSpectrum,
    spec: ChainSpec,
    schedule: Schedule,
    policy: Optional[StepPolicy] = None,
    samples: Optional[int] = None,
    U0: Optional[np.ndarray] = None,
    V0: Optional[np.ndarray] = None,
) -> FloquetSpectrum:
    """
    Propagate columns over one period and strip the quasi-energy phases.

    By default the Floquet modes of the spectrum are used; other initial
    columns (U0, V0) can be supplied, which is how non-Floquet states are
    checked against the periodicity residual.
    """
    samples = samples or settings.FLOQUET_SAMPLES
    U0 = spectrum.U0 if U0 is None else U0
    V0 = spectrum.V0 if V0 is None else V0
    L = spectrum.L
    fine, stride = period_grid(
        spec, schedule, spectrum.tau, samples, policy, spectrum.sector
    )
    times = fine[::stride]
    X0 = np.vstack([U0, V0])
    Xs = np.array(
        list(
            evolve_columns(X0, spec, schedule, fine, policy, spectrum.sector)
        )[::stride]
    )
    phase = np.exp(1j * np.outer(times, spectrum.quasi))
    Xs = Xs * phase[:, None, :]
    return FloquetSpectrum(
        tau=spectrum.tau,
        quasi=spectrum.quasi,
        U0=U0,
        V0=V0,
        times=times,
        U_P=Xs[:, :L],
        V_P=Xs[:, L:],
        sector=spectrum.sector,
    )


def vacuum_periodicity_residual(
    spectrum: FloquetSpectrum, spec: Optional[ChainSpec] = None
) -> float:
    """
    ||Z_F(tau) - Z_F(0)|| / max(1, ||Z_F(0)||) for Z_F = -(U_P^H)^-1 V_P^H.

    Raises:
        InvalidScheduleError: If the spectrum carries no sampled modes.
        OrthogonalVacuumError: If U_P is numerically singular.
    """
    if spectrum.U_P is None:
        raise InvalidScheduleError("Spectrum has no sampled periodic modes")
    if spec is not None and spec.L != spectrum.L:
        raise InvalidScheduleError("Spectrum and chain lengths differ")
    Z0 = thouless(spectrum.basis_at(0)).Z
    Z1 = thouless(spectrum.basis_at(-1)).Z
    return float(
        np.linalg.norm(Z1 - Z0) / max(1.0, np.linalg.norm(Z0))
    )


def many_body_quasi_energy(
    spectrum: FloquetSpectrum, occupied: Sequence[int], folded: bool = True
) -> float:
    """Quasi-energy sum_{mu in occupied} q_mu relative to the Floquet vacuum."""
    total = float(np.sum(spectrum.quasi[list(occupied)]))
    return float(fold(total, spectrum.tau)) if folded else total
