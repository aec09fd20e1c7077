"""
Time-dependent experiments: anneals, Kibble-Zurek scaling, Floquet
spectra and quench overlaps.
"""

from itertools import combinations, product

import numpy as np
import pandas as pd
from loguru import logger

from fermichain.config import settings
from fermichain.core.bdg import diagonalize
from fermichain.core.gaussian import (
    excited_overlap_sq,
    onishi_overlap_sq,
    pfaffian,
)
from fermichain.core.model import (
    BoundaryCondition,
    ParitySector,
    assemble_bdg,
    make_disordered,
    make_uniform,
)
from fermichain.evolution.dynamics import StepPolicy, anneal
from fermichain.evolution.floquet import (
    fold,
    monodromy,
    quasi_energies,
    unitarity_defect,
    vacuum_periodicity_residual,
)
from fermichain.evolution.schedules import ConstantSchedule, ScheduleFactory
from fermichain.experiments.base import CheckList, Experiment, ExperimentResult
from fermichain.oracle.ed_oracle import fock_state
from fermichain.utils.helpers import log_grid, loglog_fit, run_tasks


def _policy(experiment: Experiment) -> StepPolicy:
    dt_max = experiment.param("dt_max")
    return StepPolicy(
        dt_max=None if dt_max is None else float(dt_max),
        method=experiment.param("propagator", settings.DEFAULT_PROPAGATOR),
    )


class AnnealExperiment(Experiment):
    name = "anneal"

    def run(self) -> ExperimentResult:
        spec = self.chain(h=float(self.param("h_i", 2.0)))
        tau = float(self.param("tau", 10.0))
        schedule = ScheduleFactory.get_schedule(
            self.param("shape", "linear"),
            tau=tau,
            h_i=float(self.param("h_i", 2.0)),
            h_f=float(self.param("h_f", 0.0)),
        )
        t_out = np.linspace(0.0, tau, int(self.param("points", 11)))
        traj = anneal(
            spec,
            schedule,
            _policy(self),
            t_out,
            self.sector(),
            method=self.param("method", "bdg"),
        )
        return ExperimentResult(
            frame=traj.to_frame(), summary={"rho_final": float(traj.rho[-1])}
        )

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        spec = make_uniform(12, 1.0, 1.0, 2.0)
        schedule = ScheduleFactory.get_schedule("linear", tau=4.0, h_i=2.0, h_f=0.0)
        policy = StepPolicy(dt_max=0.01, safety=1e6)
        t_out = np.linspace(0.0, 4.0, 5)
        full = anneal(spec, schedule, policy, t_out, method="bdg")
        per_k = anneal(spec, schedule, policy, t_out, method="momentum")
        checks.add("bdg vs momentum rho", np.abs(full.rho - per_k.rho).max(), 1e-8)
        checks.add("bdg vs momentum energy", np.abs(full.energy - per_k.energy).max(), 1e-8)
        return checks.result()


def _kibble_zurek_point(task) -> dict:
    L, J, kappa, h_i, h_f, tau, method, shape = task
    spec = make_uniform(L, J, kappa, h_i)
    schedule = ScheduleFactory.get_schedule(shape, tau=tau, h_i=h_i, h_f=h_f)
    traj = anneal(spec, schedule, method=method)
    row = {
        "tau": tau,
        "rho_def": float(traj.rho[-1]),
        "energy": float(traj.energy[-1]),
    }
    if traj.excitation is not None:
        row["excitation"] = float(traj.excitation[-1])
    return row


class KibbleZurekExperiment(Experiment):
    name = "kibble-zurek"

    def scan(self, L: int, taus) -> ExperimentResult:
        tasks = [
            (
                L,
                float(self.param("J", 1.0)),
                float(self.param("kappa", 1.0)),
                float(self.param("h_i", 2.0)),
                float(self.param("h_f", 0.0)),
                float(tau),
                self.param("method", "momentum"),
                self.param("shape", "linear"),
            )
            for tau in taus
        ]
        rows = run_tasks(
            _kibble_zurek_point, tasks, self.config.workers, desc="anneals"
        )
        frame = pd.DataFrame(rows)
        fit = loglog_fit(frame["tau"], frame["rho_def"])
        logger.info(f"Defect density exponent {fit['slope']:.4f}")
        return ExperimentResult(frame=frame, summary={"fit": fit})

    def run(self) -> ExperimentResult:
        taus = log_grid(
            float(self.param("tau_min", 8.0)),
            float(self.param("tau_max", 512.0)),
            int(self.param("count", 7)),
        )
        return self.scan(int(self.param("L", 512)), taus)

    def self_test(self) -> ExperimentResult:
        result = self.scan(128, log_grid(4.0, 32.0, 4))
        checks = CheckList()
        checks.require(
            "rho_def decreases with tau",
            bool(np.all(np.diff(result.frame["rho_def"]) < 0)),
        )
        checks.add("exponent offset from -1/2", abs(result.summary["fit"]["slope"] + 0.5), 0.15)
        return checks.result(result.summary)


class FloquetExperiment(Experiment):
    name = "floquet"

    def run(self) -> ExperimentResult:
        spec = self.chain()
        tau = float(self.param("tau", 1.0))
        shape = self.param("shape", "drive")
        if shape == "constant":
            schedule = ConstantSchedule(tau=tau)
        else:
            schedule = ScheduleFactory.get_schedule(
                shape, tau=tau, dh=float(self.param("dh", 0.5))
            )
        samples = int(self.param("samples", settings.FLOQUET_SAMPLES))
        sector = self.sector()
        policy = _policy(self)
        M = monodromy(spec, schedule, sector=sector, policy=policy, samples=samples)
        spectrum = quasi_energies(
            M, tau, spec, schedule, sector, policy, samples
        )
        frame = pd.DataFrame(
            {"mu": np.arange(spec.L), "quasi_energy": spectrum.quasi}
        )
        return ExperimentResult(
            frame=frame,
            summary={
                "tau": tau,
                "residual": vacuum_periodicity_residual(spectrum, spec),
                "unitarity_defect": unitarity_defect(M),
            },
        )

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        spec = make_uniform(6, 1.0, 1.0, 0.6)
        tau = 1.3
        static = ConstantSchedule(tau=tau)
        M = monodromy(spec, static, samples=8)
        spectrum = quasi_energies(M, tau)
        eps = diagonalize(assemble_bdg(spec)).eps
        checks.add(
            "constant H quasi-energies vs folded 2 eps",
            np.abs(np.sort(spectrum.quasi) - np.sort(np.abs(fold(2 * eps, tau)))).max(),
            1e-9,
        )

        drive = ScheduleFactory.get_schedule("drive", tau=2.0, dh=0.4)
        M = monodromy(spec, drive, samples=64)
        lam = np.linalg.eigvals(M)
        pairing = np.abs(lam[:, None] - lam.conj()[None, :]).min(axis=1).max()
        checks.add("eigenphase +- pairing", pairing, 1e-10)
        start = np.sort(quasi_energies(M, 2.0).quasi)
        shifted = np.sort(
            quasi_energies(monodromy(spec, drive, t0=0.7, samples=64), 2.0).quasi
        )
        checks.add(
            "quasi-energies vs period start", np.abs(shifted - start).max(), 1e-8
        )
        spectrum = quasi_energies(M, 2.0, spec, drive, samples=64)
        checks.add(
            "vacuum periodicity residual",
            vacuum_periodicity_residual(spectrum, spec),
            1e-8,
        )
        return checks.result()


# #################
# Quench overlaps
# #################


def fock_completeness(b0, b1) -> float:
    """sum over all occupation patterns of |<vac0| pattern of b1>|^2."""
    return float(
        sum(
            excited_overlap_sq(b0, b1, [mu for mu, n in enumerate(bits) if n])
            for bits in product((0, 1), repeat=b1.L)
        )
    )


class OverlapExperiment(Experiment):
    name = "overlap"

    def run(self) -> ExperimentResult:
        h_pre = float(self.param("h0", 2.0))
        h_post = float(self.param("h1", 0.5))
        spec0 = self.chain(h=h_pre)
        spec1 = self.chain(h=h_post)
        sector = self.sector()
        b0 = diagonalize(assemble_bdg(spec0, sector))
        b1 = diagonalize(assemble_bdg(spec1, sector))
        patterns = [()] + list(combinations(range(spec1.L), 2))
        frame = pd.DataFrame(
            {
                "h_pre": h_pre,
                "h_post": h_post,
                "L": spec1.L,
                "overlap_sq": [
                    excited_overlap_sq(b0, b1, occ) if occ
                    else onishi_overlap_sq(b0, b1)
                    for occ in patterns
                ],
                "modes": [" ".join(map(str, occ)) for occ in patterns],
            }
        )
        summary = {"onishi": float(frame["overlap_sq"].iloc[0])}
        if spec1.L <= settings.ED_MAX_SITES:
            summary["completeness"] = fock_completeness(b0, b1)
        return ExperimentResult(frame=frame, summary=summary)

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        rng = np.random.default_rng(self.config.seed)
        onishi_err = excited_err = completeness_err = 0.0
        for i in range(int(self.param("pairs", 50))):
            specs = [
                make_disordered(
                    6, (0.5, 1.0), (0.0, 2.0), 1.0, 2 * i + s,
                    BoundaryCondition.PBC,
                )
                for s in (0, 1)
            ]
            b0, b1 = (diagonalize(assemble_bdg(s)) for s in specs)
            psi0 = fock_state(b0.U, b0.V)
            psi1 = fock_state(b1.U, b1.V)
            onishi_err = max(
                onishi_err,
                abs(onishi_overlap_sq(b0, b1) - abs(np.vdot(psi0, psi1)) ** 2),
            )
            occ = sorted(rng.choice(6, size=2, replace=False).tolist())
            psi1x = fock_state(b1.U, b1.V, occ)
            excited_err = max(
                excited_err,
                abs(
                    excited_overlap_sq(b0, b1, occ)
                    - abs(np.vdot(psi0, psi1x)) ** 2
                ),
            )
            completeness_err = max(
                completeness_err, abs(fock_completeness(b0, b1) - 1.0)
            )
        checks.add("Onishi vs ED", onishi_err, 1e-10)
        checks.add("excited overlap vs ED", excited_err, 1e-10)
        checks.add("Fock completeness", completeness_err, 1e-8)

        pf_err = 0.0
        for n in (2, 4, 8, 12):
            X = rng.normal(size=(n, n))
            A = X - X.T
            det = np.linalg.det(A)
            pf_err = max(
                pf_err, abs(pfaffian(A) ** 2 - det) / max(1.0, abs(det))
            )
        checks.add("Pf^2 = det", pf_err, 1e-10)
        return checks.result()
