"""Module-by-module comparison of the free-fermion results with ED."""

import numpy as np
from loguru import logger

from fermichain.analysis.observables import (
    block_entropy,
    magnetization_profile,
    sector_ground_state,
    xx_correlation_profile,
)
from fermichain.analysis.thermal import (
    build_context,
    energy_density,
    partition_function,
)
from fermichain.core.model import BoundaryCondition, ChainSpec, ParitySector, make_disordered
from fermichain.evolution.dynamics import green_functions
from fermichain.experiments.base import CheckList, Experiment, ExperimentResult
from fermichain.experiments.common import grid
from fermichain.oracle import ed_oracle

TOLERANCE = 1e-8
SPECTRUM_TOLERANCE = 1e-9


def _expectation(psi: np.ndarray, L: int, ops) -> float:
    return float(np.real(np.vdot(psi, ed_oracle.pauli_string(L, ops) @ psi)))


def compare_with_ed(spec: ChainSpec, betas, checks: CheckList):
    """Add every module-vs-ED delta of one chain to checks."""
    L = spec.L
    tag = spec.bc.value
    system = ed_oracle.build(spec)
    checks.add(f"{tag} parity block leakage", system.parity_leakage(), 0.0)

    exact = system.eigh[0]
    fock = ed_oracle.fock_energies(spec)
    checks.add(f"{tag} full spectrum", np.abs(fock - exact).max(), SPECTRUM_TOLERANCE)
    checks.add(f"{tag} ground energy", abs(fock[0] - exact[0]), TOLERANCE)

    for sector in (ParitySector.EVEN, ParitySector.ODD):
        p = int(sector)
        basis = sector_ground_state(spec, sector)
        g = green_functions(basis.U, basis.V)
        E, psi = ed_oracle.ground(spec, parity=p)
        checks.add(f"{tag} p={p} sector energy", abs(basis.ground_energy - E), TOLERANCE)

        sz = [_expectation(psi, L, [(j, "z")]) for j in range(L)]
        checks.add(f"{tag} p={p} sz", np.abs(magnetization_profile(g) - sz).max(), TOLERANCE)

        cxx = [_expectation(psi, L, [(0, "x"), (j, "x")]) for j in range(1, L)]
        checks.add(f"{tag} p={p} C_xx", np.abs(xx_correlation_profile(g) - cxx).max(), TOLERANCE)

        half = range(L // 2)
        checks.add(
            f"{tag} p={p} half-chain entropy",
            abs(block_entropy(g, half).entropy - ed_oracle.state_entropy(psi, L, half)),
            TOLERANCE,
        )

    for beta in betas:
        ctx = build_context(spec, float(beta))
        checks.add(
            f"{tag} thermal energy at beta={beta}",
            abs(energy_density(ctx) - ed_oracle.thermal_average(spec, beta) / L),
            TOLERANCE,
        )
        checks.add(
            f"{tag} log Z at beta={beta}",
            abs(partition_function(ctx) - ed_oracle.log_partition(spec, beta)),
            TOLERANCE,
        )


class ValidateExperiment(Experiment):
    name = "validate"

    def _validate(self, L: int) -> ExperimentResult:
        checks = CheckList()
        betas = grid(self.param("beta", "0.2,1,5"))
        for bc in (BoundaryCondition.PBC, BoundaryCondition.OBC):
            spec = make_disordered(
                L,
                tuple(self.param("J_range", (0.5, 1.0))),
                tuple(self.param("h_range", (0.0, 1.0))),
                float(self.param("kappa", 1.0)),
                self.config.seed,
                bc,
            )
            compare_with_ed(spec, betas, checks)
        result = checks.result({"L": L, "seed": self.config.seed})
        if result.breaches:
            logger.error(f"{len(result.breaches)} check(s) above threshold")
        return result

    def run(self) -> ExperimentResult:
        return self._validate(int(self.param("L", 8)))

    def self_test(self) -> ExperimentResult:
        return self._validate(6)
