"""
Equilibrium experiments: thermal energy curves, spin correlators and
entanglement scaling.
"""

import numpy as np
import pandas as pd
from loguru import logger

from fermichain.analysis.observables import (
    block_entropy,
    magnetization_profile,
    sector_ground_state,
    xx_correlation_profile,
    zz_correlator,
)
from fermichain.analysis.thermal import (
    build_context,
    energy_density,
    partition_function,
)
from fermichain.config import settings
from fermichain.core.model import BoundaryCondition, ParitySector, make_uniform
from fermichain.evolution.dynamics import green_functions
from fermichain.experiments.base import CheckList, Experiment, ExperimentResult
from fermichain.experiments.common import grid, int_grid
from fermichain.oracle import ed_oracle
from fermichain.utils.helpers import loglog_fit


def ground_green(spec, sector: ParitySector = ParitySector.EVEN):
    """Green functions of the lowest state of a parity sector."""
    basis = sector_ground_state(spec, sector)
    return green_functions(basis.U, basis.V)


class ThermalExperiment(Experiment):
    name = "thermal"

    def run(self) -> ExperimentResult:
        spec = self.chain(L=int(self.param("L", 10)))
        validate = bool(self.param("validate", False))
        if validate and spec.L > settings.ED_THERMAL_MAX_SITES:
            logger.warning(
                f"ED deltas need L <= {settings.ED_THERMAL_MAX_SITES}; skipping"
            )
            validate = False
        rows = []
        for beta in grid(self.param("beta", "0.1,0.2,0.5,1,2,5,10")):
            ctx = build_context(spec, float(beta))
            row = {
                "beta": beta,
                "energy_density": energy_density(ctx),
                "log_Z": partition_function(ctx),
            }
            if validate:
                exact = ed_oracle.thermal_average(spec, beta, "energy") / spec.L
                row["ed_delta"] = abs(row["energy_density"] - exact)
            rows.append(row)
        return ExperimentResult(frame=pd.DataFrame(rows))

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        for bc in (BoundaryCondition.PBC, BoundaryCondition.OBC):
            spec = make_uniform(6, 1.0, 1.0, 0.5, bc)
            ctx = build_context(spec, 0.0)
            checks.add(f"{bc.value} log Z at beta=0", abs(partition_function(ctx) - 6 * np.log(2)), 1e-8)
            checks.add(f"{bc.value} energy at beta=0", abs(energy_density(ctx)), 1e-12)
            for beta in (0.2, 1.0, 5.0):
                ctx = build_context(spec, beta)
                checks.add(
                    f"{bc.value} log Z vs ED at beta={beta}",
                    abs(partition_function(ctx) - ed_oracle.log_partition(spec, beta)),
                    1e-9,
                )
                checks.add(
                    f"{bc.value} energy vs ED at beta={beta}",
                    abs(energy_density(ctx) - ed_oracle.thermal_average(spec, beta) / 6),
                    1e-8,
                )
        return checks.result()


class CorrelateExperiment(Experiment):
    name = "correlate"

    def run(self) -> ExperimentResult:
        spec = self.chain(L=int(self.param("L", 128)))
        j1 = int(self.param("j1", 0))
        g = ground_green(spec, self.sector())
        cxx = xx_correlation_profile(g, j1)
        r = np.arange(1, len(cxx) + 1)
        sz = magnetization_profile(g)
        frame = pd.DataFrame(
            {
                "r": r,
                "C_xx": cxx,
                "C_zz": [zz_correlator(g, j1, j1 + d) for d in r],
                "sz": sz[j1 + r],
            }
        )
        half = spec.L // 2
        summary = {"cxx_half": float(cxx[half - 1])}
        h, J = float(np.mean(spec.h)), float(np.mean(spec.J))
        if h < J:
            summary["plateau_target"] = float((1 - (h / J) ** 2) ** 0.25)
        window = (r <= half) & (np.abs(cxx) > 0)
        if window.sum() > 1:
            summary["power_law"] = loglog_fit(r[window], np.abs(cxx[window]))
        return ExperimentResult(frame=frame, summary=summary)

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        for bc in (BoundaryCondition.PBC, BoundaryCondition.OBC):
            spec = make_uniform(8, 1.0, 1.0, 0.6, bc)
            g = ground_green(spec)
            cxx = xx_correlation_profile(g)
            exact = [
                ed_oracle.correlator(spec, "xx", (0, j), parity=0) for j in range(1, 8)
            ]
            checks.add(f"{bc.value} C_xx vs ED", np.abs(cxx - exact).max(), 1e-8)
            sz = magnetization_profile(g)
            exact_sz = [ed_oracle.correlator(spec, "z", (j,), parity=0) for j in range(8)]
            checks.add(f"{bc.value} sz vs ED", np.abs(sz - exact_sz).max(), 1e-8)
        return checks.result()


class EntropyExperiment(Experiment):
    name = "entropy"

    def half_chain(self, sizes) -> ExperimentResult:
        rows = []
        for L in sizes:
            spec = self.chain(L=int(L))
            g = ground_green(spec, self.sector())
            S = block_entropy(g, range(int(L) // 2)).entropy
            rows.append({"L": int(L), "S_half": S, "l": int(L) // 2})
        frame = pd.DataFrame(rows)
        slope, intercept = np.polyfit(np.log(frame["L"]), frame["S_half"], 1)
        summary = {
            "fit": {
                "coefficient": float(slope),
                "intercept": float(intercept),
                "L_min": int(frame["L"].min()),
                "L_max": int(frame["L"].max()),
            }
        }
        return ExperimentResult(frame=frame, summary=summary)

    def run(self) -> ExperimentResult:
        sizes = self.param("sizes")
        if sizes is not None:
            return self.half_chain(int_grid(sizes))
        spec = self.chain(L=int(self.param("L", 64)))
        g = ground_green(spec, self.sector())
        bits = bool(self.param("bits", False))
        rows = [
            {"l": l, "S_l": block_entropy(g, range(l), bits).entropy}
            for l in range(1, spec.L)
        ]
        return ExperimentResult(frame=pd.DataFrame(rows))

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        spec = make_uniform(8, 1.0, 1.0, 0.0)
        g = ground_green(spec, ParitySector.EVEN)
        checks.add("h=0 cat state entropy = ln 2", abs(block_entropy(g, range(4)).entropy - np.log(2)), 1e-8)
        spec = make_uniform(8, 1.0, 1.0, 1e8)
        g = ground_green(spec)
        checks.add("product state entropy", block_entropy(g, range(4)).entropy, 1e-10)
        spec = make_uniform(8, 1.0, 1.0, 0.8, BoundaryCondition.OBC)
        g = ground_green(spec)
        for block in ([0, 1, 2, 3], [1, 2], [0, 5]):
            checks.add(
                f"block {block} vs ED",
                abs(
                    block_entropy(g, block).entropy
                    - ed_oracle.reduced_entropy(spec, block, parity=0)
                ),
                1e-8,
            )
        return checks.result()
