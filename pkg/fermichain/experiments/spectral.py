"""
Static spectra: bands, sector gaps, BdG spectra, winding numbers,
impurity bound states and Anderson localization ensembles.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from fermichain.core.bdg import (
    diagonalize,
    envelope_slopes,
    ipr,
    localization_centers,
)
from fermichain.core.model import (
    BoundaryCondition,
    ChainSpec,
    ParitySector,
    assemble_bdg,
    make_disordered,
    make_uniform,
)
from fermichain.core.uniform import (
    bands,
    epsilon_k,
    sector_excitation_energies,
    sector_gap,
    sector_ground_energy,
    winding_index,
)
from fermichain.errors import (
    InvalidRangeError,
    NoBoundStateError,
    UndefinedIndexError,
)
from fermichain.experiments.base import CheckList, Experiment, ExperimentResult
from fermichain.experiments.common import grid, int_grid
from fermichain.utils.helpers import run_tasks


class BandsExperiment(Experiment):
    name = "bands"

    def run(self) -> ExperimentResult:
        J = float(self.param("J", 1.0))
        h = float(self.param("h", 0.5))
        kappa = float(self.param("kappa", 1.0))
        ks = np.linspace(-np.pi, np.pi, int(self.param("points", 201)))
        frame = bands(J, h, kappa, ks)
        return ExperimentResult(
            frame=frame,
            summary={
                "eps_max": float(frame["eps_plus"].max()),
                "eps_min": float(frame["eps_plus"].min()),
            },
        )

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        checks.add("eps(pi) = 2(J + h)", abs(epsilon_k(np.pi, 1.0, 0.5, 1.0) - 3.0), 1e-12)
        checks.add("eps(0) = 2|J - h|", abs(epsilon_k(0.0, 1.0, 0.5, 1.0) - 1.0), 1e-12)
        ks = np.linspace(-np.pi, np.pi, 33)
        checks.add(
            "eps(k) = eps(-k)",
            np.abs(epsilon_k(ks, 1.0, 0.3, 0.7) - epsilon_k(-ks, 1.0, 0.3, 0.7)).max(),
            1e-14,
        )
        return checks.result()


class GapScanExperiment(Experiment):
    name = "gap-scan"

    def run(self) -> ExperimentResult:
        L = int(self.param("L", 256))
        J = float(self.param("J", 1.0))
        kappa = float(self.param("kappa", 1.0))
        hs = grid(self.param("h", "0:0.02:2"))
        rows = []
        for h in hs:
            e0 = sector_ground_energy(L, J, h, kappa, ParitySector.EVEN)
            e1 = sector_ground_energy(L, J, h, kappa, ParitySector.ODD)
            rows.append(
                {"h": h, "gap": e1 - e0, "L": L, "E0_even": e0, "E0_odd": e1}
            )
        return ExperimentResult(frame=pd.DataFrame(rows), summary={"L": L})

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        checks.add("h=1.5J gap = 2(h - J)", abs(sector_gap(64, 1.0, 1.5) - 1.0), 1e-8)
        checks.add(
            "h=J L gap / (pi/2) - 1",
            abs(512 * sector_gap(512, 1.0, 1.0) / (np.pi / 2) - 1.0),
            0.02,
        )
        checks.add(
            "h=0.5J gap(32) / gap(24)",
            sector_gap(32, 1.0, 0.5) / sector_gap(24, 1.0, 0.5),
            0.1,
        )
        return checks.result()


class SpectrumExperiment(Experiment):
    """
    BdG spectrum eps_mu against the field, open chains by default.

    The chain is diagonalized at every h of the grid. With h_range given
    the fields are drawn once and the rows carry their mean.
    """

    name = "spectrum"

    def run(self) -> ExperimentResult:
        bc = self.param("bc", BoundaryCondition.OBC.value)
        if "h_range" in self.config.params:
            spec = self.chain(bc=bc)
            points = [(float(spec.fields.mean()), spec)]
        else:
            points = [
                (float(h), self.chain(bc=bc, h=h))
                for h in grid(self.param("h", "0:0.05:2"))
            ]
        frames = []
        defect = 0.0
        for h, spec in points:
            basis = diagonalize(assemble_bdg(spec, self.sector()))
            defect = max(defect, basis.canonical_defect())
            frames.append(
                pd.DataFrame(
                    {
                        "h": h,
                        "mu": np.arange(spec.L),
                        "eps_mu": basis.eps,
                        "ipr": ipr(basis),
                        "center": localization_centers(basis),
                    }
                )
            )
        return ExperimentResult(
            frame=pd.concat(frames, ignore_index=True),
            summary={"L": points[0][1].L, "bc": bc, "canonical_defect": defect},
        )

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        for sector in (ParitySector.EVEN, ParitySector.ODD):
            spec = make_uniform(8, 1.0, 1.0, 0.7)
            basis = diagonalize(assemble_bdg(spec, sector))
            checks.add(
                f"sector {int(sector)} eps vs momentum grid",
                np.abs(
                    basis.eps - sector_excitation_energies(8, 1.0, 0.7, 1.0, sector) / 2
                ).max(),
                1e-10,
            )
            checks.add(
                f"sector {int(sector)} canonical defect",
                basis.canonical_defect(),
                1e-10,
            )
        obc = diagonalize(assemble_bdg(make_uniform(16, 1.0, 1.0, 0.3, BoundaryCondition.OBC)))
        checks.add("OBC Majorana mode below 1e-6", obc.eps[0], 1e-6)
        checks.add("OBC canonical defect", obc.canonical_defect(), 1e-10)
        return checks.result()


class WindingExperiment(Experiment):
    name = "winding"

    def run(self) -> ExperimentResult:
        J = float(self.param("J", 1.0))
        kappa = float(self.param("kappa", 1.0))
        rows = []
        for h in grid(self.param("h", "0,0.5,0.99,1.01,2,10")):
            try:
                index = winding_index(J, h, kappa)
            except UndefinedIndexError:
                logger.warning(f"Winding index undefined at h={h}")
                index = np.nan
            rows.append({"h": h, "winding": index})
        return ExperimentResult(frame=pd.DataFrame(rows))

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        for h, expected in ((0.0, 1), (0.5, 1), (0.99, 1), (1.01, 0), (2.0, 0), (10.0, 0)):
            checks.require(f"winding at h={h}", winding_index(1.0, h, 1.0) == expected)
        try:
            winding_index(1.0, 1.0, 1.0)
            undefined = False
        except UndefinedIndexError:
            undefined = True
        checks.require("winding undefined at h=J", undefined)
        return checks.result()


# #################
# Impurity bound states
# #################


@dataclass(frozen=True)
class BoundState:
    """
    An excitation 2 eps split off the continuum [2|J-h|, 2(J+h)].

    Attributes:
        edge (str): "lower" or "upper".
        energy (float): 2 eps of the bound state.
        shift (float): Distance from the continuum edge, signed outward.
        predicted (float): Second-order shift (hJ/|J+-h|)(h_imp/J)^2.
    """

    edge: str
    energy: float
    shift: float
    predicted: float

    @property
    def deviation(self) -> float:
        return abs(abs(self.shift) - self.predicted) / self.predicted


def impurity_bound_states(
    L: int, J: float, h: float, h_imp: float, site: int = 0
) -> Tuple[BoundState, ...]:
    """
    Bound states of a uniform Ising ring with one field h_l = h + h_imp.

    Excitations 2 eps_mu of the even sector are compared with the continuum
    edges 2|J - h| and 2(J + h). For h < J a stronger field on one site
    binds one state below and one above the continuum.

    Raises:
        InvalidRangeError: If h_imp < 0 or |h| = J.
        NoBoundStateError: If no excitation lies outside the continuum.
    """
    if h_imp < 0:
        raise InvalidRangeError(f"h_imp must be non-negative, got {h_imp}")
    if abs(abs(h) - J) < 1e-12 * J:
        raise InvalidRangeError("Bound states need |h| != J")
    spec = make_uniform(L, J, 1.0, h)
    fields = spec.fields.copy()
    fields[site] += h_imp
    spec = spec.with_fields(fields)
    energies = 2.0 * diagonalize(assemble_bdg(spec, ParitySector.EVEN)).eps

    lower, upper = 2 * abs(J - h), 2 * (J + h)
    tol = 1e-12 * upper
    scale = (h_imp / J) ** 2
    states = []
    if energies[0] < lower - tol:
        states.append(
            BoundState(
                "lower", energies[0], energies[0] - lower,
                h * J / abs(J - h) * scale,
            )
        )
    if energies[-1] > upper + tol:
        states.append(
            BoundState(
                "upper", energies[-1], energies[-1] - upper,
                h * J / abs(J + h) * scale,
            )
        )
    if not states:
        raise NoBoundStateError(
            f"No excitation outside [{lower:.6g}, {upper:.6g}] for "
            f"h_imp={h_imp} at L={L}"
        )
    logger.info(f"Found {len(states)} bound state(s) for h_imp={h_imp}")
    return tuple(states)


class ImpurityExperiment(Experiment):
    name = "impurity"

    def run(self) -> ExperimentResult:
        states = impurity_bound_states(
            int(self.param("L", 512)),
            float(self.param("J", 1.0)),
            float(self.param("h", 0.5)),
            float(self.param("h_imp", 0.02)),
            int(self.param("site", 0)),
        )
        frame = pd.DataFrame(
            [
                {
                    "edge": s.edge,
                    "energy": s.energy,
                    "shift": s.shift,
                    "predicted": s.predicted,
                    "deviation": s.deviation,
                }
                for s in states
            ]
        )
        return ExperimentResult(frame=frame, summary={"count": len(states)})

    def self_test(self) -> ExperimentResult:
        checks = CheckList()
        states = {s.edge: s for s in impurity_bound_states(256, 1.0, 0.5, 0.05)}
        checks.require("one state on each side of the continuum", set(states) == {"lower", "upper"})
        checks.require("lower state below", states["lower"].shift < 0)
        checks.require("upper state above", states["upper"].shift > 0)
        return checks.result()


# #################
# Anderson localization
# #################


def _localization_sample(task) -> dict:
    L, J_range, h_range, kappa, seed, bc = task
    spec = make_disordered(L, J_range, h_range, kappa, seed, bc)
    basis = diagonalize(assemble_bdg(spec))
    slopes = envelope_slopes(basis, periodic=bc == BoundaryCondition.PBC)
    return {
        "L": L,
        "seed": seed,
        "mean_ipr": float(ipr(basis).mean()),
        "negative_slope_fraction": float(np.mean(slopes < 0)),
    }


class LocalizationExperiment(Experiment):
    name = "localization"

    def tasks(self, sizes, samples: int):
        J_range = tuple(self.param("J_range", (0.5, 1.0)))
        h_range = tuple(self.param("h_range", (0.0, 2.0)))
        kappa = float(self.param("kappa", 1.0))
        bc = BoundaryCondition(self.param("bc", "obc"))
        seed = self.config.seed
        return [
            (int(L), J_range, h_range, kappa, seed + i, bc)
            for L in sizes
            for i in range(samples)
        ]

    def _result(self, sizes, samples: int) -> ExperimentResult:
        samples_frame = pd.DataFrame(
            run_tasks(
                _localization_sample,
                self.tasks(sizes, samples),
                workers=self.config.workers,
                desc="localization",
            )
        )
        frame = (
            samples_frame.groupby("L")
            .agg(
                mean_ipr=("mean_ipr", "mean"),
                std_ipr=("mean_ipr", "std"),
                n_realizations=("mean_ipr", "size"),
                negative_slope_fraction=("negative_slope_fraction", "mean"),
            )
            .reset_index()
        )
        frame.insert(4, "seed", self.config.seed)
        summary = {
            "n_realizations": samples,
            "negative_slope_fraction": float(
                frame["negative_slope_fraction"].iloc[-1]
            ),
        }
        if len(frame) > 1:
            summary["ipr_ratio"] = float(
                frame["mean_ipr"].iloc[-1] / frame["mean_ipr"].iloc[0]
            )
        return ExperimentResult(frame=frame, summary=summary)

    def run(self) -> ExperimentResult:
        return self._result(
            int_grid(self.param("L", "128,256")), int(self.param("samples", 200))
        )

    def self_test(self) -> ExperimentResult:
        result = self._result([32, 64], 10)
        checks = CheckList()
        checks.add(
            "IPR change between L=32 and 64",
            abs(result.summary["ipr_ratio"] - 1.0),
            0.5,
        )
        checks.add(
            "modes without decaying envelope",
            1.0 - result.summary["negative_slope_fraction"],
            0.2,
        )
        return checks.result(result.summary)
