from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from fermichain.config import settings
from fermichain.core.model import (
    BoundaryCondition,
    ChainSpec,
    ParitySector,
    make_disordered,
    make_uniform,
)


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class ExperimentConfig(BaseModel):
    """
    Everything needed to reproduce one experiment run.

    Attributes:
        command (str): Subcommand name.
        params (Dict[str, Any]): Subcommand parameters; missing keys fall
            back to the experiment defaults.
        seed (int): Disorder seed.
        out (Optional[Path]): Output file; stdout when unset.
        format (OutputFormat): csv or json.
        timestamp (bool): Stamp the output header with the creation time.
        workers (int): Worker processes for grid scans and ensembles.
        self_test (bool): Run the invariant suite instead of the experiment.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: str
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    out: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV
    timestamp: bool = True
    workers: int = Field(1, ge=1)
    self_test: bool = False

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.model_validate_json(text)

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def merged(self, **updates) -> "ExperimentConfig":
        """Copy with top-level fields and params overridden by non-None values."""
        params = dict(self.params)
        params.update(
            {k: v for k, v in updates.pop("params", {}).items() if v is not None}
        )
        fields = {k: v for k, v in updates.items() if v is not None}
        return type(self).model_validate(
            {**self.model_dump(), "params": params, **fields}
        )


@dataclass
class ExperimentResult:
    """
    Tabular output of an experiment.

    Attributes:
        frame (pd.DataFrame): The rows written to the output file.
        summary (Dict[str, Any]): Fits and scalar results (JSON output).
        breaches (List[str]): Failed checks; non-empty means exit code 4.
    """

    frame: pd.DataFrame
    summary: Dict[str, Any] = field(default_factory=dict)
    breaches: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.breaches


class CheckList:
    """Collects (check, value, threshold) rows of a self-test or validation."""

    def __init__(self):
        self.rows: List[Dict[str, Any]] = []

    def add(self, check: str, value: float, threshold: float):
        value = float(value)
        self.rows.append(
            {
                "check": check,
                "value": value,
                "threshold": float(threshold),
                "passed": bool(np.isfinite(value) and value <= threshold),
            }
        )

    def require(self, check: str, condition: bool):
        """A pass/fail check reported as value 0 (pass) or 1 (fail)."""
        self.add(check, 0.0 if condition else 1.0, 0.0)

    def result(self, summary: Optional[Dict[str, Any]] = None) -> ExperimentResult:
        frame = pd.DataFrame(
            self.rows, columns=["check", "value", "threshold", "passed"]
        )
        breaches = [r["check"] for r in self.rows if not r["passed"]]
        return ExperimentResult(frame=frame, summary=summary or {}, breaches=breaches)


class Experiment(ABC):
    """
    Abstract base class of the CLI subcommands.

    Subclasses read their parameters with `param` and implement `run`, which
    produces the dataset, and `self_test`, which checks the invariants of the
    modules the subcommand exercises on small sizes.
    """

    name: str = ""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    def param(self, key: str, default: Any = None) -> Any:
        return self.config.params.get(key, default)

    def sector(self) -> ParitySector:
        return ParitySector(int(self.param("sector", 0)))

    def chain(self, L: Optional[int] = None, **overrides) -> ChainSpec:
        """
        Chain from the params: uniform by default, disordered when
        J_range or h_range is given.
        """
        p = {**self.config.params, **overrides}
        L = int(L if L is not None else p.get("L", 8))
        bc = BoundaryCondition(p.get("bc", "pbc"))
        kappa = float(p.get("kappa", 1.0))
        if "J_range" in p or "h_range" in p:
            J = float(p.get("J", 1.0))
            h = float(p.get("h", 0.5))
            return make_disordered(
                L,
                tuple(p.get("J_range", (J, J))),
                tuple(p.get("h_range", (h, h))),
                kappa=kappa,
                seed=self.config.seed,
                bc=bc,
            )
        return make_uniform(
            L,
            J=float(p.get("J", 1.0)),
            kappa=kappa,
            h=float(p.get("h", 0.5)),
            bc=bc,
        )

    def execute(self) -> ExperimentResult:
        return self.self_test() if self.config.self_test else self.run()

    @abstractmethod
    def run(self) -> ExperimentResult:
        """Produce the experiment dataset."""
        pass

    @abstractmethod
    def self_test(self) -> ExperimentResult:
        """Check module invariants on small sizes."""
        pass
