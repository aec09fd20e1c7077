from fermichain.experiments.base import (
    Experiment,
    ExperimentConfig,
    ExperimentResult,
    OutputFormat,
)
from fermichain.experiments.registry import ExperimentRegistry, run_experiment

__all__ = [
    "Experiment",
    "ExperimentConfig",
    "ExperimentRegistry",
    "ExperimentResult",
    "OutputFormat",
    "run_experiment",
]
