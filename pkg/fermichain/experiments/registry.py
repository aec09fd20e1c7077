from typing import Dict, List

import typer
from fermichain.errors import InvalidInputError, ValidationBreachError
from fermichain.experiments.base import (
    Experiment,
    ExperimentConfig,
    ExperimentResult,
    OutputFormat,
)
from fermichain.experiments.equilibrium import (
    CorrelateExperiment,
    EntropyExperiment,
    ThermalExperiment,
)
from fermichain.experiments.quench import (
    AnnealExperiment,
    FloquetExperiment,
    KibbleZurekExperiment,
    OverlapExperiment,
)
from fermichain.experiments.spectral import (
    BandsExperiment,
    GapScanExperiment,
    ImpurityExperiment,
    LocalizationExperiment,
    SpectrumExperiment,
    WindingExperiment,
)
from fermichain.experiments.validation import ValidateExperiment
from fermichain.utils.helpers import log_execution_time
from fermichain.utils.io import format_csv, format_json, write_output
from fermichain.utils.logging import get_run_logger


class ExperimentRegistry:
    """
    A registry mapping subcommand names to Experiment classes.

    Methods:
    - get_experiment(name: str, config: ExperimentConfig) -> Experiment:
        Returns an instance of the experiment registered under name.

    - register_experiment(name: str, experiment_class: type):
        Registers a new experiment class under name.

    Attributes:
    - _experiments: Dict[str, type]
        A dictionary mapping subcommand names to experiment classes.
    """

    _experiments: Dict[str, type] = {
        cls.name: cls
        for cls in (
            BandsExperiment,
            GapScanExperiment,
            SpectrumExperiment,
            WindingExperiment,
            AnnealExperiment,
            KibbleZurekExperiment,
            FloquetExperiment,
            ThermalExperiment,
            CorrelateExperiment,
            EntropyExperiment,
            LocalizationExperiment,
            ImpurityExperiment,
            OverlapExperiment,
            ValidateExperiment,
        )
    }

    @classmethod
    def get_experiment(cls, name: str, config: ExperimentConfig) -> Experiment:
        """
        Returns an instance of the experiment registered under name.

        Args:
            name (str): The subcommand name.
            config (ExperimentConfig): The run configuration.

        Returns:
            Experiment: The experiment.

        Raises:
            InvalidInputError: If no experiment is registered under name.
        """
        experiment_class = cls._experiments.get(name)
        if experiment_class is None:
            raise InvalidInputError(f"No experiment available for command: {name}")
        return experiment_class(config)

    @classmethod
    def register_experiment(cls, name: str, experiment_class: type):
        """
        Register an experiment class under a subcommand name.

        Args:
            name (str): The subcommand name.
            experiment_class (type): An Experiment subclass.
        """
        cls._experiments[name] = experiment_class

    @classmethod
    def names(cls) -> List[str]:
        return sorted(cls._experiments)


def render(result: ExperimentResult, config: ExperimentConfig) -> str:
    """Render a result in the configured output format."""
    config_json = config.to_json()
    if config.format == OutputFormat.JSON:
        return format_json(result.frame, config_json, result.summary, config.timestamp)
    return format_csv(
        result.frame, config_json, config.timestamp, result.summary
    )


@log_execution_time
def run_experiment(config: ExperimentConfig) -> int:
    """
    Run one experiment and write its dataset.

    Output goes to config.out, or to stdout when unset.

    Returns:
        int: 0 on success, the validation-breach exit code when a check of
            the run (validate, --self-test) exceeds its threshold.
    """
    experiment = ExperimentRegistry.get_experiment(config.command, config)
    logger = get_run_logger(config.command, config.seed)
    logger.info(
        f"Running {config.command}{' self-test' if config.self_test else ''} "
        f"with seed {config.seed}"
    )
    result = experiment.execute()
    text = render(result, config)
    if write_output(text, config.out) is None:
        typer.echo(text, nl=False)
    if not result.passed:
        logger.error(f"Checks above threshold: {', '.join(result.breaches)}")
        return ValidationBreachError.exit_code
    return 0
