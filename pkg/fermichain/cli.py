from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from fermichain.core.model import BoundaryCondition
from fermichain.errors import FermiChainError, InvalidInputError, UsageError
from fermichain.experiments import (
    ExperimentConfig,
    ExperimentRegistry,
    OutputFormat,
    run_experiment,
)
from fermichain.experiments.common import grid
from fermichain.utils import logging

# Set up logging
logging.setup_logging()

app = typer.Typer(
    help="Free-fermion experiments on quantum Ising and XY chains.",
    no_args_is_help=True,
)
console = Console(stderr=True)


@dataclass
class GlobalOptions:
    config: Optional[Path] = None
    seed: Optional[int] = None
    out: Optional[Path] = None
    format: Optional[OutputFormat] = None
    timestamp: bool = True
    workers: Optional[int] = None


@app.callback()
def cli_main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(
        None, "--config", help="JSON experiment config file"
    ),
    seed: Optional[int] = typer.Option(None, "--seed", help="Disorder seed"),
    out: Optional[Path] = typer.Option(
        None, "--out", help="Output file (stdout when omitted)"
    ),
    format: Optional[OutputFormat] = typer.Option(
        None, "--format", help="Output format"
    ),
    no_timestamp: bool = typer.Option(
        False, "--no-timestamp", help="Omit the creation time from headers"
    ),
    workers: Optional[int] = typer.Option(
        None, "--workers", min=1, help="Worker processes for scans"
    ),
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="Override LOG_LEVEL"
    ),
):
    """Free-fermion experiments on quantum Ising and XY chains."""
    if log_level:
        logging.setup_logging(log_level)
    ctx.obj = GlobalOptions(
        config=config,
        seed=seed,
        out=out,
        format=format,
        timestamp=not no_timestamp,
        workers=workers,
    )


def _range(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    values = grid(text).tolist()
    if len(values) != 2:
        raise InvalidInputError(f"Range '{text}' needs two values")
    return values


def _load_config(opts: GlobalOptions, command: str) -> ExperimentConfig:
    if opts.config is None:
        return ExperimentConfig(command=command)
    try:
        base = ExperimentConfig.from_file(opts.config)
    except OSError as e:
        raise InvalidInputError(f"Cannot read config {opts.config}: {e}") from e
    if base.command != command:
        raise InvalidInputError(
            f"Config file is for '{base.command}', not '{command}'"
        )
    return base


def _dispatch(
    ctx: typer.Context, command: str, params: Dict[str, Any], self_test: bool
):
    opts = ctx.obj or GlobalOptions()
    try:
        config = _load_config(opts, command).merged(
            params=params,
            seed=opts.seed,
            out=opts.out,
            format=opts.format,
            workers=opts.workers,
            timestamp=None if opts.timestamp else False,
            self_test=True if self_test else None,
        )
        status = run_experiment(config)
    except ValidationError as e:
        console.print(f"[red]Invalid configuration: {e}[/red]")
        raise typer.Exit(code=UsageError.exit_code)
    except FermiChainError as e:
        console.print(f"[red]{type(e).__name__}: {e}[/red]")
        raise typer.Exit(code=e.exit_code)

    if status:
        console.print(f"[red]{command}: checks above threshold[/red]")
    else:
        console.print(f"[green]{command} finished.[/green]")
    raise typer.Exit(code=status)


SELF_TEST = typer.Option(
    False, "--self-test", help="Run the invariant suite on small sizes"
)


# #################
# Spectra
# #################


@app.command("bands")
def cli_bands(
    ctx: typer.Context,
    J: Optional[float] = typer.Option(None, "--J"),
    h: Optional[float] = typer.Option(None, "--h"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    points: Optional[int] = typer.Option(None, "--points", min=2),
    self_test: bool = SELF_TEST,
):
    """Dispersion eps_k over the Brillouin zone."""
    params = dict(J=J, h=h, kappa=kappa, points=points)
    _dispatch(ctx, "bands", params, self_test)


@app.command("gap-scan")
def cli_gap_scan(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[str] = typer.Option(None, "--h", help="Grid a:step:b"),
    self_test: bool = SELF_TEST,
):
    """Gap between the odd- and even-sector ground states against h."""
    params = dict(L=L, J=J, kappa=kappa, h=h)
    _dispatch(ctx, "gap-scan", params, self_test)


@app.command("spectrum")
def cli_spectrum(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[str] = typer.Option(None, "--h", help="Grid a:step:b or list"),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    sector: Optional[int] = typer.Option(None, "--sector", min=0, max=1),
    J_range: Optional[str] = typer.Option(None, "--J-range", help="min,max"),
    h_range: Optional[str] = typer.Option(None, "--h-range", help="min,max"),
    self_test: bool = SELF_TEST,
):
    """BdG spectrum eps_mu against h, with IPR and localization centers."""
    params = dict(
        L=L, J=J, kappa=kappa, h=h, bc=bc and bc.value, sector=sector,
        J_range=_range(J_range), h_range=_range(h_range),
    )
    _dispatch(ctx, "spectrum", params, self_test)


@app.command("winding")
def cli_winding(
    ctx: typer.Context,
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[str] = typer.Option(None, "--h", help="Grid or list"),
    self_test: bool = SELF_TEST,
):
    """Winding number of the (z_k, y_k) curve."""
    _dispatch(ctx, "winding", dict(J=J, kappa=kappa, h=h), self_test)


@app.command("impurity")
def cli_impurity(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    h: Optional[float] = typer.Option(None, "--h"),
    h_imp: Optional[float] = typer.Option(None, "--h-imp"),
    site: Optional[int] = typer.Option(None, "--site", min=0),
    self_test: bool = SELF_TEST,
):
    """Bound states split off the continuum by a single-site field."""
    params = dict(L=L, J=J, h=h, h_imp=h_imp, site=site)
    _dispatch(ctx, "impurity", params, self_test)


@app.command("localization")
def cli_localization(
    ctx: typer.Context,
    L: Optional[str] = typer.Option(None, "--L", help="Sizes, e.g. 128,256"),
    samples: Optional[int] = typer.Option(None, "--samples", min=1),
    J_range: Optional[str] = typer.Option(None, "--J-range"),
    h_range: Optional[str] = typer.Option(None, "--h-range"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    self_test: bool = SELF_TEST,
):
    """IPR and envelope slopes over a disorder ensemble."""
    params = dict(
        L=L, samples=samples, J_range=_range(J_range),
        h_range=_range(h_range), kappa=kappa, bc=bc and bc.value,
    )
    _dispatch(ctx, "localization", params, self_test)


# #################
# Dynamics
# #################


@app.command("anneal")
def cli_anneal(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h_i: Optional[float] = typer.Option(None, "--h-i"),
    h_f: Optional[float] = typer.Option(None, "--h-f"),
    tau: Optional[float] = typer.Option(None, "--tau"),
    shape: Optional[str] = typer.Option(None, "--shape"),
    method: Optional[str] = typer.Option(None, "--method"),
    points: Optional[int] = typer.Option(None, "--points", min=2),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    sector: Optional[int] = typer.Option(None, "--sector", min=0, max=1),
    dt_max: Optional[float] = typer.Option(None, "--dt-max"),
    propagator: Optional[str] = typer.Option(None, "--propagator"),
    self_test: bool = SELF_TEST,
):
    """Defect density and energy along a field anneal."""
    params = dict(
        L=L, J=J, kappa=kappa, h_i=h_i, h_f=h_f, tau=tau, shape=shape,
        method=method, points=points, bc=bc and bc.value, sector=sector,
        dt_max=dt_max, propagator=propagator,
    )
    _dispatch(ctx, "anneal", params, self_test)


@app.command("kibble-zurek")
def cli_kibble_zurek(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h_i: Optional[float] = typer.Option(None, "--h-i"),
    h_f: Optional[float] = typer.Option(None, "--h-f"),
    tau_min: Optional[float] = typer.Option(None, "--tau-min"),
    tau_max: Optional[float] = typer.Option(None, "--tau-max"),
    count: Optional[int] = typer.Option(None, "--count", min=2),
    method: Optional[str] = typer.Option(None, "--method"),
    shape: Optional[str] = typer.Option(None, "--shape"),
    self_test: bool = SELF_TEST,
):
    """Final defect density against anneal time, with a log-log fit."""
    params = dict(
        L=L, J=J, kappa=kappa, h_i=h_i, h_f=h_f, tau_min=tau_min,
        tau_max=tau_max, count=count, method=method, shape=shape,
    )
    _dispatch(ctx, "kibble-zurek", params, self_test)


@app.command("floquet")
def cli_floquet(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[float] = typer.Option(None, "--h"),
    dh: Optional[float] = typer.Option(None, "--dh"),
    tau: Optional[float] = typer.Option(None, "--tau", help="Period"),
    shape: Optional[str] = typer.Option(None, "--shape"),
    samples: Optional[int] = typer.Option(None, "--samples", min=2),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    sector: Optional[int] = typer.Option(None, "--sector", min=0, max=1),
    self_test: bool = SELF_TEST,
):
    """Quasi-energies of a periodically driven chain."""
    params = dict(
        L=L, J=J, kappa=kappa, h=h, dh=dh, tau=tau, shape=shape,
        samples=samples, bc=bc and bc.value, sector=sector,
    )
    _dispatch(ctx, "floquet", params, self_test)


@app.command("overlap")
def cli_overlap(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h0: Optional[float] = typer.Option(None, "--h0"),
    h1: Optional[float] = typer.Option(None, "--h1"),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    sector: Optional[int] = typer.Option(None, "--sector", min=0, max=1),
    self_test: bool = SELF_TEST,
):
    """Overlaps of pre-quench and post-quench Fock states."""
    params = dict(
        L=L, J=J, kappa=kappa, h0=h0, h1=h1, bc=bc and bc.value, sector=sector
    )
    _dispatch(ctx, "overlap", params, self_test)


# #################
# Equilibrium
# #################


@app.command("thermal")
def cli_thermal(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[float] = typer.Option(None, "--h"),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    beta_grid: Optional[str] = typer.Option(None, "--beta-grid"),
    validate: bool = typer.Option(False, "--validate", help="Add ED deltas"),
    self_test: bool = SELF_TEST,
):
    """Parity-projected thermal energy density and log Z."""
    params = dict(
        L=L, J=J, kappa=kappa, h=h, bc=bc and bc.value, beta=beta_grid,
        validate=validate or None,
    )
    _dispatch(ctx, "thermal", params, self_test)


@app.command("correlate")
def cli_correlate(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[float] = typer.Option(None, "--h"),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    sector: Optional[int] = typer.Option(None, "--sector", min=0, max=1),
    j1: Optional[int] = typer.Option(None, "--j1", min=0),
    self_test: bool = SELF_TEST,
):
    """Ground-state sx sx and sz sz correlators against distance."""
    params = dict(
        L=L, J=J, kappa=kappa, h=h, bc=bc and bc.value, sector=sector, j1=j1
    )
    _dispatch(ctx, "correlate", params, self_test)


@app.command("entropy")
def cli_entropy(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    J: Optional[float] = typer.Option(None, "--J"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    h: Optional[float] = typer.Option(None, "--h"),
    bc: Optional[BoundaryCondition] = typer.Option(None, "--bc"),
    sector: Optional[int] = typer.Option(None, "--sector", min=0, max=1),
    sizes: Optional[str] = typer.Option(
        None, "--sizes", help="Half-chain scan over sizes, e.g. 32,64,128"
    ),
    bits: bool = typer.Option(False, "--bits", help="Entropy in bits"),
    self_test: bool = SELF_TEST,
):
    """Block entanglement entropy of the ground state."""
    params = dict(
        L=L, J=J, kappa=kappa, h=h, bc=bc and bc.value, sector=sector,
        sizes=sizes, bits=bits or None,
    )
    _dispatch(ctx, "entropy", params, self_test)


@app.command("validate")
def cli_validate(
    ctx: typer.Context,
    L: Optional[int] = typer.Option(None, "--L"),
    kappa: Optional[float] = typer.Option(None, "--kappa"),
    J_range: Optional[str] = typer.Option(None, "--J-range"),
    h_range: Optional[str] = typer.Option(None, "--h-range"),
    beta: Optional[str] = typer.Option(None, "--beta"),
    self_test: bool = SELF_TEST,
):
    """Compare every module with exact diagonalization."""
    params = dict(
        L=L, kappa=kappa, J_range=_range(J_range), h_range=_range(h_range),
        beta=beta,
    )
    _dispatch(ctx, "validate", params, self_test)


@app.command("list")
def cli_list():
    """List the registered experiments."""
    table = Table("Command", "Experiment")
    for name in ExperimentRegistry.names():
        table.add_row(name, ExperimentRegistry._experiments[name].__name__)
    console.print(table)


if __name__ == "__main__":
    app()
