"""Command-line entry point.

Thin wrapper over :mod:`gridprivacy.pipeline`: each subcommand collects its
flags, merges them with an optional key=value config file (flags win), runs
the pipeline, and prints a one-line summary. Exit codes are stable: 0 on
success, 1 for validation problems, 2 for runtime/convergence failures.
"""
from __future__ import annotations

import json
import sys
from typing import Callable

import click

from .config import RunConfig, resolve_config
from .errors import ComputationError, ValidationError
from .pipeline import run_compare, run_privatize, run_profile, run_topology

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _shared_options(command: Callable) -> Callable:
    options = [
        click.option("--config", "config_path", type=str, default=None,
                     help="key = value config file; flags override it"),
        click.option("--seed", type=int, default=None, help="run seed (64-bit integer)"),
        click.option("--out", type=str, default=None, help="output directory"),
        click.option("--eps-min", type=float, default=None, help="lower epsilon bound"),
        click.option("--eps-max", type=float, default=None, help="upper epsilon bound"),
        click.option("--th-d", type=float, default=None,
                     help="distance threshold; beyond it epsilon is drawn at random"),
        click.option("--sensitivity", type=float, default=None,
                     help="query sensitivity (per-record maximum)"),
        click.option("--delta", type=float, default=None,
                     help="re-identification window for the risk model"),
        click.option("--cases", type=str, default=None,
                     help="comparison cases, e.g. 0.6:0.6,0.6:0.8,0.8:0.6,0.8:0.8"),
        click.option("--mode", type=str, default=None,
                     help="epsilon assignment: udp, pdp-distance, pdp-preference, pdp-explicit"),
        click.option("--topology", type=str, default=None, help="topology file"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _run(runner: Callable[[RunConfig], dict], config_path: str | None, **overrides) -> None:
    try:
        config = resolve_config(config_path, overrides)
        summary = runner(config)
    except ValidationError as error:
        click.echo(f"error: {error}", err=True)
        sys.exit(EXIT_VALIDATION)
    except ComputationError as error:
        click.echo(f"error: {error}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(json.dumps(summary, sort_keys=True))


@click.group()
def main() -> None:
    """Grid privacy analysis: topology stats, vulnerability profiling,
    personalized privatization, and the uniform-vs-personalized comparison."""


@main.command()
@_shared_options
def topology(config_path, **overrides) -> None:
    """Adjacency/Laplacian matrices, centralities, and diameter."""
    _run(run_topology, config_path, **overrides)


@main.command()
@_shared_options
@click.option("--incidents", type=str, default=None, help="attack incident CSV")
@click.option("--vulnerabilities", type=str, default=None, help="vulnerability record CSV")
def profile(config_path, **overrides) -> None:
    """Vulnerability ranking and the best attack profile."""
    _run(run_profile, config_path, **overrides)


@main.command()
@_shared_options
@click.option("--data", type=str, default=None, help="consumption CSV")
@click.option("--synthetic", type=str, default=None,
              help="generate data instead: HOMESxMINUTES, e.g. 100x1440")
@click.option("--epsilon", type=float, default=None, help="shared epsilon for udp mode")
@click.option("--plan", type=str, default=None, help="per-node epsilon plan file")
@click.option("--destination", type=str, default=None,
              help="distance-mode destination node (default: the cloud node)")
def privatize(config_path, **overrides) -> None:
    """Release the dataset under the configured epsilon plan."""
    _run(run_privatize, config_path, **overrides)


@main.command()
@_shared_options
@click.option("--data", type=str, default=None, help="consumption CSV")
@click.option("--synthetic", type=str, default=None,
              help="generate data instead: HOMESxMINUTES, e.g. 100x1440")
@click.option("--aggregation-map", type=str, default=None, help="child,parent rollup CSV")
@click.option("--compare-seeds", type=int, default=None,
              help="number of noise seeds per case (default 30)")
def compare(config_path, **overrides) -> None:
    """Run the case study across fog and cloud tiers."""
    _run(run_compare, config_path, **overrides)


if __name__ == "__main__":
    main()
