"""Command-line interface: thin dispatch onto the experiment runner.

Usage: ``bundle-auction-lab <subcommand> --config <path> [--out <path>]
[--seed N] [--samples N]``.  Flags override the matching config fields.  The
CSV goes to ``--out`` (or stdout); run metadata goes to stderr.  Exit status
is 0 on success and 1 when a verify-style subcommand's check fails (the
failure is data -- the full CSV is still emitted).  ``BUNDLE_LAB_THREADS``
caps worker threads for grid evaluations (default: all cores).
"""

from __future__ import annotations

import os
import sys
from dataclasses import replace
from pathlib import Path

import click

from . import __version__
from .experiments import ConfigError, emit_csv, parse_config, render_footer, run


def _threads_from_env() -> int | None:
    raw = os.environ.get("BUNDLE_LAB_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise click.ClickException(
            f"BUNDLE_LAB_THREADS must be a positive integer, got {raw!r}"
        )
    if value < 1:
        raise click.ClickException("BUNDLE_LAB_THREADS must be >= 1")
    return value


def _execute(command: str, config_path: str, out, seed, samples) -> None:
    try:
        config = parse_config(Path(config_path).read_text(encoding="utf-8"))
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    if config.command != command:
        raise click.ClickException(
            f"config is for command {config.command!r}, invoked as {command!r}"
        )
    if seed is not None:
        if seed < 0:
            raise click.ClickException("--seed must be nonnegative")
        config = replace(config, seed=seed)
    if samples is not None:
        if samples < 1:
            raise click.ClickException("--samples must be positive")
        config = replace(config, n_samples=samples)

    try:
        report = run(config, out_path=out, threads=_threads_from_env())
    except (ConfigError, ValueError) as exc:
        raise click.ClickException(str(exc))

    if not (out or config.out):
        emit_csv(report, sys.stdout)
    sys.stderr.write(render_footer(report))
    if report.passed is False:
        raise SystemExit(1)


def _subcommand(name: str, help_text: str):
    @click.option("--config", "config_path", required=True,
                  type=click.Path(exists=True, dir_okay=False),
                  help="JSON experiment config.")
    @click.option("--out", type=click.Path(dir_okay=False), default=None,
                  help="CSV output path (default: stdout).")
    @click.option("--seed", type=int, default=None,
                  help="Override the config seed.")
    @click.option("--samples", type=int, default=None,
                  help="Override the config sample count.")
    def command(config_path, out, seed, samples):
        _execute(name, config_path, out, seed, samples)

    command.__doc__ = help_text
    return main.command(name)(command)


@click.group()
@click.version_option(__version__, prog_name="bundle-auction-lab")
def main() -> None:
    """Customer-bundling auction experiments."""


_subcommand("single-opt", "Optimal single price per distribution.")
_subcommand("pair-opt", "Optimize a two-customer bundle offer.")
_subcommand("verify-thm1",
            "Check that an epsilon bundle offer beats optimal single prices.")
_subcommand("verify-thm2",
            "Check the large-bundle near-full-surplus revenue guarantee.")
_subcommand("partition", "Mixed pairs/triples/six-groups population study.")
_subcommand("sweep", "Bernstein tail-bound sweep over group sizes.")


if __name__ == "__main__":  # pragma: no cover
    main()
