import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import click
from pydantic import ValidationError
from rich.box import HEAVY_EDGE
from rich.console import Console
from rich.table import Table

from supremal import gallery
from supremal.cli.config import load_run_config, resolve
from supremal.cli.constants import GALLERY_COLUMNS
from supremal.cli.run import exit_status, run
from supremal.grid import write_field_csv
from supremal.utilities.constants import EXIT_CONFIG
from supremal.utilities.errors import ConfigError, SupremalError
from supremal.utilities.events import (
    CheckEvent,
    ConfigErrorEvent,
    emit,
    event_payload,
    on,
    supremal_events,
)


def _echo_event(source: Any, event: CheckEvent) -> None:
    click.echo(json.dumps(event_payload(event), sort_keys=True), err=True)


def _config_error(error: Exception) -> None:
    if isinstance(error, ValidationError):
        message = f"Invalid value: {error.errors()[0]['msg']}"
    else:
        message = str(error)
    emit(
        _config_error,
        ConfigErrorEvent(
            message=message,
            line=getattr(error, "line", None),
            column=getattr(error, "column", None),
        ),
    )
    click.secho(f"Error: {message}", fg="red", err=True)


def _execute(
    ctx: click.Context, checks: Optional[List[str]] = None, options: Optional[Dict] = None
) -> None:
    overrides = dict(ctx.obj["overrides"])
    if checks is not None:
        overrides["checks"] = checks
    overrides.update(options or {})
    try:
        config = load_run_config(ctx.obj["config_path"], overrides)
        problem = resolve(config)
    except (SupremalError, ValidationError) as e:
        _config_error(e)
        ctx.exit(EXIT_CONFIG)
    try:
        results = run(config, verbose=ctx.obj["verbose"], problem=problem)
    except ConfigError as e:
        _config_error(e)
        ctx.exit(EXIT_CONFIG)
    for result in results:
        click.echo(f"{result.check}: {result.status} ({result.report_path})")
        if isinstance(result.report, dict) and "error" in result.report:
            click.secho(
                f"  {result.report['error']}: {result.report['message']}", fg="red", err=True
            )
        for path in result.plot_files:
            click.echo(f"  plot data: {path}")
    ctx.exit(exit_status(results))


@click.group()
@click.version_option(package_name="supremal")
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="JSON/JSON5 run config; flags override its fields",
)
@click.option("--seed", type=int, help="Seed for every sampler")
@click.option("--grid-h", type=float, help="Grid spacing")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Report directory")
@click.option("--tol", type=float, help="Tolerance for minimality margins and falsifier gaps")
@click.option("-v", "--verbose", is_flag=True, help="Progress on standard error")
@click.pass_context
def supremal(ctx, config_path, seed, grid_h, out, tol, verbose):
    """Rank-one minimality checks for supremal functionals.

    Exit status: 0 pass, 2 pass with warnings, 1 failure, 64 config error.
    Events are written to standard error, one JSON object per line.
    """
    ctx.ensure_object(dict)
    ctx.obj.update(
        config_path=config_path,
        verbose=verbose,
        overrides={
            "seed": seed,
            "grid.h": grid_h,
            "out": str(out) if out is not None else None,
            "tol": tol,
        },
    )
    on(_echo_event)
    ctx.call_on_close(lambda: supremal_events.disconnect(_echo_event))


@supremal.command("run")
@click.pass_context
def run_all(ctx):
    """Run every check listed in the config."""
    _execute(ctx)


@supremal.command("check-minimality")
@click.option("--trials", type=int, help="Random rank-one variations")
@click.pass_context
def check_minimality(ctx, trials):
    """Seeded variations u + xi phi against the extremum-ball inequality."""
    _execute(ctx, ["minimality"], {"minimality.trials": trials})


@supremal.command()
@click.option("--budget", type=int, help="Random competitors on top of the structured ones")
@click.option("--expect-none", is_flag=True, help="Pass when no witness is found")
@click.pass_context
def falsify(ctx, budget, expect_none):
    """Search for a competitor with a strictly smaller supremal energy."""
    _execute(
        ctx,
        ["falsify"],
        {"falsify.budget": budget, "falsify.expect_witness": False if expect_none else None},
    )


@supremal.command("convexity-check")
@click.option("--segments", type=int, help="Random rank-one segments")
@click.pass_context
def convexity_check(ctx, segments):
    """Rank-one level-convexity of H and of its sections."""
    _execute(ctx, ["convexity"], {"convexity.segments": segments})


@supremal.command()
@click.option(
    "--kind",
    type=click.Choice(["hj", "scalar", "system", "tangential", "normal"]),
    help="Residual to evaluate",
)
@click.option("--h", "hs", type=float, multiple=True, help="Extra spacing for the order fit")
@click.option("--heat-map", is_flag=True, help="Emit the per-point residual map")
@click.pass_context
def residual(ctx, kind, hs, heat_map):
    """Residual sweep over the mask with the observed convergence order."""
    _execute(
        ctx,
        ["residual"],
        {
            "residual.kind": kind,
            "residual.hs": list(hs) or None,
            "residual.heat_map": heat_map or None,
        },
    )


@supremal.command("mollify-demo")
@click.option("--epsilon", "epsilons", type=float, multiple=True, help="Decreasing kernel radii")
@click.pass_context
def mollify_demo(ctx, epsilons):
    """Shell mollification of the field against the ring-wise bounds."""
    _execute(ctx, ["mollify-demo"], {"mollify.epsilons": list(epsilons) or None})


@supremal.command()
@click.option("--trials", type=int, help="Random discrete measures")
@click.pass_context
def jensen(ctx, trials):
    """Jensen inequality for the level-convex section of H."""
    _execute(ctx, ["jensen"], {"jensen.trials": trials})


@supremal.command("gallery")
@click.option("--csv", "csv_name", help="Write this entry, sampled on the configured grid, as CSV")
@click.pass_context
def gallery_command(ctx, csv_name):
    """List the analytic test fields."""
    table = Table(title="Gallery", box=HEAVY_EDGE)
    for column in GALLERY_COLUMNS:
        table.add_column(column, style="cyan" if column == "name" else None)
    for row in gallery.describe():
        table.add_row(*[
            json.dumps(row[c], sort_keys=True, default=str) if c == "facts" else str(row[c])
            for c in GALLERY_COLUMNS
        ])
    Console().print(table)

    if csv_name is None:
        return
    try:
        config = load_run_config(ctx.obj["config_path"], ctx.obj["overrides"])
        field = gallery.sample(csv_name, config.domain())
    except (SupremalError, ValidationError) as e:
        _config_error(e)
        ctx.exit(EXIT_CONFIG)
    path = write_field_csv(field, config.out / f"{csv_name}.csv", with_header_json=True)
    click.echo(f"Wrote {path}")
