"""Command-line interface: simulate, experiment, report, serve."""

from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .engine import CHAIN, EngineError, records_to_csv
from .experiment import (
    EXPORT_FORMATS,
    HeadlessModeError,
    load_experiment_config,
    load_game_config,
    export_batch,
    render_report,
    run_batch,
    run_single,
)
from .metrics import comparison_text, group_table_text


@click.group()
def main() -> None:
    """Four-stage beer distribution game: simulation, experiments, hosting."""


@main.command()
@click.option(
    "--config", "config_path", required=True, type=click.Path(exists=True),
    help="Scenario file with [game] and [policies] sections.",
)
@click.option("--seed", type=int, default=None, help="Override the configured RNG seed.")
@click.option(
    "--out", "out_path", type=click.Path(), default=None,
    help="Write the weekly ledger CSV here (default: stdout).",
)
def simulate(config_path: str, seed: int | None, out_path: str | None) -> None:
    """Run one all-agent game and emit its weekly ledger."""
    config = load_game_config(config_path)
    if seed is not None:
        config = replace(config, rng_seed=seed)
    try:
        summary, records = run_single(config)
    except HeadlessModeError as exc:
        raise click.ClickException(str(exc)) from exc
    csv_text = records_to_csv(records)
    if out_path is None:
        click.echo(csv_text, nl=False)
    else:
        Path(out_path).write_text(csv_text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    for role in CHAIN:
        click.echo(
            f"# {role.value}: total cost {summary.role_total_cost[role]:.2f}, "
            f"order std {summary.role_order_std[role]:.3f}",
            err=True,
        )
    click.echo(f"# chain total cost {summary.chain_total_cost:.2f}", err=True)


@main.command()
@click.option(
    "--config", "config_path", required=True, type=click.Path(exists=True),
    help="Scenario file with [experiment] and [group.*] sections.",
)
@click.option(
    "--out", "out_dir", required=True, type=click.Path(),
    help="Directory for tables, comparison, results.json, and run ledgers.",
)
def experiment(config_path: str, out_dir: str) -> None:
    """Run grouped, seed-paired replications and export the tables."""
    exp = load_experiment_config(config_path)
    try:
        result = run_batch(exp)
    except EngineError as exc:
        raise click.ClickException(str(exc)) from exc
    written = export_batch(result, out_dir)
    for group in result.groups:
        click.echo(group_table_text(group.table, title=f"Group {group.spec.label}"))
    if result.comparison is not None:
        click.echo(comparison_text(result.comparison))
    click.echo(f"wrote {len(written)} files under {out_dir}", err=True)


@main.command()
@click.option(
    "--in", "in_dir", required=True, type=click.Path(exists=True),
    help="Directory produced by the experiment command.",
)
@click.option(
    "--format", "fmt", type=click.Choice(EXPORT_FORMATS), default="text",
    show_default=True,
)
def report(in_dir: str, fmt: str) -> None:
    """Re-render exported experiment results without re-running them."""
    results = Path(in_dir) / "results.json"
    if not results.exists():
        raise click.ClickException(f"no results.json under {in_dir}")
    click.echo(render_report(results, fmt), nl=False)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--config", "config_path", type=click.Path(exists=True), default=None,
    help="Scenario file providing the default session configuration.",
)
@click.option(
    "--spool", "spool_dir", type=click.Path(), default="beergame-sessions",
    show_default=True, help="Directory for per-session event logs.",
)
def serve(port: int, host: str, config_path: str | None, spool_dir: str) -> None:
    """Host live multi-player sessions over HTTP and WebSocket."""
    import uvicorn

    from .server import create_app

    default_config = load_game_config(config_path) if config_path else None
    app = create_app(default_config=default_config, spool_dir=Path(spool_dir))
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
