"""Command-line interface: city generation, batch experiments, HTTP service."""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from .city import CityConfig, generate_city, save_city
from .harness import ARMS, ExperimentConfig, run_experiment


@click.group()
def main():
    """Cooperative day-trip design assistant."""


@main.command("gen-city")
@click.option("--n", type=click.IntRange(min=1), default=100, show_default=True,
              help="Number of POIs.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--size-km", type=float, default=10.0, show_default=True)
@click.option("--categories", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--dur-min", type=float, default=0.5, show_default=True)
@click.option("--dur-max", type=float, default=2.5, show_default=True)
@click.option("--cost-min", type=float, default=0.0, show_default=True)
@click.option("--cost-max", type=float, default=30.0, show_default=True)
def gen_city(n, seed, out, size_km, categories, dur_min, dur_max, cost_min, cost_max):
    """Generate a random city and write it as a JSON POI file."""
    config = CityConfig(
        size_km=size_km,
        n_categories=categories,
        visit_duration_range=(dur_min, dur_max),
        entry_cost_range=(cost_min, cost_max),
    )
    city = generate_city(n, seed, config)
    save_city(city, out)
    click.echo(f"wrote {len(city)} POIs to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON experiment config; flags below override its fields.")
@click.option("--pois", type=click.IntRange(min=1), default=None)
@click.option("--iterations", type=click.IntRange(min=0), default=None)
@click.option("--runs", type=click.IntRange(min=1), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--budget", type=float, default=None, help="Duration budget in hours.")
@click.option("--particles", type=click.IntRange(min=2), default=None)
@click.option("--info-gain-weight", type=float, default=None)
@click.option("--tour-mode", type=click.Choice(["closed", "open"]), default=None)
@click.option("--assisted", "arms", flag_value="assisted")
@click.option("--unassisted", "arms", flag_value="unassisted")
@click.option("--both", "arms", flag_value="both", default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="results.csv", show_default=True)
@click.option("--plot/--no-plot", default=True, show_default=True,
              help="Render the utility-curve figure next to the CSV.")
@click.option("--plot-out", type=click.Path(dir_okay=False), default=None,
              help="Figure path (default: CSV path with .png suffix).")
@click.option("--trace-out", type=click.Path(dir_okay=False), default=None,
              help="Optional per-iteration JSONL trace dump.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
def simulate(config_path, pois, iterations, runs, seed, budget, particles,
             info_gain_weight, tour_mode, arms, out, plot, plot_out, trace_out, workers):
    """Run the assisted-vs-unassisted batch experiment and write the results
    table (plus its figure)."""
    doc = {}
    if config_path:
        doc = json.loads(Path(config_path).read_text())
    config = ExperimentConfig.from_dict(doc) if doc else ExperimentConfig()

    import dataclasses

    if pois is not None:
        config = dataclasses.replace(config, n_pois=pois)
    if iterations is not None:
        config = dataclasses.replace(config, n_iterations=iterations)
    if runs is not None:
        config = dataclasses.replace(config, n_runs=runs)
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    if budget is not None:
        config = dataclasses.replace(
            config, trip=dataclasses.replace(config.trip, duration_budget_h=budget)
        )
    if tour_mode is not None:
        config = dataclasses.replace(
            config, trip=dataclasses.replace(config.trip, tour_mode=tour_mode)
        )
    if particles is not None:
        config = dataclasses.replace(
            config, assistant=dataclasses.replace(config.assistant, n_particles=particles)
        )
    if info_gain_weight is not None:
        config = dataclasses.replace(
            config, assistant=dataclasses.replace(config.assistant, info_gain_weight=info_gain_weight)
        )

    selected = ARMS if arms == "both" else (arms,)
    result = run_experiment(config, arms=selected, workers=workers, trace_path=trace_out)
    result.write_csv(out)
    click.echo(f"wrote {out}")
    if plot:
        from .plots import plot_utility_curves

        figure_path = plot_out or str(Path(out).with_suffix(".png"))
        plot_utility_curves(result, figure_path)
        click.echo(f"wrote {figure_path}")
    for line in result.summary_lines():
        click.echo(line)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None,
              help="Defaults to $DAYTRIP_PORT or 8000.")
@click.option("--event-log", type=click.Path(file_okay=False), default=None,
              help="Directory for append-only per-session event logs.")
def serve(host, port, event_log):
    """Serve the interactive design-session HTTP API."""
    import uvicorn

    from .service import create_app

    if port is None:
        port = int(os.environ.get("DAYTRIP_PORT", "8000"))
    uvicorn.run(create_app(event_log_dir=event_log), host=host, port=port)


if __name__ == "__main__":
    main()
