"""Batch command line: run scenarios, compare against predictions, emit plot data."""

from __future__ import annotations

import os
import sys

import click

from .harness import ResultRecord, ScenarioConfig, compare_with_asymptotics, emit_plot_data, run_scenario

_OUTPUT_ENV = "UAVOPT_OUTPUT_ROOT"


def _resolve_output(output_dir, scenario_id):
    if output_dir:
        return output_dir
    root = os.environ.get(_OUTPUT_ENV, "uavopt-results")
    return os.path.join(root, scenario_id)


@click.group()
def main():
    """Deployment and trajectory experiments for aerial access points."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="Scenario JSON file.")
@click.option("--output-dir", default=None, type=click.Path(),
              help=f"Output directory (default: ${_OUTPUT_ENV}/<scenario_id>).")
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--resolution", default=None, type=int, help="Override quadrature resolution.")
@click.option("-v", "--verbose", is_flag=True, help="Print per-cell progress.")
def run(config_path, output_dir, seed, resolution, verbose):
    """Run one scenario and write results, trajectories and a manifest."""
    cfg = ScenarioConfig.from_file(config_path)
    out = _resolve_output(output_dir, cfg.scenario_id)
    records = run_scenario(cfg, out, seed=seed, resolution=resolution, verbose=verbose)
    failures = [r for r in records if r.status != "ok"]
    for r in records:
        line = f"{r.kind} n={r.n}"
        if r.ell is not None:
            line += f" ell={r.ell:g}"
        line += f": power={r.power:.6g} movement={r.movement_total:.6g} [{r.status}]"
        click.echo(line)
    click.echo(f"wrote {out}")
    if failures:
        click.echo(f"{len(failures)} cell(s) failed", err=True)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--output-dir", default=None, type=click.Path())
@click.option("--seed", default=None, type=int)
@click.option("--resolution", default=None, type=int)
@click.option("-v", "--verbose", is_flag=True)
def compare(config_path, output_dir, seed, resolution, verbose):
    """Run a scenario and gate the results against the closed-form predictions.

    Exits nonzero iff any gated comparison misses its tolerance.
    """
    cfg = ScenarioConfig.from_file(config_path)
    out = _resolve_output(output_dir, cfg.scenario_id)
    records = run_scenario(cfg, out, seed=seed, resolution=resolution, verbose=verbose)
    rows = compare_with_asymptotics(
        records, cfg.density, cfg.model,
        gate_n=cfg.compare_gate_n, max_rel_error=cfg.compare_max_rel_error,
        resolution=cfg.resolution, grid_shape=cfg.grid_shape,
    )
    failed = False
    for row in rows:
        flag = "PASS" if row.passed else "FAIL"
        gate = "gated" if row.gated else "ungated"
        click.echo(f"{row.kind} n={row.n}: simulated={row.simulated:.6g} "
                   f"predicted={row.predicted:.6g} rel_error={row.rel_error:.3%} "
                   f"({gate}) {flag}")
        failed = failed or (row.gated and not row.passed)
    if not rows:
        click.echo("no comparable records (use zero_movement or unlimited_movement kinds)", err=True)
    sys.exit(1 if failed else 0)


@main.command("emit-plots")
@click.option("--results", "results_path", required=True, type=click.Path(exists=True),
              help="results.csv written by run.")
@click.option("--output-dir", default=None, type=click.Path())
@click.option("--kind", "kinds", multiple=True,
              type=click.Choice(["tradeoff", "power_vs_n", "movement_vs_n"]),
              help="Plot families to emit (default: all that apply).")
def emit_plots(results_path, output_dir, kinds):
    """Re-shape a results table into per-figure plot files."""
    records = _load_records(results_path)
    out = output_dir or os.path.join(os.path.dirname(results_path) or ".", "plots")
    wanted = kinds or ("tradeoff", "power_vs_n", "movement_vs_n")
    wrote = []
    for kind in wanted:
        try:
            wrote.append(emit_plot_data(records, kind, out))
        except ValueError:
            continue
    for path in wrote:
        click.echo(f"wrote {path}")
    if not wrote:
        click.echo("nothing to emit for the requested kinds", err=True)
        sys.exit(1)


def _load_records(path):
    records = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        idx = {name: k for k, name in enumerate(header)}
        for line in fh:
            cells = line.rstrip("\n").split("\t")

            def get(name, cast=str, default=None):
                val = cells[idx[name]]
                return default if val == "" else cast(val)

            records.append(ResultRecord(
                scenario_id=get("scenario_id"),
                kind=get("kind"),
                n=get("n", int),
                ell=get("ell", float),
                power=get("power", float, float("nan")),
                movement_total=get("movement_total", float, 0.0),
                per_uav_movement=None,
                lagrangian=get("lagrangian", float),
                epochs_run=get("epochs_run", int, 0),
                seed=get("seed", int, 0),
                status=get("status", str, "ok"),
            ))
    return records


if __name__ == "__main__":
    main()
