import functools
import logging
import sys
from pathlib import Path

import click

from assembly.assembly_models import AssemblyClass
from assembly.errors import IO_CODES, HarnessError, RampError
from assembly.goal_io import load_catalog, load_goal
from bench.protocol import run_protocol
from bench.report import load_report, recompute_summary, summaries_agree
from execution.config import load_config
from execution.simulator import replay as replay_trace
from execution.trace_io import read_trace
from planning.planner import load_domains, plan as plan_goal, write_plan
from settings import get_settings

logger = logging.getLogger(__name__)


def exit_code(error: RampError) -> int:
    return 2 if error.code in IO_CODES else 1


def reports_errors(command):
    """Turn a RampError into a message on stderr and the matching exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except RampError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(exit_code(e))

    return wrapper


@click.group()
@click.option("--log-level", default=None, help="Overrides RAMP_LOG_LEVEL.")
def cli(log_level):
    """Plan, execute and score assemblies of the benchmark."""
    settings = get_settings()
    logging.basicConfig(
        level=(log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@cli.command()
@click.option("--goal", "goal_path", required=True, type=click.Path(path_type=Path))
@click.option("--domains", "domains_dir", type=click.Path(path_type=Path), default=None)
@click.option("--catalog", "catalog_dir", type=click.Path(path_type=Path), default=None)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@reports_errors
def plan(goal_path, domains_dir, catalog_dir, out_path):
    """Plan one goal file and write the fine plan as JSON."""
    settings = get_settings()
    catalog = load_catalog(catalog_dir or settings.catalog)
    goal = load_goal(goal_path, list(catalog.beams))
    domains = load_domains(domains_dir or settings.domains)
    fine_plan, stats = plan_goal(
        goal,
        catalog,
        domains.coarse,
        domains.fine,
        domains.bridge,
        coarse_horizon=settings.coarse_horizon,
        fine_horizon=settings.fine_horizon,
    )
    write_plan(fine_plan, stats, out_path)
    click.echo(
        f"{goal.goal_id}: {stats.coarse_horizon} coarse steps, "
        f"{stats.fine_length} fine actions, {stats.planning_time_s:.2f}s"
    )


@cli.command()
@click.option(
    "--class",
    "assembly_class",
    required=True,
    type=click.Choice([c.value for c in AssemblyClass]),
)
@click.option("--catalog", "catalog_dir", type=click.Path(path_type=Path), default=None)
@click.option("--domains", "domains_dir", type=click.Path(path_type=Path), default=None)
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Overrides the config seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--parallel-goals", is_flag=True, help="Run the class's goals concurrently.")
@reports_errors
def run(assembly_class, catalog_dir, domains_dir, config_path, seed, out_dir, parallel_goals):
    """Run the five-repeat protocol over one class."""
    settings = get_settings()
    catalog = load_catalog(catalog_dir or settings.catalog)
    domains = load_domains(domains_dir or settings.domains)
    config = load_config(config_path)
    if seed is not None:
        config = config.with_seed(seed)
    report = run_protocol(
        AssemblyClass(assembly_class),
        catalog,
        domains,
        config,
        out_dir,
        grid_dt_s=settings.grid_dt_s,
        coarse_horizon=settings.coarse_horizon,
        fine_horizon=settings.fine_horizon,
        parallel_goals=parallel_goals,
        progress=sys.stderr.isatty(),
    )
    for goal in report.goals:
        click.echo(f"{goal.goal_id}: {goal.mean_success_pct:.1f}% {goal.mean_time_s:.1f}s")
    click.echo(
        f"{assembly_class}: {report.summary.mean_success_pct:.1f}% "
        f"{report.summary.mean_time_s:.1f}s"
    )


@cli.command()
@click.option("--trace", "trace_path", required=True, type=click.Path(path_type=Path))
@click.option("--goal", "goal_path", required=True, type=click.Path(path_type=Path))
@reports_errors
def replay(trace_path, goal_path):
    """Print the completion step function of a trace."""
    goal = load_goal(goal_path)
    curve = replay_trace(read_trace(trace_path), goal)
    click.echo("time_s,completion_pct")
    for point in curve:
        click.echo(f"{point.t_s!r},{point.completion_pct!r}")


@cli.command()
@click.option("--in", "in_dir", required=True, type=click.Path(path_type=Path))
@reports_errors
def report(in_dir):
    """Recompute the summary from the traces and compare it with report.json."""
    stored = load_report(in_dir).summary
    recomputed = recompute_summary(in_dir)
    click.echo(f"report.json: {stored.mean_success_pct:.4f}% {stored.mean_time_s:.4f}s")
    click.echo(f"traces:      {recomputed.mean_success_pct:.4f}% {recomputed.mean_time_s:.4f}s")
    if not summaries_agree(stored, recomputed):
        raise HarnessError("SUMMARY_MISMATCH", "report.json disagrees with its traces")


if __name__ == "__main__":
    cli()
