#!/usr/bin/env python3
"""
Command line front end for srs-weakness
Subcommands map, experiment, train, predict and inspect over one shared RunConfig
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any, TypeVar

import typer

from .config import RunConfig, load_config
from .errors import ConfigError, SrsWeaknessError
from .pipeline import (
    default_predictions_path,
    format_inspection,
    inspect_artifact,
    run_experiment_command,
    run_map,
    run_predict,
    run_train,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
EXIT_INTERNAL = 2

T = TypeVar("T")

app = typer.Typer(
    name="srs-weakness",
    help="Map CWE weaknesses onto software requirements and compare weakness-category classifiers.",
    no_args_is_help=True,
    add_completion=False,
)


@dataclass
class GlobalOptions:
    config: Path | None = None
    seed: int | None = None
    force: bool = False
    output_dir: Path | None = None


def _report_success(key_info: str, *details: str) -> None:
    typer.echo(f"[SUCCESS] {key_info}")
    for line in details:
        typer.echo(line)


def _run(action: Callable[[], T]) -> T:
    """Run a command body, turning pipeline errors into one [ERROR] line and an exit code"""
    try:
        return action()
    except SrsWeaknessError as e:
        typer.echo(f"[ERROR] {e.code}: {e}", err=True)
        raise typer.Exit(e.exit_code) from e
    except Exception as e:
        logger.exception("Unexpected failure")
        typer.echo(f"[ERROR] InvariantViolation: {e}", err=True)
        raise typer.Exit(EXIT_INTERNAL) from e


def _split_list(value: str | None, cast: Callable[[str], T], flag: str) -> list[T] | None:
    if value is None:
        return None
    try:
        return [cast(part.strip()) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"{flag}: cannot parse '{value}'") from e


def _set(overrides: dict[str, Any], section: str, key: str, value: Any) -> None:
    if value is not None:
        overrides.setdefault(section, {})[key] = value


def _load(ctx: typer.Context, overrides: dict[str, Any]) -> RunConfig:
    options: GlobalOptions = ctx.obj
    if options.seed is not None:
        _set(overrides, "lsa", "seed", options.seed)
        _set(overrides, "mlp", "seed", options.seed)
        overrides.setdefault("experiment", {}).setdefault("seeds", [options.seed])
    _set(overrides, "paths", "output_dir", options.output_dir)
    return load_config(options.config, overrides)


@app.callback()
def main_callback(
    ctx: typer.Context,
    config: Path | None = typer.Option(None, "--config", help="JSON config file (else $SRS_WEAKNESS_CONFIG)."),
    seed: int | None = typer.Option(None, "--seed", help="Seed for LSA, classifiers and (by default) splits."),
    force: bool = typer.Option(False, "--force", help="Overwrite existing output files."),
    output_dir: Path | None = typer.Option(None, "--output-dir", help="Directory for every written artifact."),
    log_level: str = typer.Option("INFO", "--log-level", help="Logging level (DEBUG, INFO, WARNING, ERROR)."),
) -> None:
    logging.basicConfig(level=log_level.upper(), format=LOG_FORMAT, force=True)
    ctx.obj = GlobalOptions(config, seed, force, output_dir)


@app.command("map")
def cmd_map(
    ctx: typer.Context,
    weaknesses: Path | None = typer.Option(None, "--weaknesses", help="CWE weakness CSV (ID, Name, Description)."),
    categories: Path | None = typer.Option(None, "--categories", help="CWE category CSV (CategoryID, CategoryName, MemberID)."),
    requirements: Path | None = typer.Option(None, "--requirements", help="Requirements CSV."),
    k: int | None = typer.Option(None, "--k", help="LSA rank."),
    weighting: str | None = typer.Option(None, "--weighting", help="raw_counts or tfidf."),
) -> None:
    """Label every requirement with its closest CWE weakness category and write the training set."""

    def action() -> None:
        overrides: dict[str, Any] = {}
        _set(overrides, "paths", "cwe_weaknesses", weaknesses)
        _set(overrides, "paths", "cwe_categories", categories)
        _set(overrides, "paths", "requirements", requirements)
        _set(overrides, "lsa", "k", k)
        _set(overrides, "text", "weighting", weighting)
        result = run_map(_load(ctx, overrides), ctx.obj.force)
        dataset = result.dataset
        _report_success(
            f"Mapped {len(dataset)} requirements onto {len(set(dataset.labels))} categories "
            f"(k={dataset.provenance['k']}, {len(dataset.flagged_rows())} low-similarity rows)",
            *(f"wrote {path}" for path in result.written),
        )

    _run(action)


@app.command("experiment")
def cmd_experiment(
    ctx: typer.Context,
    dataset: Path | None = typer.Option(None, "--dataset", help="Training-set CSV (default <output-dir>/training_set.csv)."),
    seeds: str | None = typer.Option(None, "--seeds", help="Comma-separated seed list, e.g. 1,2,3."),
    fractions: str | None = typer.Option(None, "--fractions", help="Comma-separated train fractions, e.g. 0.8,0.7,0.6."),
    algorithms: str | None = typer.Option(None, "--algorithms", help="Comma-separated algorithm names."),
    feature_kind: str | None = typer.Option(None, "--feature-kind", help="latent, counts or tfidf."),
    workers: int | None = typer.Option(None, "--workers", help="Threads used to run experiment cells."),
) -> None:
    """Train and score every algorithm over every split fraction and seed."""

    def action() -> None:
        overrides: dict[str, Any] = {}
        _set(overrides, "paths", "dataset", dataset)
        _set(overrides, "experiment", "seeds", _split_list(seeds, int, "--seeds"))
        _set(overrides, "experiment", "fractions", _split_list(fractions, float, "--fractions"))
        _set(overrides, "experiment", "algorithms", _split_list(algorithms, str, "--algorithms"))
        _set(overrides, "experiment", "feature_kind", feature_kind)
        _set(overrides, "experiment", "workers", workers)
        result = run_experiment_command(_load(ctx, overrides), ctx.obj.force)
        report = result.report
        failed = sum(1 for cell in report.cells if not cell.ok)
        _report_success(
            f"Ran {len(report.cells)} cells ({len(report.algorithms)} algorithms x {len(report.fractions)} splits "
            f"x {len(report.seeds)} seeds, {failed} FAILED)",
            *(f"wrote {path}" for path in result.written),
        )
        typer.echo("")
        typer.echo(report.summary_text(), nl=False)

    _run(action)


@app.command("train")
def cmd_train(
    ctx: typer.Context,
    dataset: Path | None = typer.Option(None, "--dataset", help="Training-set CSV (default <output-dir>/training_set.csv)."),
    algorithm: str | None = typer.Option(None, "--algorithm", help="Algorithm to train (default mlp)."),
    feature_kind: str | None = typer.Option(None, "--feature-kind", help="latent, counts or tfidf."),
    bundle_dir: Path | None = typer.Option(None, "--bundle-dir", help="Bundle directory (default <output-dir>/bundle)."),
    weaknesses: Path | None = typer.Option(None, "--weaknesses", help="CWE weakness CSV, for category names."),
    categories: Path | None = typer.Option(None, "--categories", help="CWE category CSV, for category names."),
) -> None:
    """Train one classifier on the whole training set and save a prediction bundle."""

    def action() -> None:
        overrides: dict[str, Any] = {}
        _set(overrides, "paths", "dataset", dataset)
        _set(overrides, "paths", "bundle_dir", bundle_dir)
        _set(overrides, "paths", "cwe_weaknesses", weaknesses)
        _set(overrides, "paths", "cwe_categories", categories)
        _set(overrides, "train", "algorithm", algorithm)
        _set(overrides, "train", "feature_kind", feature_kind)
        config = _load(ctx, overrides)
        bundle = run_train(config, ctx.obj.force)
        _report_success(
            f"Trained {bundle.manifest['algorithm']} on {bundle.manifest['feature_kind']} features "
            f"({len(bundle.model.class_set)} categories)",
            f"wrote {config.bundle_path}",
        )

    _run(action)


@app.command("predict")
def cmd_predict(
    ctx: typer.Context,
    srs_file: Path = typer.Argument(..., help="Requirements: one per line, or the requirements CSV schema."),
    bundle: Path | None = typer.Option(None, "--bundle", help="Bundle directory written by train."),
    output: Path | None = typer.Option(None, "--output", help="Prediction CSV (default <output-dir>/predictions.csv)."),
) -> None:
    """Predict the weakness category of every requirement in an SRS file."""

    def action() -> None:
        config = _load(ctx, {})
        output_path = output or default_predictions_path(config)
        if output is None:
            config.ensure_output_dir()
        result = run_predict(
            bundle or config.bundle_path,
            srs_file,
            output_path,
            ctx.obj.force,
            config.requirements_columns.as_columns(),
        )
        _report_success(f"Predicted {result.n_predictions} requirements", f"wrote {result.output}")

    _run(action)


@app.command("inspect")
def cmd_inspect(
    path: Path = typer.Argument(..., help="Training set, provenance file, report, model file or bundle directory."),
) -> None:
    """Print the provenance recorded for any artifact."""
    info = _run(lambda: inspect_artifact(path))
    typer.echo(format_inspection(info))


def main() -> None:
    """Entry point for the srs-weakness command"""
    app()


if __name__ == "__main__":
    main()
