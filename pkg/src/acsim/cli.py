"""Command-line interface: generate, evaluate, describe, validate-manifest.

Exit codes: 0 success, 1 usage or configuration error, 2 data error
(bad manifest / unreadable audio), 3 evaluation finished with per-example
failures.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .audio import AudioError
from .catalog import CatalogError, load_catalog, parse_manifest
from .config import ALL_SCENARIO_TAGS, ConfigError, ScenarioSpec, SimulationConfig
from .dataset import (
    GenerationJob,
    describe_example,
    evaluate_set,
    generate_records,
    write_dataset_manifest,
)
from .objectives import LossWeights

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(config_path: str | None) -> SimulationConfig:
    if config_path is None:
        return SimulationConfig()
    return SimulationConfig.load(config_path)


@click.group()
def main():
    """Deterministic simulation of speech-separation mixtures and
    evaluation of separated estimates."""


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=False),
              help="Asset manifest (JSONL).")
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", default=0, show_default=True, type=int,
              help="Master seed; per-example seeds derive from it.")
@click.option("--count", default=60, show_default=True, type=int,
              help="Examples per scenario.")
@click.option("--scenario", default="all", show_default=True,
              help="Scenario tag ({D,S}-{All,NE,NR,N}) or 'all'.")
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="Simulation config JSON (defaults used when omitted).")
@click.option("--workers", default=1, show_default=True, type=int)
def generate(manifest, out, seed, count, scenario, config_path, workers):
    """Generate a dataset of mixture examples with ground-truth targets."""
    try:
        cfg = _load_config(config_path)
        tags = ALL_SCENARIO_TAGS if scenario == "all" else (scenario,)
        scenarios = [ScenarioSpec.from_tag(t) for t in tags]
    except (ConfigError, FileNotFoundError) as exc:
        _fail(EXIT_USAGE, str(exc))
    try:
        catalog = load_catalog(manifest, cfg.sample_rate_hz)
    except CatalogError as exc:
        _fail(EXIT_DATA, str(exc))

    out_dir = Path(out)
    records = []
    try:
        for spec in scenarios:
            job = GenerationJob(master_seed=seed, scenario=spec, count=count,
                                cfg=cfg, output_dir=out_dir)
            records.extend(generate_records(job, catalog, workers=workers))
            click.echo(f"generated {count} examples for {spec.tag}")
    except (ConfigError, CatalogError, AudioError) as exc:
        _fail(EXIT_DATA, str(exc))
    manifest_path = out_dir / "dataset.jsonl"
    write_dataset_manifest(manifest_path, seed, cfg, records)
    click.echo(f"dataset manifest: {manifest_path}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(),
              help="Dataset manifest produced by `generate`.")
@click.option("--estimates", required=True, type=click.Path(),
              help="Directory of estimates mirroring the dataset layout.")
@click.option("--report", "report_path", default=None, type=click.Path(),
              help="Write the JSONL report here (table always printed).")
@click.option("--workers", default=1, show_default=True, type=int)
def evaluate(manifest, estimates, report_path, workers):
    """Score estimates against a generated dataset (PIT SI-SDRi and
    Silence-SDRi plus loss breakdown)."""
    try:
        report = evaluate_set(manifest, estimates, LossWeights(), workers=workers)
    except CatalogError as exc:
        _fail(EXIT_DATA, str(exc))
    if report_path:
        Path(report_path).write_text(report.to_jsonl())
    click.echo(report.format_table())
    if report.n_errors:
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.option("--manifest", required=True, type=click.Path(),
              help="Dataset manifest produced by `generate`.")
@click.argument("example_id")
def describe(manifest, example_id):
    """Print the replay trace (assets, plans, splice maps, gains, seed) of
    one example, e.g. `describe --manifest d/dataset.jsonl D-All/ex000003`."""
    try:
        click.echo(describe_example(manifest, example_id))
    except (CatalogError, ConfigError) as exc:
        _fail(EXIT_DATA, str(exc))


@main.command("validate-manifest")
@click.argument("manifest", type=click.Path())
def validate_manifest(manifest):
    """Parse an asset manifest and load every referenced file."""
    try:
        assets = parse_manifest(manifest)
        catalog = load_catalog(manifest)
    except CatalogError as exc:
        _fail(EXIT_DATA, str(exc))
    counts = {k: 0 for k in ("speech", "static_noise", "event_noise", "rir")}
    for a in assets:
        counts[a.kind] += 1
    click.echo(f"{len(assets)} assets ok: "
               + ", ".join(f"{k}={v}" for k, v in counts.items())
               + f", speakers={len(catalog.speaker_ids())}")


if __name__ == "__main__":
    main()
