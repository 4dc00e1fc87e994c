"""Batch dataset generation and evaluation.

Output layout for a generated set:

    out_dir/
      dataset.jsonl            one header record + one record per example
      D-All/ex000000.mixture.wav
      D-All/ex000000.target1.wav
      D-All/ex000000.target2.wav
      ...

Estimates for evaluation mirror the layout under their own root, either as
a stereo `exNNNNNN.est.wav` or a `exNNNNNN.est1.wav` / `.est2.wav` pair.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import AudioClip
from .catalog import AssetCatalog, CatalogError, read_wav_channels, write_wav
from .config import ConfigError, ScenarioSpec, SimulationConfig
from .content import ExampleMetadata, MixtureExample, assemble_example
from .objectives import (
    LossWeights,
    combined_loss,
    pit_resolve,
    si_sdr,
    silence_sdr,
)
from .rng import NumpyStream, example_seed

DATASET_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class GenerationJob:
    master_seed: int
    scenario: ScenarioSpec
    count: int
    cfg: SimulationConfig
    output_dir: Path

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"count must be >= 1, got {self.count}")


def _example_id(tag: str, index: int) -> str:
    return f"{tag}/ex{index:06d}"


def build_example(catalog: AssetCatalog, cfg: SimulationConfig,
                  scenario: ScenarioSpec, master_seed: int,
                  index: int) -> MixtureExample:
    seed = example_seed(master_seed, scenario.tag, index)
    return assemble_example(NumpyStream(seed), catalog, cfg, scenario,
                            seed=seed, index=index)


def generate_records(job: GenerationJob, catalog: AssetCatalog,
                     workers: int = 1) -> list[dict]:
    """Generate and write every example of one job; returns manifest
    records ordered by example index."""
    scenario_dir = job.output_dir / job.scenario.tag
    scenario_dir.mkdir(parents=True, exist_ok=True)

    def build(index: int) -> MixtureExample:
        return build_example(catalog, job.cfg, job.scenario, job.master_seed, index)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            examples = list(pool.map(build, range(job.count)))
    else:
        examples = [build(i) for i in range(job.count)]

    records = []
    for index, ex in enumerate(examples):
        stem = f"ex{index:06d}"
        files = {
            "mixture": f"{job.scenario.tag}/{stem}.mixture.wav",
            "target1": f"{job.scenario.tag}/{stem}.target1.wav",
            "target2": f"{job.scenario.tag}/{stem}.target2.wav",
        }
        write_wav(job.output_dir / files["mixture"], ex.mixture)
        write_wav(job.output_dir / files["target1"], ex.targets[0])
        write_wav(job.output_dir / files["target2"], ex.targets[1])
        records.append({
            "record": "example",
            "example_id": _example_id(job.scenario.tag, index),
            "scenario": job.scenario.tag,
            "index": index,
            "seed": ex.metadata.seed,
            "files": files,
            "metadata": ex.metadata.to_dict(),
        })
    return records


def write_dataset_manifest(path: Path, master_seed: int, cfg: SimulationConfig,
                           records: list[dict]) -> None:
    header = {
        "record": "header",
        "schema": DATASET_SCHEMA_VERSION,
        "master_seed": master_seed,
        "config": cfg.to_dict(),
    }
    with open(path, "w") as fh:
        for rec in [header, *records]:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def generate_set(job: GenerationJob, catalog: AssetCatalog,
                 workers: int = 1) -> Path:
    """Run one job and write its dataset manifest. Deterministic: the same
    job and catalog produce byte-identical output."""
    records = generate_records(job, catalog, workers=workers)
    manifest = job.output_dir / "dataset.jsonl"
    write_dataset_manifest(manifest, job.master_seed, job.cfg, records)
    return manifest


def read_dataset_manifest(path: str | Path) -> tuple[dict, list[dict]]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except FileNotFoundError:
        raise CatalogError(f"dataset manifest not found: {path}") from None
    header = None
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"{path}:{lineno}: invalid JSON: {exc}") from None
        if rec.get("record") == "header":
            if rec.get("schema") != DATASET_SCHEMA_VERSION:
                raise CatalogError(f"{path}:{lineno}: unsupported schema")
            header = rec
        elif rec.get("record") == "example":
            records.append(rec)
        else:
            raise CatalogError(f"{path}:{lineno}: unknown record type {rec.get('record')!r}")
    if header is None:
        raise CatalogError(f"{path}: missing header record")
    return header, records


def replay_example(record: dict, catalog: AssetCatalog,
                   cfg: SimulationConfig) -> MixtureExample:
    """Regenerate an example from its recorded per-example seed."""
    scenario = ScenarioSpec.from_tag(record["scenario"])
    return assemble_example(NumpyStream(record["seed"]), catalog, cfg, scenario,
                            seed=record["seed"], index=record["index"])


def describe_example(manifest_path: str | Path, example_id: str) -> str:
    """Human-readable replay trace of one generated example."""
    _, records = read_dataset_manifest(manifest_path)
    by_id = {r["example_id"]: r for r in records}
    if example_id not in by_id:
        raise CatalogError(f"unknown example id {example_id!r}")
    rec = by_id[example_id]
    meta = ExampleMetadata.from_dict(rec["metadata"])
    lines = [
        f"example:  {rec['example_id']}",
        f"scenario: {meta.scenario}",
        f"seed:     {meta.seed}",
        f"clip normalization gain: {meta.clip_normalization_gain}",
    ]
    for name, sp in (("speaker1", meta.speaker1), ("speaker2", meta.speaker2)):
        if sp is None:
            lines.append(f"{name}: (none; silent channel)")
            continue
        lines.append(f"{name}: asset={sp.asset_id} speaker={sp.speaker_id} "
                     f"level={sp.level_db:+.2f} dB norm={sp.normalization_gain:.6g}")
        lines.append(f"  plan: {json.dumps(sp.plan.to_dict(), sort_keys=True)}")
        lines.append(f"  splice map (src, dst, len): {sp.splice_map.to_list()}")
    for name, nz in (("static", meta.static), ("event", meta.event)):
        if nz is None:
            lines.append(f"{name}: (none)")
            continue
        lines.append(f"{name}: asset={nz.asset_id} snr={nz.snr_db:.2f} dB "
                     f"gain={nz.linear_gain:.6g} offset={nz.offset} "
                     f"overlap_removed={nz.overlap_removed}")
        lines.append(f"  plan: {json.dumps(nz.plan.to_dict(), sort_keys=True)}")
    return "\n".join(lines)


@dataclass
class EvalRow:
    example_id: str
    scenario: str
    permutation: tuple[int, ...] | None = None
    si_sdri: float | None = None
    silence_sdri: float | None = None
    loss: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "example_id": self.example_id, "scenario": self.scenario,
            "permutation": list(self.permutation) if self.permutation else None,
            "si_sdri": self.si_sdri, "silence_sdri": self.silence_sdri,
            "loss": self.loss, "error": self.error,
        }


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    scenario_means: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def n_errors(self) -> int:
        return sum(1 for r in self.rows if r.error is not None)

    def compute_means(self) -> None:
        by_scenario: dict[str, list[EvalRow]] = {}
        for row in self.rows:
            if row.error is None:
                by_scenario.setdefault(row.scenario, []).append(row)
        self.scenario_means = {}
        for tag, rows in sorted(by_scenario.items()):
            means: dict[str, float] = {"count": float(len(rows))}
            for key in ("si_sdri", "silence_sdri"):
                vals = [getattr(r, key) for r in rows if getattr(r, key) is not None]
                if vals:
                    means[key] = float(np.mean(vals))
            loss_vals = [r.loss["total"] for r in rows if r.loss is not None]
            if loss_vals:
                means["loss_total"] = float(np.mean(loss_vals))
            self.scenario_means[tag] = means

    def to_jsonl(self) -> str:
        lines = [json.dumps({"record": "row", **r.to_dict()}, sort_keys=True)
                 for r in self.rows]
        for tag, means in self.scenario_means.items():
            lines.append(json.dumps(
                {"record": "scenario_mean", "scenario": tag, **means},
                sort_keys=True))
        return "\n".join(lines) + "\n"

    def format_table(self) -> str:
        header = f"{'scenario':<8} {'n':>4} {'SI-SDRi':>9} {'Silence-SDRi':>13} {'loss':>12}"
        out = [header, "-" * len(header)]
        for tag, m in self.scenario_means.items():
            si = f"{m['si_sdri']:9.2f}" if "si_sdri" in m else " " * 9
            sil = f"{m['silence_sdri']:13.2f}" if "silence_sdri" in m else " " * 13
            loss = f"{m['loss_total']:12.2f}" if "loss_total" in m else " " * 12
            out.append(f"{tag:<8} {int(m['count']):>4} {si} {sil} {loss}")
        if self.n_errors:
            out.append(f"errors: {self.n_errors} example(s) failed")
        return "\n".join(out)


def _load_estimates(estimates_dir: Path, record: dict,
                    expected_len: int, sample_rate_hz: int) -> list[AudioClip]:
    stem = f"ex{record['index']:06d}"
    base = estimates_dir / record["scenario"]
    stereo = base / f"{stem}.est.wav"
    pair = [base / f"{stem}.est1.wav", base / f"{stem}.est2.wav"]
    if stereo.exists():
        channels = read_wav_channels(stereo)
        if len(channels) != 2:
            raise CatalogError(f"{stereo}: expected 2 channels, got {len(channels)}")
    elif pair[0].exists() and pair[1].exists():
        channels = [read_wav_channels(p)[0] for p in pair]
    else:
        raise CatalogError(
            f"no estimate for {record['example_id']}: expected {stereo} or "
            f"{pair[0].name}/{pair[1].name} under {base}"
        )
    for ch in channels:
        if len(ch) != expected_len:
            raise CatalogError(
                f"{record['example_id']}: estimate length {len(ch)} != "
                f"reference length {expected_len}"
            )
        if ch.sample_rate_hz != sample_rate_hz:
            raise CatalogError(
                f"{record['example_id']}: estimate rate {ch.sample_rate_hz} != "
                f"{sample_rate_hz}"
            )
    return channels


def _score_example(record: dict, dataset_dir: Path, estimates_dir: Path,
                   weights: LossWeights) -> EvalRow:
    mixture = read_wav_channels(dataset_dir / record["files"]["mixture"])[0]
    refs = [read_wav_channels(dataset_dir / record["files"][k])[0]
            for k in ("target1", "target2")]
    ests = _load_estimates(estimates_dir, record, len(mixture),
                           mixture.sample_rate_hz)
    row = EvalRow(example_id=record["example_id"], scenario=record["scenario"])

    loss_pit = pit_resolve(refs, ests, lambda r, e: combined_loss(r, e, weights),
                           objective="minimize")
    row.loss = {
        "total": loss_pit.aggregate,
        "per_channel": [b.to_dict() for b in loss_pit.per_channel],
    }

    if record["scenario"].startswith("D"):
        metric = pit_resolve(refs, ests, si_sdr, objective="maximize")
        baseline = [si_sdr(r, mixture) for r in refs]
        row.permutation = metric.permutation
        row.si_sdri = float(np.mean(
            [metric.per_channel[c] - baseline[c] for c in range(2)]))
    else:
        speaker_ref = refs[0]
        scores = [si_sdr(speaker_ref, e) for e in ests]
        best = int(np.argmax(scores))
        other = 1 - best
        row.permutation = (best, other)
        row.si_sdri = scores[best] - si_sdr(speaker_ref, mixture)
        row.silence_sdri = (silence_sdr(speaker_ref, ests[other])
                            - silence_sdr(speaker_ref, mixture))
    return row


def evaluate_set(manifest_path: str | Path, estimates_dir: str | Path,
                 weights: LossWeights = LossWeights(),
                 workers: int = 1) -> EvalReport:
    """Score every example in a dataset manifest against estimates.

    Per-example failures (missing or malformed estimates) become error
    rows; the run continues. Rows are ordered as in the manifest.
    """
    manifest_path = Path(manifest_path)
    _, records = read_dataset_manifest(manifest_path)
    dataset_dir = manifest_path.parent
    estimates_dir = Path(estimates_dir)

    def score(record: dict) -> EvalRow:
        try:
            return _score_example(record, dataset_dir, estimates_dir, weights)
        except (CatalogError, ValueError) as exc:
            return EvalRow(example_id=record["example_id"],
                           scenario=record["scenario"], error=str(exc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(score, records))
    else:
        rows = [score(r) for r in records]

    report = EvalReport(rows=rows)
    report.compute_means()
    return report
