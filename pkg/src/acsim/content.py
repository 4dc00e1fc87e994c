"""Content selection, crosstalk simulation, and mixture assembly.

A mixture example is built as: select assets -> acoustically augment each
asset -> random-split speech into turn-taking segments -> optionally strip
event noise that overlaps speech -> mix at drawn levels. The two target
channels are the post-split per-speaker tracks (reverb and EQ included,
noise excluded); channel 2 is silence for single-speaker examples.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .acoustic import (
    EVENT_NOISE,
    SPEECH,
    STATIC_NOISE,
    AcousticPlan,
    apply_plan,
    draw_acoustic_plan,
)
from .audio import AudioClip, AudioError
from .catalog import Asset, AssetCatalog, CatalogError
from .config import ConfigError, ScenarioSpec, SimulationConfig
from .rng import RandomStream

# Event segments are maximal runs whose amplitude exceeds this (-80 dBFS).
EVENT_SILENCE_THRESHOLD = 1e-4


@dataclass(frozen=True)
class SpliceMap:
    """Where each copied segment of a random split came from and landed:
    (src_start, dst_start, length) triples, destination-ordered and
    non-overlapping."""

    segments: tuple[tuple[int, int, int], ...] = ()

    def to_list(self) -> list[list[int]]:
        return [list(s) for s in self.segments]

    @classmethod
    def from_list(cls, items: list) -> "SpliceMap":
        return cls(tuple(tuple(int(v) for v in s) for s in items))


@dataclass(frozen=True)
class ContentDraw:
    speaker1: Asset
    speaker2: Asset | None = None
    static: Asset | None = None
    event: Asset | None = None


def select_content(rng: RandomStream, catalog: AssetCatalog,
                   cfg: SimulationConfig) -> ContentDraw:
    """Draw the assets for one example. The first speaker is always
    present; the second speaker, static noise, and event noise are drawn
    independently with their configured probabilities."""
    if not catalog.speech:
        raise CatalogError("catalog has no speech assets")
    speaker1 = rng.choice(catalog.speech)

    speaker2 = None
    if rng.random() < cfg.p_speaker2:
        others = [a for a in catalog.speech if a.speaker != speaker1.speaker]
        if not others:
            raise CatalogError(
                "two-speaker draw requires at least 2 distinct speaker ids"
            )
        speaker2 = rng.choice(others)

    static = None
    if catalog.static_noise and rng.random() < cfg.p_static:
        static = rng.choice(catalog.static_noise)

    event = None
    if catalog.event_noise and rng.random() < cfg.p_event:
        event = rng.choice(catalog.event_noise)

    return ContentDraw(speaker1=speaker1, speaker2=speaker2,
                       static=static, event=event)


def random_split(rng: RandomStream, x: AudioClip,
                 cfg: SimulationConfig) -> tuple[AudioClip, SpliceMap]:
    """Splice random segments of x into a silent buffer of the same length,
    leaving gaps, to simulate turn-taking.

    Per iteration: draw a segment length k between l1*(T-i) and l2*(T-i)
    (bounds floored, draw inclusive), jump the write cursor j to a random
    position in [j, T], clamp k to the remaining output space, copy
    x[i:i+k] to y[j:j+k], and advance both cursors by k. Always runs at
    least once; continues with probability p_seg while either cursor has
    room.
    """
    T = len(x)
    y = np.zeros(T)
    segments: list[tuple[int, int, int]] = []
    i, j, p = 0, 0, 0.0
    while p <= cfg.p_seg and i <= T and j <= T:
        k = rng.randint(int(np.floor(cfg.l1 * (T - i))),
                        int(np.floor(cfg.l2 * (T - i))))
        j = rng.randint(j, T)
        k = min(k, T - j)
        n = min(k, T - i)  # == k whenever l2 <= 1
        if n > 0:
            y[j:j + n] = x.samples[i:i + n]
            segments.append((i, j, n))
        i += k
        j += k
        p = rng.random()
    return x.with_samples(y), SpliceMap(tuple(segments))


def speech_activity_mask(clip: AudioClip, threshold_db: float = -40.0,
                         hangover_ms: float = 50.0) -> np.ndarray:
    """Boolean per-sample activity: amplitude above threshold_db dBFS, with
    each active sample extending activity forward by hangover_ms."""
    active = np.abs(clip.samples) > 10.0 ** (threshold_db / 20.0)
    hang = int(round(hangover_ms * 1e-3 * clip.sample_rate_hz))
    if hang > 0 and active.any():
        active = np.convolve(active.astype(np.float64),
                             np.ones(hang + 1))[: len(clip)] > 0
    return active


def remove_event_overlap(event: AudioClip, speech_active: np.ndarray) -> AudioClip:
    """Zero event samples inside speech-active regions and drop, in full,
    every contiguous event segment that touches one."""
    if len(event) != len(speech_active):
        raise AudioError(
            f"length mismatch: event {len(event)} vs mask {len(speech_active)}"
        )
    out = event.samples.copy()
    loud = np.abs(out) > EVENT_SILENCE_THRESHOLD
    starts = list(np.flatnonzero(np.diff(np.concatenate([[0], loud.astype(np.int8)])) == 1))
    ends = list(np.flatnonzero(np.diff(np.concatenate([loud.astype(np.int8), [0]])) == -1) + 1)
    for s, e in zip(starts, ends):
        if speech_active[s:e].any():
            out[s:e] = 0.0
    out[speech_active] = 0.0
    return event.with_samples(out)


@dataclass(frozen=True)
class SpeakerRecord:
    asset_id: str
    speaker_id: str
    plan: AcousticPlan
    splice_map: SpliceMap
    level_db: float
    normalization_gain: float


@dataclass(frozen=True)
class NoiseRecord:
    asset_id: str
    plan: AcousticPlan
    snr_db: float
    linear_gain: float
    normalization_gain: float
    offset: int = 0
    overlap_removed: bool = False


@dataclass(frozen=True)
class ExampleMetadata:
    """Everything needed to replay or audit one example."""

    scenario: str
    seed: int
    speaker1: SpeakerRecord
    speaker2: SpeakerRecord | None
    static: NoiseRecord | None
    event: NoiseRecord | None
    clip_normalization_gain: float = 1.0
    index: int | None = None

    def to_dict(self) -> dict:
        def speaker_dict(r: SpeakerRecord | None):
            if r is None:
                return None
            return {
                "asset_id": r.asset_id, "speaker_id": r.speaker_id,
                "plan": r.plan.to_dict(), "splice_map": r.splice_map.to_list(),
                "level_db": r.level_db, "normalization_gain": r.normalization_gain,
            }

        def noise_dict(r: NoiseRecord | None):
            if r is None:
                return None
            return {
                "asset_id": r.asset_id, "plan": r.plan.to_dict(),
                "snr_db": r.snr_db, "linear_gain": r.linear_gain,
                "normalization_gain": r.normalization_gain,
                "offset": r.offset, "overlap_removed": r.overlap_removed,
            }

        return {
            "scenario": self.scenario, "seed": self.seed, "index": self.index,
            "speaker1": speaker_dict(self.speaker1),
            "speaker2": speaker_dict(self.speaker2),
            "static": noise_dict(self.static),
            "event": noise_dict(self.event),
            "clip_normalization_gain": self.clip_normalization_gain,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExampleMetadata":
        def speaker(rec):
            if rec is None:
                return None
            try:
                return SpeakerRecord(
                    asset_id=rec["asset_id"], speaker_id=rec["speaker_id"],
                    plan=AcousticPlan.from_dict(rec["plan"]),
                    splice_map=SpliceMap.from_list(rec["splice_map"]),
                    level_db=rec["level_db"],
                    normalization_gain=rec["normalization_gain"],
                )
            except KeyError as exc:
                raise ConfigError(f"metadata record missing field {exc}") from None

        def noise(rec):
            if rec is None:
                return None
            try:
                return NoiseRecord(
                    asset_id=rec["asset_id"],
                    plan=AcousticPlan.from_dict(rec["plan"]),
                    snr_db=rec["snr_db"], linear_gain=rec["linear_gain"],
                    normalization_gain=rec["normalization_gain"],
                    offset=rec["offset"], overlap_removed=rec["overlap_removed"],
                )
            except KeyError as exc:
                raise ConfigError(f"metadata record missing field {exc}") from None

        try:
            return cls(
                scenario=d["scenario"], seed=d["seed"], index=d.get("index"),
                speaker1=speaker(d["speaker1"]), speaker2=speaker(d["speaker2"]),
                static=noise(d["static"]), event=noise(d["event"]),
                clip_normalization_gain=d["clip_normalization_gain"],
            )
        except KeyError as exc:
            raise ConfigError(f"metadata record missing field {exc}") from None


@dataclass(frozen=True)
class MixtureExample:
    """mixture == (targets[0] + targets[1]) + static + event, summed in
    that association order, exactly (any clipping normalization scales the
    tracks first and re-sums)."""

    mixture: AudioClip
    targets: tuple[AudioClip, AudioClip]
    metadata: ExampleMetadata
    static_track: AudioClip | None = None
    event_track: AudioClip | None = None


def _scenario_config(cfg: SimulationConfig, scenario: ScenarioSpec,
                     catalog: AssetCatalog) -> SimulationConfig:
    overrides: dict = {
        "p_speaker2": 1.0 if scenario.speakers == 2 else 0.0,
        "p_event": cfg.p_event if scenario.event_allowed else 0.0,
        "p_static": cfg.p_static if scenario.static_allowed else 0.0,
        "p_reverb": cfg.p_reverb if scenario.reverb_allowed else 0.0,
    }
    out = dataclasses.replace(cfg, **overrides)
    if scenario.speakers == 2 and len(catalog.speaker_ids()) < 2:
        raise ConfigError(
            f"scenario {scenario.tag} needs 2 distinct speakers; "
            f"catalog has {len(catalog.speaker_ids())}"
        )
    if out.p_reverb > 0 and not catalog.rirs:
        raise ConfigError(
            f"scenario {scenario.tag} allows reverb but the catalog has no "
            "impulse responses"
        )
    return out


def _loop_to_length(samples: np.ndarray, n: int) -> np.ndarray:
    if samples.size == 0:
        return np.zeros(n)
    reps = int(np.ceil(n / samples.size))
    return np.tile(samples, reps)[:n]


def _prepare_speaker(rng: RandomStream, catalog: AssetCatalog, asset: Asset,
                     cfg: SimulationConfig) -> tuple[AudioClip, AcousticPlan,
                                                     SpliceMap, float]:
    plan = draw_acoustic_plan(rng, SPEECH, cfg, catalog.rir_ids)
    applied = apply_plan(catalog.clip(asset.id), plan, catalog.rir, cfg)
    fitted = applied.clip.fit_length(cfg.n_samples)
    split, smap = random_split(rng, fitted, cfg)
    return split, plan, smap, applied.normalization_gain


def _snr_gain(speech_energy: float, noise_energy: float, snr_db: float) -> float:
    """Linear gain on the noise track so speech/noise energy hits snr_db."""
    if noise_energy <= 0.0 or speech_energy <= 0.0:
        return 0.0
    return float(np.sqrt(speech_energy / (noise_energy * 10.0 ** (snr_db / 10.0))))


def assemble_example(rng: RandomStream, catalog: AssetCatalog,
                     cfg: SimulationConfig, scenario: ScenarioSpec,
                     seed: int = 0, index: int | None = None) -> MixtureExample:
    """Build one MixtureExample for a scenario. All randomness comes from
    rng, so identical (rng seed, catalog, cfg, scenario) reproduce the
    example bit-for-bit."""
    scfg = _scenario_config(cfg, scenario, catalog)
    T = scfg.n_samples
    sr = scfg.sample_rate_hz
    draw = select_content(rng, catalog, scfg)

    t1, plan1, smap1, norm1 = _prepare_speaker(rng, catalog, draw.speaker1, scfg)
    rec1 = SpeakerRecord(asset_id=draw.speaker1.id, speaker_id=draw.speaker1.speaker,
                         plan=plan1, splice_map=smap1, level_db=0.0,
                         normalization_gain=norm1)

    rec2 = None
    if draw.speaker2 is not None:
        t2_raw, plan2, smap2, norm2 = _prepare_speaker(rng, catalog, draw.speaker2, scfg)
        rel_db = rng.uniform(*scfg.speech_level_db_range)
        t2 = t2_raw.with_samples(t2_raw.samples * 10.0 ** (rel_db / 20.0))
        rec2 = SpeakerRecord(asset_id=draw.speaker2.id, speaker_id=draw.speaker2.speaker,
                             plan=plan2, splice_map=smap2, level_db=rel_db,
                             normalization_gain=norm2)
    else:
        t2 = AudioClip.silence(T, sr)

    speech_sum = t1.samples + t2.samples
    speech_energy = float(np.dot(speech_sum, speech_sum))

    static_track = None
    static_rec = None
    if draw.static is not None:
        plan = draw_acoustic_plan(rng, STATIC_NOISE, scfg, catalog.rir_ids)
        applied = apply_plan(catalog.clip(draw.static.id), plan, catalog.rir, scfg)
        looped = AudioClip(_loop_to_length(applied.clip.samples, T), sr)
        snr_db = rng.uniform(*scfg.static_snr_db_range)
        gain = _snr_gain(speech_energy, looped.energy(), snr_db)
        static_track = looped.with_samples(looped.samples * gain)
        static_rec = NoiseRecord(asset_id=draw.static.id, plan=plan, snr_db=snr_db,
                                 linear_gain=gain,
                                 normalization_gain=applied.normalization_gain)

    event_track = None
    event_rec = None
    if draw.event is not None:
        plan = draw_acoustic_plan(rng, EVENT_NOISE, scfg, catalog.rir_ids)
        applied = apply_plan(catalog.clip(draw.event.id), plan, catalog.rir, scfg)
        ev = applied.clip
        placed = np.zeros(T)
        if len(ev) >= T:
            offset = rng.randint(0, len(ev) - T)
            placed[:] = ev.samples[offset:offset + T]
        else:
            offset = rng.randint(0, T - len(ev))
            placed[offset:offset + len(ev)] = ev.samples
        ev_clip = AudioClip(placed, sr)
        removed = False
        if rng.random() < scfg.p_overlap_removal:
            mask = speech_activity_mask(
                AudioClip(speech_sum, sr),
                scfg.speech_activity_threshold_db,
                scfg.speech_activity_hangover_ms,
            )
            ev_clip = remove_event_overlap(ev_clip, mask)
            removed = True
        snr_db = rng.uniform(*scfg.event_snr_db_range)
        gain = _snr_gain(speech_energy, ev_clip.energy(), snr_db)
        event_track = ev_clip.with_samples(ev_clip.samples * gain)
        event_rec = NoiseRecord(asset_id=draw.event.id, plan=plan, snr_db=snr_db,
                                linear_gain=gain,
                                normalization_gain=applied.normalization_gain,
                                offset=offset, overlap_removed=removed)

    def total(a: AudioClip, b: AudioClip, s: AudioClip | None,
              e: AudioClip | None) -> np.ndarray:
        out = a.samples + b.samples
        if s is not None:
            out = out + s.samples
        if e is not None:
            out = out + e.samples
        return out

    mix = total(t1, t2, static_track, event_track)
    norm = 1.0
    peak = float(np.max(np.abs(mix))) if mix.size else 0.0
    if peak > 0.99:
        norm = 0.99 / peak
        t1 = t1.with_samples(t1.samples * norm)
        t2 = t2.with_samples(t2.samples * norm)
        if static_track is not None:
            static_track = static_track.with_samples(static_track.samples * norm)
        if event_track is not None:
            event_track = event_track.with_samples(event_track.samples * norm)
        mix = total(t1, t2, static_track, event_track)

    metadata = ExampleMetadata(scenario=scenario.tag, seed=seed, index=index,
                               speaker1=rec1, speaker2=rec2, static=static_rec,
                               event=event_rec, clip_normalization_gain=norm)
    return MixtureExample(mixture=AudioClip(mix, sr), targets=(t1, t2),
                          metadata=metadata, static_track=static_track,
                          event_track=event_track)
