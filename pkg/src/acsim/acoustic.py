"""Randomized per-asset acoustic augmentation: speed change, dynamic volume,
seven-band EQ, and reverberation with DRR / RT60 scaling of the impulse
response.

A drawn AcousticPlan is a plain serializable value; applying the same plan
to the same clip is deterministic, so plans recorded in example metadata
allow exact replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .audio import AudioClip
from .config import SimulationConfig
from .dsp import apply_gain_envelope, fft_convolve, peaking_eq, resample
from .rng import RandomStream

SPEECH = "speech"
STATIC_NOISE = "static_noise"
EVENT_NOISE = "event_noise"

# Peak ceiling for conditional normalization after augmentation.
PEAK_LIMIT = 0.99


class AcousticError(ValueError):
    """Invalid impulse response or augmentation parameters."""


@dataclass(frozen=True)
class RoomImpulseResponse:
    clip: AudioClip
    direct_index: int

    def __post_init__(self):
        if len(self.clip) == 0:
            raise AcousticError("empty impulse response")
        if not 0 <= self.direct_index < len(self.clip):
            raise AcousticError(
                f"direct_index {self.direct_index} outside [0, {len(self.clip)})"
            )

    @classmethod
    def from_clip(cls, clip: AudioClip) -> "RoomImpulseResponse":
        if len(clip) == 0 or clip.peak() == 0.0:
            raise AcousticError("impulse response is silent")
        return cls(clip=clip, direct_index=int(np.argmax(np.abs(clip.samples))))


@dataclass(frozen=True)
class RirAugmentParams:
    drr_scale: float = 1.0
    rt60_scale: float = 1.0

    def __post_init__(self):
        for name in ("drr_scale", "rt60_scale"):
            v = getattr(self, name)
            if not 0.5 <= v <= 2.0:
                raise AcousticError(f"{name} must be in [0.5, 2.0], got {v}")


@dataclass(frozen=True)
class AcousticPlan:
    """Augmentation recipe for one asset. Absent stages are skipped.

    Volume anchor times are stored as fractions of the clip duration so a
    plan is valid regardless of the post-speed-change length.
    """

    speed_ratio: float | None = None
    volume_anchors: tuple[tuple[float, float], ...] | None = None
    pre_reverb_eq: tuple[float, ...] | None = None
    reverb: tuple[str, RirAugmentParams] | None = None
    post_eq: tuple[float, ...] | None = None

    def is_identity(self) -> bool:
        return all(
            v is None
            for v in (self.speed_ratio, self.volume_anchors, self.pre_reverb_eq,
                      self.reverb, self.post_eq)
        )

    def to_dict(self) -> dict:
        d: dict = {}
        if self.speed_ratio is not None:
            d["speed_ratio"] = self.speed_ratio
        if self.volume_anchors is not None:
            d["volume_anchors"] = [list(a) for a in self.volume_anchors]
        if self.pre_reverb_eq is not None:
            d["pre_reverb_eq"] = list(self.pre_reverb_eq)
        if self.reverb is not None:
            rir_id, params = self.reverb
            d["reverb"] = {
                "rir_id": rir_id,
                "drr_scale": params.drr_scale,
                "rt60_scale": params.rt60_scale,
            }
        if self.post_eq is not None:
            d["post_eq"] = list(self.post_eq)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AcousticPlan":
        reverb = None
        if "reverb" in d:
            r = d["reverb"]
            reverb = (r["rir_id"], RirAugmentParams(r["drr_scale"], r["rt60_scale"]))
        return cls(
            speed_ratio=d.get("speed_ratio"),
            volume_anchors=(
                tuple(tuple(a) for a in d["volume_anchors"])
                if "volume_anchors" in d else None
            ),
            pre_reverb_eq=tuple(d["pre_reverb_eq"]) if "pre_reverb_eq" in d else None,
            reverb=reverb,
            post_eq=tuple(d["post_eq"]) if "post_eq" in d else None,
        )


def _direct_split(rir: RoomImpulseResponse, window_ms: float) -> tuple[int, int]:
    """(tail_start, window_start) indices for the +-window_ms direct segment."""
    half = int(round(window_ms * 1e-3 * rir.clip.sample_rate_hz))
    start = max(rir.direct_index - half, 0)
    tail_start = rir.direct_index + half + 1
    if tail_start >= len(rir.clip):
        raise AcousticError(
            f"impulse response too short: no tail beyond the "
            f"+-{window_ms} ms direct window"
        )
    return tail_start, start


def measure_drr(rir: RoomImpulseResponse, window_ms: float = 2.5) -> float:
    """Direct-to-reverberant energy ratio with a +-window_ms direct segment."""
    tail_start, start = _direct_split(rir, window_ms)
    s = rir.clip.samples
    e_direct = float(np.dot(s[start:tail_start], s[start:tail_start]))
    e_tail = float(np.dot(s[tail_start:], s[tail_start:]))
    if e_tail == 0.0:
        raise AcousticError("impulse response has a silent tail; DRR undefined")
    return e_direct / e_tail


def measure_rt60(
    samples: np.ndarray,
    sample_rate_hz: int,
    fit_range_db: tuple[float, float] = (-5.0, -35.0),
) -> float:
    """RT60 via Schroeder backward integration and a linear fit of the
    energy-decay curve over fit_range_db, extrapolated to -60 dB."""
    energy = np.asarray(samples, dtype=np.float64) ** 2
    total = energy.sum()
    if total <= 0.0:
        raise AcousticError("silent signal; RT60 undefined")
    edc = np.cumsum(energy[::-1])[::-1] / total
    db = 10.0 * np.log10(np.maximum(edc, 1e-30))
    hi, lo = fit_range_db
    fit = np.flatnonzero((db <= hi) & (db >= lo))
    if fit.size < 2:
        raise AcousticError(
            f"decay curve never spans [{hi}, {lo}] dB; cannot fit RT60"
        )
    t = fit / sample_rate_hz
    slope, _ = np.polyfit(t, db[fit], 1)
    if slope >= 0:
        raise AcousticError("non-decaying energy curve; cannot fit RT60")
    return -60.0 / slope


def augment_rir(
    rir: RoomImpulseResponse,
    params: RirAugmentParams,
    window_ms: float = 2.5,
) -> RoomImpulseResponse:
    """Scale the DRR and RT60 of an impulse response.

    Only the tail (everything after the direct window) is modified:
    an exponential time-varying gain re-weights its decay so the Schroeder
    RT60 scales by rt60_scale, then a constant tail gain sets the DRR to
    exactly drr_scale times the input's DRR. Direct-path samples are
    passed through untouched.
    """
    if params.drr_scale == 1.0 and params.rt60_scale == 1.0:
        return rir
    tail_start, start = _direct_split(rir, window_ms)
    s = rir.clip.samples.copy()
    sr = rir.clip.sample_rate_hz
    e_direct = float(np.dot(s[start:tail_start], s[start:tail_start]))
    tail = s[tail_start:]
    e_tail_in = float(np.dot(tail, tail))
    if e_tail_in == 0.0 or e_direct == 0.0:
        raise AcousticError("degenerate impulse response: silent direct or tail")

    if params.rt60_scale != 1.0:
        t60 = measure_rt60(tail, sr)
        # Amplitude envelope e^{-3 ln10 * t / T60} has a -60 dB/T60 energy
        # slope; this alpha rescales that slope by 1/rt60_scale.
        alpha = 3.0 * math.log(10.0) * (1.0 - 1.0 / params.rt60_scale) / t60
        t = np.arange(tail.size) / sr
        tail = tail * np.exp(alpha * t)

    drr_target = params.drr_scale * (e_direct / e_tail_in)
    e_tail_now = float(np.dot(tail, tail))
    gain = math.sqrt(e_direct / (drr_target * e_tail_now))
    s[tail_start:] = gain * tail
    return RoomImpulseResponse(clip=rir.clip.with_samples(s),
                               direct_index=rir.direct_index)


def draw_acoustic_plan(
    rng: RandomStream,
    kind: str,
    cfg: SimulationConfig,
    rir_ids: Sequence[str] = (),
) -> AcousticPlan:
    """Draw one augmentation plan. Speed, dynamic volume, and reverb apply
    to speech only; EQ is eligible for every asset kind. Each stage is
    included independently with its configured probability; speech drawn
    with reverb additionally gets an independent pre-reverb EQ draw."""
    speed = None
    volume = None
    pre_eq = None
    reverb = None

    if kind == SPEECH:
        if rng.random() < cfg.p_speed:
            speed = rng.uniform(*cfg.speed_range)
        if rng.random() < cfg.p_volume:
            n = rng.randint(0, cfg.max_volume_anchors)
            anchors = sorted(rng.random() for _ in range(n))
            volume = tuple(
                (t, rng.uniform(*cfg.volume_gain_db_range)) for t in anchors
            ) or None
        if rng.random() < cfg.p_reverb:
            if not rir_ids:
                raise AcousticError("reverb drawn but no impulse responses available")
            rir_id = rng.choice(list(rir_ids))
            reverb = (rir_id, RirAugmentParams(
                drr_scale=rng.uniform(*cfg.drr_scale_range),
                rt60_scale=rng.uniform(*cfg.rt60_scale_range),
            ))
            if rng.random() < cfg.p_eq:
                pre_eq = tuple(
                    rng.uniform(*cfg.eq_gain_db_range) for _ in cfg.eq_centers_hz
                )

    post_eq = None
    if rng.random() < cfg.p_eq:
        post_eq = tuple(rng.uniform(*cfg.eq_gain_db_range) for _ in cfg.eq_centers_hz)

    return AcousticPlan(speed_ratio=speed, volume_anchors=volume,
                        pre_reverb_eq=pre_eq, reverb=reverb, post_eq=post_eq)


@dataclass(frozen=True)
class AppliedAugmentation:
    clip: AudioClip
    # Gain applied to keep the peak under PEAK_LIMIT; 1.0 when no clipping
    # would have occurred.
    normalization_gain: float = 1.0


def apply_plan(
    clip: AudioClip,
    plan: AcousticPlan,
    rir_lookup: Callable[[str], RoomImpulseResponse] | None = None,
    cfg: SimulationConfig | None = None,
) -> AppliedAugmentation:
    """Apply plan stages in fixed order: speed -> dynamic volume ->
    pre-reverb EQ -> reverberation -> post EQ, then peak-normalize only if
    the result would clip."""
    cfg = cfg or SimulationConfig()
    out = clip

    if plan.speed_ratio is not None:
        out = resample(out, plan.speed_ratio)
    if plan.volume_anchors:
        anchors = [(frac * out.duration_s, g) for frac, g in plan.volume_anchors]
        out = apply_gain_envelope(out, anchors)
    if plan.pre_reverb_eq is not None:
        out = _eq(out, plan.pre_reverb_eq, cfg)
    if plan.reverb is not None:
        if rir_lookup is None:
            raise AcousticError("plan includes reverb but no RIR lookup was given")
        rir_id, params = plan.reverb
        rir = augment_rir(rir_lookup(rir_id), params, cfg.rir_direct_window_ms)
        out = fft_convolve(out, rir.clip)
    if plan.post_eq is not None:
        out = _eq(out, plan.post_eq, cfg)

    gain = 1.0
    peak = out.peak()
    if peak > PEAK_LIMIT:
        gain = PEAK_LIMIT / peak
        out = out.with_samples(out.samples * gain)
    return AppliedAugmentation(clip=out, normalization_gain=gain)


def _eq(clip: AudioClip, gains_db: Sequence[float], cfg: SimulationConfig) -> AudioClip:
    if len(gains_db) != len(cfg.eq_centers_hz):
        raise AcousticError(
            f"expected {len(cfg.eq_centers_hz)} EQ gains, got {len(gains_db)}"
        )
    bands = [(f, g, cfg.eq_q) for f, g in zip(cfg.eq_centers_hz, gains_db)]
    return peaking_eq(clip, bands)
