"""Simulation configuration: every probability, range, and constant of the
pipeline, with defaults, plus JSON (de)serialization with a versioned
schema and fail-fast rejection of unknown fields.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dsp import ConfigError

CONFIG_SCHEMA_VERSION = 1

# Octave-spaced centers covering the 16 kHz band; one gain per band.
DEFAULT_EQ_CENTERS_HZ = (100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0)


@dataclass(frozen=True)
class SimulationConfig:
    # Example geometry
    duration_s: float = 5.0
    sample_rate_hz: int = 16000

    # Content selection probabilities. The first speaker is always present;
    # static noise defaults to always-on so every scenario has a noise bed.
    p_speaker2: float = 0.5
    p_static: float = 1.0
    p_event: float = 0.5

    # Random-split constants
    l1: float = 0.2
    l2: float = 1.0
    p_seg: float = 0.75

    # Crosstalk / event interaction
    p_overlap_removal: float = 0.5
    speech_activity_threshold_db: float = -40.0
    speech_activity_hangover_ms: float = 50.0

    # Mixing levels: speaker2 level relative to speaker1; noise SNRs
    # relative to total speech energy.
    speech_level_db_range: tuple[float, float] = (-5.0, 5.0)
    static_snr_db_range: tuple[float, float] = (5.0, 25.0)
    event_snr_db_range: tuple[float, float] = (0.0, 20.0)

    # Per-stage acoustic augmentation probabilities
    p_speed: float = 0.3
    p_volume: float = 0.5
    p_eq: float = 0.5
    p_reverb: float = 0.5

    # Acoustic augmentation ranges
    speed_range: tuple[float, float] = (0.9, 1.2)
    volume_gain_db_range: tuple[float, float] = (-10.0, 10.0)
    max_volume_anchors: int = 3
    eq_gain_db_range: tuple[float, float] = (-5.0, 5.0)
    eq_centers_hz: tuple[float, ...] = DEFAULT_EQ_CENTERS_HZ
    eq_q: float = 1.0
    drr_scale_range: tuple[float, float] = (0.5, 2.0)
    rt60_scale_range: tuple[float, float] = (0.5, 2.0)
    rir_direct_window_ms: float = 2.5

    def __post_init__(self):
        for name in ("p_speaker2", "p_static", "p_event", "p_seg",
                     "p_overlap_removal", "p_speed", "p_volume", "p_eq", "p_reverb"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.duration_s <= 0:
            raise ConfigError(f"duration_s must be positive, got {self.duration_s}")
        if self.sample_rate_hz <= 0:
            raise ConfigError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not 0 < self.l1 <= self.l2:
            raise ConfigError(f"need 0 < l1 <= l2, got l1={self.l1} l2={self.l2}")
        for name in ("speech_level_db_range", "static_snr_db_range",
                     "event_snr_db_range", "speed_range",
                     "volume_gain_db_range", "eq_gain_db_range",
                     "drr_scale_range", "rt60_scale_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name} is degenerate: ({lo}, {hi})")
        if self.max_volume_anchors < 0:
            raise ConfigError("max_volume_anchors must be >= 0")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    def to_dict(self) -> dict:
        d = {"schema": CONFIG_SCHEMA_VERSION}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        d = dict(d)
        schema = d.pop("schema", None)
        if schema != CONFIG_SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {schema!r}")
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs = {}
        for name, value in d.items():
            if isinstance(value, list):
                value = tuple(value)
            kwargs[name] = value
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "SimulationConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


@dataclass(frozen=True)
class ScenarioSpec:
    """One cell of the {D,S} x {All, NE, NR, N} evaluation grid.

    D = two speakers, S = one. All = static noise + events + reverb,
    NE = static + events (no reverb), NR = static + reverb (no events),
    N = static noise only. Static noise is allowed in every scenario.
    """

    tag: str
    speakers: int
    reverb_allowed: bool
    event_allowed: bool
    static_allowed: bool = True

    _SUFFIXES = {
        "All": (True, True),
        "NE": (False, True),
        "NR": (True, False),
        "N": (False, False),
    }

    @classmethod
    def from_tag(cls, tag: str) -> "ScenarioSpec":
        try:
            prefix, suffix = tag.split("-", 1)
            speakers = {"D": 2, "S": 1}[prefix]
            reverb, event = cls._SUFFIXES[suffix]
        except (ValueError, KeyError):
            raise ConfigError(
                f"unknown scenario {tag!r}; expected {{D,S}}-{{All,NE,NR,N}}"
            ) from None
        return cls(tag=tag, speakers=speakers, reverb_allowed=reverb, event_allowed=event)


ALL_SCENARIO_TAGS = tuple(
    f"{p}-{s}" for p in ("D", "S") for s in ("All", "NE", "NR", "N")
)
