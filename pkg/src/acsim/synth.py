"""Synthetic demo assets: speech-like tones, noise beds, event bursts, and
exponential-decay impulse responses, plus a ready-to-use asset manifest.

Real corpora are supplied by users through manifests; this module exists so
the pipeline can be exercised end to end without any external audio.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .audio import AudioClip
from .catalog import MANIFEST_SCHEMA_VERSION, write_wav


def synth_speech(rng: np.random.Generator, duration_s: float = 6.0,
                 sample_rate_hz: int = 16000, f0_hz: float = 140.0) -> AudioClip:
    """Harmonic tone with vibrato and syllabic amplitude modulation."""
    n = int(duration_s * sample_rate_hz)
    t = np.arange(n) / sample_rate_hz
    vibrato = 1.0 + 0.02 * np.sin(2 * np.pi * 5.0 * t + rng.uniform(0, 2 * np.pi))
    phase = 2 * np.pi * f0_hz * np.cumsum(vibrato) / sample_rate_hz
    x = np.zeros(n)
    for harmonic, level in ((1, 1.0), (2, 0.5), (3, 0.3), (4, 0.15)):
        x += level * np.sin(harmonic * phase + rng.uniform(0, 2 * np.pi))
    syllable = 0.5 * (1 + np.sin(2 * np.pi * rng.uniform(2.0, 4.0) * t
                                 + rng.uniform(0, 2 * np.pi)))
    x = x * syllable ** 2 + 0.01 * rng.standard_normal(n)
    x *= 0.3 / np.max(np.abs(x))
    return AudioClip(x, sample_rate_hz)


def synth_static_noise(rng: np.random.Generator, duration_s: float = 6.0,
                       sample_rate_hz: int = 16000) -> AudioClip:
    """Low-pass filtered white noise bed."""
    n = int(duration_s * sample_rate_hz)
    from scipy.signal import lfilter

    white = rng.standard_normal(n)
    # One-pole lowpass for a pink-ish spectrum.
    a = 0.98
    out = lfilter([1 - a], [1, -a], white)
    out *= 0.2 / np.max(np.abs(out))
    return AudioClip(out, sample_rate_hz)


def synth_event(rng: np.random.Generator, duration_s: float = 1.5,
                sample_rate_hz: int = 16000, n_bursts: int = 2) -> AudioClip:
    """A few short decaying noise bursts separated by silence."""
    n = int(duration_s * sample_rate_hz)
    x = np.zeros(n)
    burst_len = int(0.12 * sample_rate_hz)
    for _ in range(n_bursts):
        start = int(rng.integers(0, max(n - burst_len, 1)))
        env = np.exp(-np.arange(burst_len) / (0.03 * sample_rate_hz))
        tone = np.sin(2 * np.pi * rng.uniform(600, 2400)
                      * np.arange(burst_len) / sample_rate_hz)
        x[start:start + burst_len] += env * (0.6 * tone
                                             + 0.4 * rng.standard_normal(burst_len))
    peak = np.max(np.abs(x))
    if peak > 0:
        x *= 0.4 / peak
    return AudioClip(x, sample_rate_hz)


def synth_rir(rng: np.random.Generator, t60_s: float = 0.4,
              duration_s: float = 0.6, sample_rate_hz: int = 16000,
              direct_delay_s: float = 0.005) -> AudioClip:
    """Unit direct-path impulse followed by an exponentially decaying noise
    tail with the given reverberation time."""
    n = int(duration_s * sample_rate_hz)
    d = int(direct_delay_s * sample_rate_hz)
    h = np.zeros(n)
    h[d] = 1.0
    tail_start = d + 1
    t = np.arange(n - tail_start) / sample_rate_hz
    h[tail_start:] = (0.25 * rng.standard_normal(n - tail_start)
                      * 10.0 ** (-3.0 * t / t60_s))
    return AudioClip(h, sample_rate_hz)


def build_demo_corpus(out_dir: str | Path, seed: int = 0,
                      n_speakers: int = 4, clips_per_speaker: int = 2,
                      n_static: int = 3, n_event: int = 3, n_rir: int = 3,
                      sample_rate_hz: int = 16000) -> Path:
    """Write a small synthetic corpus and its manifest; returns the
    manifest path."""
    out_dir = Path(out_dir)
    rng = np.random.default_rng(seed)
    entries = []

    def add(kind: str, asset_id: str, clip: AudioClip, **extra):
        rel = f"{kind}/{asset_id}.wav"
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(path, clip)
        entries.append({"schema": MANIFEST_SCHEMA_VERSION, "kind": kind,
                        "id": asset_id, "path": rel, **extra})

    for s in range(n_speakers):
        f0 = 110.0 * 2.0 ** (s / max(n_speakers - 1, 1))
        for c in range(clips_per_speaker):
            add("speech", f"spk{s}_{c}",
                synth_speech(rng, sample_rate_hz=sample_rate_hz, f0_hz=f0),
                speaker=f"spk{s}")
    for i in range(n_static):
        add("static_noise", f"static{i}",
            synth_static_noise(rng, sample_rate_hz=sample_rate_hz))
    for i in range(n_event):
        add("event_noise", f"event{i}",
            synth_event(rng, sample_rate_hz=sample_rate_hz), label="burst")
    for i in range(n_rir):
        add("rir", f"rir{i}",
            synth_rir(rng, t60_s=0.25 + 0.15 * i, sample_rate_hz=sample_rate_hz))

    manifest = out_dir / "assets.jsonl"
    manifest.write_text("".join(json.dumps(e) + "\n" for e in entries))
    return manifest
