"""Mono audio buffer type shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class AudioError(ValueError):
    """Invalid audio data or incompatible clips."""


@dataclass(frozen=True)
class AudioClip:
    """Immutable mono signal: float64 samples plus a sample rate.

    Zero-length clips are valid and behave as silence. Samples must be
    finite; nominal range is [-1, 1] but intermediate processing may
    exceed it.
    """

    samples: np.ndarray = field(repr=False)
    sample_rate_hz: int = 16000

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise AudioError(f"expected mono 1-D samples, got shape {arr.shape}")
        if arr.size and not np.all(np.isfinite(arr)):
            raise AudioError("samples contain NaN or Inf")
        if self.sample_rate_hz <= 0:
            raise AudioError(f"sample rate must be positive, got {self.sample_rate_hz}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def energy(self) -> float:
        return float(np.dot(self.samples, self.samples))

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples))) if len(self) else 0.0

    def with_samples(self, samples: np.ndarray) -> "AudioClip":
        return AudioClip(samples, self.sample_rate_hz)

    @classmethod
    def silence(cls, n_samples: int, sample_rate_hz: int = 16000) -> "AudioClip":
        return cls(np.zeros(n_samples), sample_rate_hz)

    def fit_length(self, n_samples: int) -> "AudioClip":
        """Zero-pad or truncate at the end to exactly n_samples."""
        if len(self) == n_samples:
            return self
        if len(self) > n_samples:
            return self.with_samples(self.samples[:n_samples])
        out = np.zeros(n_samples)
        out[: len(self)] = self.samples
        return self.with_samples(out)


def require_same_rate(a: AudioClip, b: AudioClip) -> None:
    if a.sample_rate_hz != b.sample_rate_hz:
        raise AudioError(
            f"sample rate mismatch: {a.sample_rate_hz} vs {b.sample_rate_hz}"
        )


def require_same_length(a: AudioClip, b: AudioClip) -> None:
    if len(a) != len(b):
        raise AudioError(f"length mismatch: {len(a)} vs {len(b)}")
