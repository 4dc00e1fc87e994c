"""Deterministic signal-processing primitives: STFT, mel, convolution,
windowed-sinc resampling, dB gain envelopes, and peaking EQ.

Everything here is a pure function of its inputs; repeated calls with the
same arguments are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .audio import AudioClip, AudioError, require_same_rate

# Floor applied before any log of a magnitude/power value, so silence does
# not produce -inf.
LOG_FLOOR = 1e-5


class ConfigError(ValueError):
    """Invalid analysis or simulation configuration."""


def _window(name: str, n: int) -> np.ndarray:
    if name in ("rect", "rectangular", "boxcar"):
        return np.ones(n)
    if name == "hann":
        return sps.get_window("hann", n, fftbins=True)
    raise ConfigError(f"unknown window {name!r}")


@dataclass(frozen=True)
class StftConfig:
    fft_length: int
    hop_length: int
    window: str = "hann"

    def __post_init__(self):
        if self.fft_length < 2 or (self.fft_length & (self.fft_length - 1)) != 0:
            raise ConfigError(f"fft_length must be a power of two, got {self.fft_length}")
        if not 0 < self.hop_length <= self.fft_length:
            raise ConfigError(
                f"hop_length must be in (0, fft_length], got {self.hop_length}"
            )
        _window(self.window, self.fft_length)

    @classmethod
    def default(cls, fft_length: int) -> "StftConfig":
        return cls(fft_length=fft_length, hop_length=fft_length // 4)


@dataclass(frozen=True)
class MelConfig:
    fft_length: int = 1024
    hop_length: int = 256
    n_mels: int = 128
    fmin_hz: float = 0.0
    fmax_hz: float = 8000.0
    window: str = "hann"

    def __post_init__(self):
        if self.fft_length < 2 or (self.fft_length & (self.fft_length - 1)) != 0:
            raise ConfigError(f"fft_length must be a power of two, got {self.fft_length}")
        if not 0 < self.hop_length <= self.fft_length:
            raise ConfigError(f"hop_length must be in (0, fft_length], got {self.hop_length}")
        if self.n_mels < 1:
            raise ConfigError(f"n_mels must be >= 1, got {self.n_mels}")
        if not 0 <= self.fmin_hz < self.fmax_hz:
            raise ConfigError(
                f"need 0 <= fmin < fmax, got fmin={self.fmin_hz} fmax={self.fmax_hz}"
            )


def _frame_centered(x: np.ndarray, fft_length: int, hop_length: int) -> np.ndarray:
    """Center-padded framing: frame t is centered at t * hop. A clip of any
    length (including zero) yields at least one frame."""
    n_frames = 1 + len(x) // hop_length
    half = fft_length // 2
    padded = np.concatenate([np.zeros(half), x, np.zeros(half + fft_length)])
    idx = np.arange(fft_length)[None, :] + hop_length * np.arange(n_frames)[:, None]
    return padded[idx]


def stft_magnitude(clip: AudioClip, cfg: StftConfig) -> np.ndarray:
    """Magnitude spectrogram, shape (frames, fft_length // 2 + 1)."""
    frames = _frame_centered(clip.samples, cfg.fft_length, cfg.hop_length)
    frames = frames * _window(cfg.window, cfg.fft_length)[None, :]
    return np.abs(np.fft.rfft(frames, n=cfg.fft_length, axis=1))


def hz_to_mel(f: np.ndarray | float) -> np.ndarray | float:
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: MelConfig, sample_rate_hz: int) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, fft_length // 2 + 1)."""
    if cfg.fmax_hz > sample_rate_hz / 2:
        raise ConfigError(
            f"fmax {cfg.fmax_hz} exceeds Nyquist {sample_rate_hz / 2}"
        )
    n_bins = cfg.fft_length // 2 + 1
    bin_hz = np.arange(n_bins) * sample_rate_hz / cfg.fft_length
    edges_mel = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax_hz), cfg.n_mels + 2)
    edges_hz = mel_to_hz(edges_mel)
    fb = np.zeros((cfg.n_mels, n_bins))
    for i in range(cfg.n_mels):
        lo, mid, hi = edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]
        up = (bin_hz - lo) / max(mid - lo, 1e-12)
        down = (hi - bin_hz) / max(hi - mid, 1e-12)
        fb[i] = np.clip(np.minimum(up, down), 0.0, None)
    return fb


def mel_spectrogram(clip: AudioClip, cfg: MelConfig) -> np.ndarray:
    """Mel-weighted power spectrogram, shape (frames, n_mels)."""
    stft_cfg = StftConfig(cfg.fft_length, cfg.hop_length, cfg.window)
    power = stft_magnitude(clip, stft_cfg) ** 2
    fb = mel_filterbank(cfg, clip.sample_rate_hz)
    return power @ fb.T


def fft_convolve(clip: AudioClip, kernel: AudioClip) -> AudioClip:
    """Linear convolution truncated to len(clip), so downstream mixing
    lengths stay fixed. Kernel tail energy beyond the end is dropped."""
    require_same_rate(clip, kernel)
    if len(clip) == 0 or len(kernel) == 0:
        return clip.with_samples(np.zeros(len(clip)))
    out = sps.fftconvolve(clip.samples, kernel.samples, mode="full")
    return clip.with_samples(out[: len(clip)])


_RESAMPLE_HALF_WIDTH = 32


def resample(clip: AudioClip, rate_ratio: float) -> AudioClip:
    """Windowed-sinc resampling. Output sample n reads the input at
    position n * rate_ratio, so the output has round(len / rate_ratio)
    samples and content frequencies scale by rate_ratio.
    """
    if not 0.5 <= rate_ratio <= 2.0:
        raise AudioError(f"rate_ratio must be in [0.5, 2.0], got {rate_ratio}")
    n_in = len(clip)
    n_out = int(round(n_in / rate_ratio))
    if n_in == 0 or n_out == 0:
        return clip.with_samples(np.zeros(n_out))

    cutoff = min(1.0, 1.0 / rate_ratio)
    half = int(np.ceil(_RESAMPLE_HALF_WIDTH / cutoff))
    pos = np.arange(n_out) * rate_ratio
    base = np.floor(pos).astype(np.int64)
    offsets = np.arange(-half + 1, half + 1)
    idx = base[:, None] + offsets[None, :]
    t = idx - pos[:, None]

    taps = cutoff * np.sinc(cutoff * t) * (0.5 + 0.5 * np.cos(np.pi * t / half))
    padded = np.concatenate([np.zeros(half), clip.samples, np.zeros(2 * half)])
    out = np.sum(padded[idx + half] * taps, axis=1)
    return clip.with_samples(out)


def apply_gain_envelope(clip: AudioClip, anchors: list[tuple[float, float]]) -> AudioClip:
    """Sample-wise gain from anchors (time_s, gain_db): linear in dB between
    anchors, first/last anchor gain held beyond the ends."""
    if not anchors:
        return clip
    times = np.array([t for t, _ in anchors], dtype=np.float64)
    if np.any(np.diff(times) < 0):
        raise AudioError("gain anchors must be sorted by time")
    if len(clip) and (times[0] < 0 or times[-1] > clip.duration_s):
        raise AudioError("gain anchor outside clip duration")
    gains_db = np.array([g for _, g in anchors], dtype=np.float64)
    t = np.arange(len(clip)) / clip.sample_rate_hz
    env_db = np.interp(t, times, gains_db)
    return clip.with_samples(clip.samples * 10.0 ** (env_db / 20.0))


def _peaking_coeffs(center_hz: float, gain_db: float, q: float, sample_rate_hz: int):
    """RBJ audio-EQ-cookbook peaking biquad."""
    a = 10.0 ** (gain_db / 40.0)
    w0 = 2.0 * np.pi * center_hz / sample_rate_hz
    alpha = np.sin(w0) / (2.0 * q)
    b = np.array([1.0 + alpha * a, -2.0 * np.cos(w0), 1.0 - alpha * a])
    den = np.array([1.0 + alpha / a, -2.0 * np.cos(w0), 1.0 - alpha / a])
    return b / den[0], den / den[0]


def peaking_eq(clip: AudioClip, bands: list[tuple[float, float, float]]) -> AudioClip:
    """Cascade of second-order peaking filters, one (center_hz, gain_db, q)
    triple per band."""
    out = clip.samples
    for center_hz, gain_db, q in bands:
        if not 0 < center_hz < clip.sample_rate_hz / 2:
            raise AudioError(
                f"EQ center {center_hz} Hz outside (0, {clip.sample_rate_hz / 2})"
            )
        if q <= 0:
            raise AudioError(f"EQ q must be positive, got {q}")
        b, den = _peaking_coeffs(center_hz, gain_db, q, clip.sample_rate_hz)
        out = sps.lfilter(b, den, out)
    return clip.with_samples(np.asarray(out, dtype=np.float64))
