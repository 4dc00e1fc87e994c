"""Loss and metric computations: multi-resolution STFT, mel, and time-domain
losses, the weighted combined loss, SI-SDR / Silence-SDR with improvement
protocol, and permutation-invariant resolution over channel assignments.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .audio import AudioClip, AudioError, require_same_length
from .dsp import LOG_FLOOR, MelConfig, StftConfig, mel_spectrogram, stft_magnitude

# Reported-value ceiling for ratio metrics; reached when the residual (or
# leaked) energy is below SDR_EPS of the reference energy.
SDR_CAP_DB = 60.0
SDR_EPS = 1e-12

# Energy floor standing in for -si_sdr on silent reference channels, so an
# all-silent estimate is optimal there.
SILENT_REF_EPS = 1e-8

DEFAULT_MSTFT_CONFIGS = tuple(StftConfig.default(n) for n in (512, 1024, 2048))
DEFAULT_MEL_CONFIG = MelConfig()


class MetricError(ValueError):
    """Undefined metric, e.g. SI-SDR on a silent reference."""


@dataclass(frozen=True)
class LossWeights:
    lambda_mstft: float = 10.0
    lambda_mel: float = 10.0
    lambda_time: float = 100.0
    lambda_sdr: float = 1.0

    def __post_init__(self):
        for name in ("lambda_mstft", "lambda_mel", "lambda_time", "lambda_sdr"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class LossBreakdown:
    l_mstft: float
    l_mel: float
    l_time: float
    l_sdr: float
    total: float

    def to_dict(self) -> dict:
        return {"l_mstft": self.l_mstft, "l_mel": self.l_mel,
                "l_time": self.l_time, "l_sdr": self.l_sdr, "total": self.total}


@dataclass(frozen=True)
class PitScore:
    permutation: tuple[int, ...]
    per_channel: tuple
    aggregate: float


def _log_floored(x: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(x, LOG_FLOOR))


def mstft_loss(ref: AudioClip, est: AudioClip,
               configs: Sequence[StftConfig] = DEFAULT_MSTFT_CONFIGS) -> float:
    """Sum over resolutions of the L1 distance between log magnitude
    spectrograms."""
    require_same_length(ref, est)
    total = 0.0
    for cfg in configs:
        d = _log_floored(stft_magnitude(ref, cfg)) - _log_floored(stft_magnitude(est, cfg))
        total += float(np.abs(d).sum())
    return total


def mel_loss(ref: AudioClip, est: AudioClip,
             cfg: MelConfig = DEFAULT_MEL_CONFIG) -> float:
    """L1 distance between log mel spectrograms."""
    require_same_length(ref, est)
    d = _log_floored(mel_spectrogram(ref, cfg)) - _log_floored(mel_spectrogram(est, cfg))
    return float(np.abs(d).sum())


def time_l2_loss(ref: AudioClip, est: AudioClip) -> float:
    """Euclidean norm of the sample-wise difference."""
    require_same_length(ref, est)
    return float(np.linalg.norm(ref.samples - est.samples))


def si_sdr(ref: AudioClip, est: AudioClip, cap_db: float = SDR_CAP_DB) -> float:
    """Scale-invariant SDR in dB: the estimate is projected onto the
    reference, so any nonzero estimate gain cancels. Capped at cap_db when
    the residual energy is negligible."""
    require_same_length(ref, est)
    s = ref.samples
    s_energy = float(np.dot(s, s))
    if s_energy == 0.0:
        raise MetricError("SI-SDR is undefined for a silent reference; "
                          "use silence_sdr for silent channels")
    alpha = float(np.dot(est.samples, s)) / s_energy
    target = alpha * s
    target_energy = float(np.dot(target, target))
    residual = est.samples - target
    residual_energy = float(np.dot(residual, residual))
    if residual_energy < SDR_EPS * target_energy:
        return cap_db
    if target_energy == 0.0:
        # Estimate carries no reference component at all (silent or
        # orthogonal); report the floor instead of -inf.
        return -cap_db
    return 10.0 * math.log10(target_energy / residual_energy)


def silence_sdr(ref: AudioClip, est: AudioClip, cap_db: float = SDR_CAP_DB) -> float:
    """Energy ratio 10*log10(||ref||^2 / ||est||^2) in dB, scoring how
    silent an estimate channel is. ref supplies the reference energy (the
    speaker channel); capped at cap_db for a near-silent estimate."""
    require_same_length(ref, est)
    ref_energy = ref.energy()
    if ref_energy == 0.0:
        raise MetricError("Silence-SDR is undefined for a silent reference")
    est_energy = est.energy()
    if est_energy < SDR_EPS * ref_energy:
        return cap_db
    return 10.0 * math.log10(ref_energy / est_energy)


def improvement(metric_value_est: float, metric_value_baseline: float) -> float:
    """Improvement over the unprocessed-mixture baseline: est - baseline."""
    return metric_value_est - metric_value_baseline


def combined_loss(ref: AudioClip, est: AudioClip,
                  weights: LossWeights = LossWeights(),
                  mstft_configs: Sequence[StftConfig] = DEFAULT_MSTFT_CONFIGS,
                  mel_config: MelConfig = DEFAULT_MEL_CONFIG) -> LossBreakdown:
    """All four loss terms and their weighted total. On a silent reference
    channel the SDR term becomes an estimate-energy penalty so a silent
    estimate is optimal."""
    require_same_length(ref, est)
    l_time = time_l2_loss(ref, est)
    l_mstft = mstft_loss(ref, est, mstft_configs)
    l_mel = mel_loss(ref, est, mel_config)
    if ref.energy() == 0.0:
        l_sdr = 10.0 * math.log10(est.energy() + SILENT_REF_EPS)
    else:
        l_sdr = -si_sdr(ref, est)
    total = (weights.lambda_time * l_time + weights.lambda_mstft * l_mstft
             + weights.lambda_mel * l_mel + weights.lambda_sdr * l_sdr)
    return LossBreakdown(l_mstft=l_mstft, l_mel=l_mel, l_time=l_time,
                         l_sdr=l_sdr, total=total)


def _score_key(value) -> float:
    return value.total if isinstance(value, LossBreakdown) else float(value)


def pit_resolve(refs: Sequence[AudioClip], ests: Sequence[AudioClip],
                scorer: Callable[[AudioClip, AudioClip], object],
                objective: str = "minimize") -> PitScore:
    """Exhaustive permutation-invariant assignment of estimate channels to
    reference channels. scorer(ref, est) returns a float or a
    LossBreakdown; the aggregate is the mean per-channel score of the best
    assignment, ties broken by the lexicographically smallest permutation."""
    if len(refs) != len(ests):
        raise MetricError(f"channel count mismatch: {len(refs)} refs vs {len(ests)} ests")
    n = len(refs)
    if not 1 <= n <= 8:
        raise MetricError(f"channel count must be in [1, 8], got {n}")
    if objective not in ("minimize", "maximize"):
        raise MetricError(f"objective must be minimize or maximize, got {objective!r}")

    best: PitScore | None = None
    for perm in itertools.permutations(range(n)):
        scores = tuple(scorer(refs[c], ests[perm[c]]) for c in range(n))
        aggregate = float(np.mean([_score_key(s) for s in scores]))
        better = (
            best is None
            or (objective == "minimize" and aggregate < best.aggregate)
            or (objective == "maximize" and aggregate > best.aggregate)
        )
        if better:
            best = PitScore(permutation=perm, per_channel=scores, aggregate=aggregate)
    assert best is not None
    return best
