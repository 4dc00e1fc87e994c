"""Independent reference implementations used to check the library.

Everything here is written from the defining formulas, separately from the
package code paths it verifies: naive DFTs, explicit-loop convolution,
pointwise mel filterbank weights, direct metric formulas, Schroeder decay
fitting, a line-by-line interpreter of the random-split pseudocode, and
brute-force permutation search.
"""

import itertools
import math
import random

import numpy as np


def naive_dft_magnitude(frame):
    """O(N^2) DFT magnitude, one-sided."""
    n = len(frame)
    bins = n // 2 + 1
    out = np.empty(bins)
    for k in range(bins):
        acc = 0.0 + 0.0j
        for m in range(n):
            acc += frame[m] * np.exp(-2j * np.pi * k * m / n)
        out[k] = abs(acc)
    return out


def stft_magnitude_oracle(x, fft_length, hop_length, window):
    """Center-padded magnitude STFT, re-derived: frame t covers input
    samples [t*hop - fft/2, t*hop + fft/2)."""
    n_frames = 1 + len(x) // hop_length
    half = fft_length // 2
    if window == "rect":
        win = np.ones(fft_length)
    else:
        win = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(fft_length) / fft_length)
    rows = []
    for t in range(n_frames):
        start = t * hop_length - half
        frame = np.zeros(fft_length)
        for i in range(fft_length):
            src = start + i
            if 0 <= src < len(x):
                frame[i] = x[src]
        rows.append(np.abs(np.fft.rfft(frame * win)))
    return np.array(rows)


def mel_weight_oracle(f_hz, lo_hz, mid_hz, hi_hz):
    """Triangular filter weight at a single frequency, from the mel-scale
    band edges."""
    if f_hz <= lo_hz or f_hz >= hi_hz:
        return 0.0
    if f_hz <= mid_hz:
        return (f_hz - lo_hz) / (mid_hz - lo_hz)
    return (hi_hz - f_hz) / (hi_hz - mid_hz)


def hz_to_mel_oracle(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)


def mel_to_hz_oracle(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def mel_filterbank_oracle(n_mels, fft_length, sample_rate_hz, fmin_hz, fmax_hz):
    edges = [
        mel_to_hz_oracle(
            hz_to_mel_oracle(fmin_hz)
            + (hz_to_mel_oracle(fmax_hz) - hz_to_mel_oracle(fmin_hz)) * i / (n_mels + 1)
        )
        for i in range(n_mels + 2)
    ]
    n_bins = fft_length // 2 + 1
    fb = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        for b in range(n_bins):
            f = b * sample_rate_hz / fft_length
            fb[i, b] = mel_weight_oracle(f, edges[i], edges[i + 1], edges[i + 2])
    return fb


def mel_spectrogram_oracle(x, sample_rate_hz, fft_length=1024, hop_length=256,
                           n_mels=128, fmin_hz=0.0, fmax_hz=8000.0):
    mag = stft_magnitude_oracle(x, fft_length, hop_length, "hann")
    fb = mel_filterbank_oracle(n_mels, fft_length, sample_rate_hz, fmin_hz, fmax_hz)
    return (mag ** 2) @ fb.T


def direct_convolve(x, k):
    """Explicit O(N*M) convolution, truncated to len(x)."""
    n, m = len(x), len(k)
    out = np.zeros(n)
    for i in range(n):
        for j in range(m):
            if 0 <= i - j < n:
                out[i] += k[j] * x[i - j]
    return out


LOG_FLOOR = 1e-5


def mstft_loss_oracle(ref, est, fft_lengths=(512, 1024, 2048)):
    total = 0.0
    for fft_length in fft_lengths:
        hop = fft_length // 4
        a = stft_magnitude_oracle(ref, fft_length, hop, "hann")
        b = stft_magnitude_oracle(est, fft_length, hop, "hann")
        diff = np.log(np.maximum(a, LOG_FLOOR)) - np.log(np.maximum(b, LOG_FLOOR))
        total += float(np.sum(np.abs(diff)))
    return total


def mel_loss_oracle(ref, est, sample_rate_hz):
    a = mel_spectrogram_oracle(ref, sample_rate_hz)
    b = mel_spectrogram_oracle(est, sample_rate_hz)
    diff = np.log(np.maximum(a, LOG_FLOOR)) - np.log(np.maximum(b, LOG_FLOOR))
    return float(np.sum(np.abs(diff)))


def time_l2_oracle(ref, est):
    acc = 0.0
    for r, e in zip(ref, est):
        acc += (r - e) ** 2
    return math.sqrt(acc)


def si_sdr_oracle(ref, est, cap_db=60.0):
    s = np.asarray(ref, dtype=np.float64)
    sh = np.asarray(est, dtype=np.float64)
    alpha = float(sh @ s) / float(s @ s)
    target = alpha * s
    e_t = float(target @ target)
    e_r = float((sh - target) @ (sh - target))
    if e_r < 1e-12 * e_t:
        return cap_db
    if e_t == 0.0:
        return -cap_db
    return 10.0 * math.log10(e_t / e_r)


def silence_sdr_oracle(ref, est, cap_db=60.0):
    e_s = float(np.asarray(ref) @ np.asarray(ref))
    e_e = float(np.asarray(est) @ np.asarray(est))
    if e_e < 1e-12 * e_s:
        return cap_db
    return 10.0 * math.log10(e_s / e_e)


def schroeder_rt60_oracle(h, sample_rate_hz, hi_db=-5.0, lo_db=-35.0):
    """Backward-integrated energy decay; least-squares line over the
    [hi_db, lo_db] span extrapolated to -60 dB."""
    e = np.asarray(h, dtype=np.float64) ** 2
    edc = np.flip(np.cumsum(np.flip(e)))
    db = 10.0 * np.log10(np.maximum(edc / edc[0], 1e-30))
    sel = (db <= hi_db) & (db >= lo_db)
    t = np.flatnonzero(sel) / sample_rate_hz
    y = db[sel]
    slope = np.polyfit(t, y, 1)[0]
    return -60.0 / slope


class ScriptedStream:
    """Deterministic random stream backed by python's Mersenne Twister,
    usable both by the implementation and by the reference interpreter."""

    def __init__(self, seed):
        self._r = random.Random(seed)

    def randint(self, lo, hi):
        return self._r.randint(lo, hi)

    def random(self):
        return self._r.random()

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self._r.random()

    def choice(self, items):
        return items[self.randint(0, len(items) - 1)]


class FixedStream:
    """Stream that replays pre-scripted draw values."""

    def __init__(self, randints=(), randoms=()):
        self._ints = list(randints)
        self._floats = list(randoms)

    def randint(self, lo, hi):
        v = self._ints.pop(0)
        assert lo <= v <= hi, f"scripted randint {v} outside [{lo}, {hi}]"
        return v

    def random(self):
        return self._floats.pop(0)

    def uniform(self, lo, hi):
        return lo + (hi - lo) * self.random()

    def choice(self, items):
        return items[self.randint(0, len(items) - 1)]


def random_split_reference(stream, x, l1=0.2, l2=1.0, p_seg=0.75):
    """Line-by-line interpretation of the random-split pseudocode, using
    plain python lists."""
    T = len(x)
    y = [0.0] * T
    i, j, p = 0, 0, 0.0
    while p <= p_seg and i <= T and j <= T:
        k = stream.randint(math.floor(l1 * (T - i)), math.floor(l2 * (T - i)))
        j = stream.randint(j, T)
        k = min(k, T - j)
        for off in range(min(k, T - i)):
            y[j + off] = x[i + off]
        i += k
        j += k
        p = stream.random()
    return y


def random_split_coverage_mc(rand, T, l1=0.2, l2=1.0, p_seg=0.75):
    """Fraction of output samples covered by one simulated run, tracking
    only the index arithmetic."""
    covered = 0
    i, j, p = 0, 0, 0.0
    while p <= p_seg and i <= T and j <= T:
        k = rand.randint(math.floor(l1 * (T - i)), math.floor(l2 * (T - i)))
        j = rand.randint(j, T)
        k = min(k, T - j)
        covered += min(k, T - i)
        i += k
        j += k
        p = rand.random()
    return covered / T


def brute_force_pit(refs, ests, scorer, maximize=False):
    best_perm, best_val = None, None
    for perm in itertools.permutations(range(len(refs))):
        vals = [scorer(refs[c], ests[perm[c]]) for c in range(len(refs))]
        agg = sum(vals) / len(vals)
        if best_val is None or (agg > best_val if maximize else agg < best_val):
            best_perm, best_val = perm, agg
    return best_perm, best_val
