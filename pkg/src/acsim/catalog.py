"""Asset manifests and WAV I/O.

A manifest is line-delimited JSON, one asset per line:

    {"schema": 1, "kind": "speech", "id": "spk1_a", "speaker": "spk1",
     "path": "speech/spk1_a.wav"}

Kinds: speech (requires "speaker"), static_noise, event_noise (optional
"label"), rir. Paths are resolved relative to the manifest file. All audio
is converted to mono float and resampled to the pipeline rate at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .acoustic import RoomImpulseResponse
from .audio import AudioClip

MANIFEST_SCHEMA_VERSION = 1

KINDS = ("speech", "static_noise", "event_noise", "rir")


class CatalogError(ValueError):
    """Bad manifest, unreadable asset, or unknown asset id."""


_PCM_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
    np.dtype(np.uint8): 128.0,
}


def read_wav(path: str | Path) -> AudioClip:
    """Read a WAV file as mono float64 in [-1, 1]."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise CatalogError(f"audio file not found: {path}") from None
    except Exception as exc:
        raise CatalogError(f"unreadable audio file {path}: {exc}") from None
    data = np.atleast_1d(data)
    if data.dtype in _PCM_SCALE:
        offset = 128.0 if data.dtype == np.uint8 else 0.0
        data = (data.astype(np.float64) - offset) / _PCM_SCALE[data.dtype]
    else:
        data = data.astype(np.float64)
    if data.ndim == 2:
        data = data.mean(axis=1)
    return AudioClip(data, int(rate))


def read_wav_channels(path: str | Path) -> list[AudioClip]:
    """Read a WAV file keeping channels separate (for estimate files)."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise CatalogError(f"audio file not found: {path}") from None
    except Exception as exc:
        raise CatalogError(f"unreadable audio file {path}: {exc}") from None
    data = np.atleast_1d(data)
    if data.dtype in _PCM_SCALE:
        offset = 128.0 if data.dtype == np.uint8 else 0.0
        data = (data.astype(np.float64) - offset) / _PCM_SCALE[data.dtype]
    else:
        data = data.astype(np.float64)
    if data.ndim == 1:
        data = data[:, None]
    return [AudioClip(data[:, c], int(rate)) for c in range(data.shape[1])]


def write_wav(path: str | Path, clip: AudioClip) -> None:
    """Write mono 32-bit float WAV."""
    wavfile.write(path, clip.sample_rate_hz, clip.samples.astype(np.float32))


def resample_to_rate(clip: AudioClip, sample_rate_hz: int) -> AudioClip:
    if clip.sample_rate_hz == sample_rate_hz:
        return clip
    ratio = Fraction(sample_rate_hz, clip.sample_rate_hz).limit_denominator(1000)
    out = resample_poly(clip.samples, ratio.numerator, ratio.denominator)
    return AudioClip(np.asarray(out, dtype=np.float64), sample_rate_hz)


@dataclass(frozen=True)
class Asset:
    id: str
    kind: str
    path: str
    speaker: str | None = None
    label: str | None = None


_REQUIRED_FIELDS = {"schema", "kind", "id", "path"}
_OPTIONAL_FIELDS = {"speech": {"speaker"}, "event_noise": {"label"},
                    "static_noise": set(), "rir": set()}


def parse_manifest(manifest_path: str | Path) -> list[Asset]:
    manifest_path = Path(manifest_path)
    try:
        text = manifest_path.read_text()
    except FileNotFoundError:
        raise CatalogError(f"manifest not found: {manifest_path}") from None
    assets = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"{manifest_path}:{lineno}: invalid JSON: {exc}") from None
        if rec.get("schema") != MANIFEST_SCHEMA_VERSION:
            raise CatalogError(
                f"{manifest_path}:{lineno}: unsupported schema {rec.get('schema')!r}"
            )
        kind = rec.get("kind")
        if kind not in KINDS:
            raise CatalogError(f"{manifest_path}:{lineno}: unknown kind {kind!r}")
        missing = _REQUIRED_FIELDS - set(rec)
        if missing:
            raise CatalogError(f"{manifest_path}:{lineno}: missing fields {sorted(missing)}")
        unknown = set(rec) - _REQUIRED_FIELDS - _OPTIONAL_FIELDS[kind]
        if unknown:
            raise CatalogError(f"{manifest_path}:{lineno}: unknown fields {sorted(unknown)}")
        if kind == "speech" and "speaker" not in rec:
            raise CatalogError(f"{manifest_path}:{lineno}: speech asset needs a speaker id")
        if rec["id"] in seen:
            raise CatalogError(f"{manifest_path}:{lineno}: duplicate asset id {rec['id']!r}")
        seen.add(rec["id"])
        assets.append(Asset(
            id=rec["id"], kind=kind,
            path=str((manifest_path.parent / rec["path"]).resolve()),
            speaker=rec.get("speaker"), label=rec.get("label"),
        ))
    return assets


class AssetCatalog:
    """Typed, validated registry of loaded assets, keyed by asset id.

    Read-only after construction; safe to share across worker threads.
    """

    def __init__(self, assets: list[Asset], clips: dict[str, AudioClip]):
        self.assets = {a.id: a for a in assets}
        self._clips = clips
        self.speech = [a for a in assets if a.kind == "speech"]
        self.static_noise = [a for a in assets if a.kind == "static_noise"]
        self.event_noise = [a for a in assets if a.kind == "event_noise"]
        self.rirs = [a for a in assets if a.kind == "rir"]
        self._rir_cache: dict[str, RoomImpulseResponse] = {}

    @property
    def rir_ids(self) -> list[str]:
        return [a.id for a in self.rirs]

    def speaker_ids(self) -> set[str]:
        return {a.speaker for a in self.speech}

    def clip(self, asset_id: str) -> AudioClip:
        try:
            return self._clips[asset_id]
        except KeyError:
            raise CatalogError(f"unknown asset id {asset_id!r}") from None

    def rir(self, asset_id: str) -> RoomImpulseResponse:
        if asset_id not in self._rir_cache:
            asset = self.assets.get(asset_id)
            if asset is None or asset.kind != "rir":
                raise CatalogError(f"unknown impulse response id {asset_id!r}")
            self._rir_cache[asset_id] = RoomImpulseResponse.from_clip(self.clip(asset_id))
        return self._rir_cache[asset_id]


def load_catalog(manifest_path: str | Path, sample_rate_hz: int = 16000) -> AssetCatalog:
    """Parse a manifest and load every referenced file, converting to mono
    and resampling to sample_rate_hz. Fails fast on the first bad entry."""
    assets = parse_manifest(manifest_path)
    clips = {}
    for asset in assets:
        try:
            clip = read_wav(asset.path)
        except CatalogError as exc:
            raise CatalogError(f"asset {asset.id!r}: {exc}") from None
        clips[asset.id] = resample_to_rate(clip, sample_rate_hz)
    return AssetCatalog(assets, clips)
