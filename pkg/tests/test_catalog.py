import numpy as np
import pytest
from scipy.io import wavfile

from acsim.audio import AudioClip
from acsim.catalog import (
    CatalogError,
    load_catalog,
    parse_manifest,
    read_wav,
    read_wav_channels,
    write_wav,
)


def write_manifest(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


GOOD = '{"schema": 1, "kind": "static_noise", "id": "n1", "path": "n1.wav"}'


class TestParseManifest:
    def test_demo_corpus_parses(self, corpus_dir):
        assets = parse_manifest(corpus_dir / "assets.jsonl")
        kinds = {a.kind for a in assets}
        assert kinds == {"speech", "static_noise", "event_noise", "rir"}

    def test_missing_required_field_names_line(self, tmp_path):
        p = write_manifest(tmp_path / "m.jsonl",
                           [GOOD, '{"schema": 1, "kind": "speech", "id": "s1"}'])
        with pytest.raises(CatalogError, match=":2"):
            parse_manifest(p)

    def test_unknown_kind_rejected(self, tmp_path):
        p = write_manifest(
            tmp_path / "m.jsonl",
            ['{"schema": 1, "kind": "music", "id": "x", "path": "x.wav"}'])
        with pytest.raises(CatalogError, match="music"):
            parse_manifest(p)

    def test_unknown_field_rejected(self, tmp_path):
        p = write_manifest(
            tmp_path / "m.jsonl",
            ['{"schema": 1, "kind": "rir", "id": "r", "path": "r.wav", "room": "a"}'])
        with pytest.raises(CatalogError, match="room"):
            parse_manifest(p)

    def test_duplicate_id_rejected(self, tmp_path):
        p = write_manifest(tmp_path / "m.jsonl", [GOOD, GOOD])
        with pytest.raises(CatalogError, match="n1"):
            parse_manifest(p)

    def test_speech_requires_speaker(self, tmp_path):
        p = write_manifest(
            tmp_path / "m.jsonl",
            ['{"schema": 1, "kind": "speech", "id": "s", "path": "s.wav"}'])
        with pytest.raises(CatalogError, match="speaker"):
            parse_manifest(p)

    def test_bad_schema_version_rejected(self, tmp_path):
        p = write_manifest(
            tmp_path / "m.jsonl",
            ['{"schema": 2, "kind": "rir", "id": "r", "path": "r.wav"}'])
        with pytest.raises(CatalogError, match="schema"):
            parse_manifest(p)

    def test_invalid_json_names_line(self, tmp_path):
        p = write_manifest(tmp_path / "m.jsonl", [GOOD, "{not json"])
        with pytest.raises(CatalogError, match=":2"):
            parse_manifest(p)


class TestWavIo:
    def test_float_round_trip_bit_exact(self, tmp_path):
        x = np.random.default_rng(0).uniform(-0.9, 0.9, 4000)
        clip = AudioClip(x, 16000)
        path = tmp_path / "x.wav"
        write_wav(path, clip)
        back = read_wav(path)
        assert back.sample_rate_hz == 16000
        np.testing.assert_array_equal(back.samples, x.astype(np.float32))

    def test_int16_scaling(self, tmp_path):
        data = np.array([0, 16384, -16384, 32767, -32768], dtype=np.int16)
        path = tmp_path / "i16.wav"
        wavfile.write(path, 16000, data)
        clip = read_wav(path)
        assert clip.peak() <= 1.0
        assert clip.samples[1] == pytest.approx(0.5, abs=1e-4)

    def test_stereo_becomes_mean_mono(self, tmp_path):
        left = np.full(100, 0.2, dtype=np.float32)
        right = np.full(100, 0.6, dtype=np.float32)
        path = tmp_path / "st.wav"
        wavfile.write(path, 16000, np.stack([left, right], axis=1))
        clip = read_wav(path)
        np.testing.assert_allclose(clip.samples, 0.4, atol=1e-6)

    def test_read_channels_keeps_channels(self, tmp_path):
        left = np.full(50, 0.1, dtype=np.float32)
        right = np.full(50, -0.1, dtype=np.float32)
        path = tmp_path / "st2.wav"
        wavfile.write(path, 16000, np.stack([left, right], axis=1))
        chans = read_wav_channels(path)
        assert len(chans) == 2
        np.testing.assert_allclose(chans[0].samples, 0.1, atol=1e-6)
        np.testing.assert_allclose(chans[1].samples, -0.1, atol=1e-6)


class TestLoadCatalog:
    def test_demo_corpus_loads_at_target_rate(self, catalog):
        for a in list(catalog.assets.values())[:4]:
            assert catalog.clip(a.id).sample_rate_hz == 16000

    def test_non_target_rate_resampled(self, tmp_path):
        sr_in, dur = 44100, 1.25
        t = np.arange(int(sr_in * dur)) / sr_in
        x = (0.5 * np.sin(2 * np.pi * 440 * t)).astype(np.float32)
        wavfile.write(tmp_path / "hi.wav", sr_in, x)
        m = write_manifest(
            tmp_path / "m.jsonl",
            ['{"schema": 1, "kind": "static_noise", "id": "hi", "path": "hi.wav"}'])
        cat = load_catalog(m, 16000)
        clip = cat.clip("hi")
        assert clip.sample_rate_hz == 16000
        assert abs(len(clip) - round(dur * 16000)) <= 1

    def test_missing_file_reported(self, tmp_path):
        m = write_manifest(
            tmp_path / "m.jsonl",
            ['{"schema": 1, "kind": "rir", "id": "gone", "path": "gone.wav"}'])
        with pytest.raises(CatalogError, match="gone"):
            load_catalog(m)

    def test_unknown_asset_id_raises(self, catalog):
        with pytest.raises(CatalogError):
            catalog.clip("no-such-id")
