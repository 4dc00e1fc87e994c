import numpy as np
import pytest

from acsim.audio import AudioClip
from acsim.catalog import CatalogError
from acsim.config import ConfigError, ScenarioSpec, SimulationConfig
from acsim.content import (
    ExampleMetadata,
    SpliceMap,
    assemble_example,
    random_split,
    remove_event_overlap,
    select_content,
    speech_activity_mask,
)
from acsim.rng import NumpyStream
from oracles import FixedStream, ScriptedStream, random_split_reference

SR = 16000


class TestSelectContent:
    def test_speaker1_always_present(self, catalog):
        cfg = SimulationConfig(p_speaker2=0.0, p_static=0.0, p_event=0.0)
        draw = select_content(NumpyStream(0), catalog, cfg)
        assert draw.speaker1.kind == "speech"
        assert draw.speaker2 is None and draw.static is None and draw.event is None

    def test_second_speaker_is_different_person(self, catalog):
        cfg = SimulationConfig(p_speaker2=1.0)
        for seed in range(50):
            draw = select_content(NumpyStream(seed), catalog, cfg)
            assert draw.speaker2 is not None
            assert draw.speaker2.speaker != draw.speaker1.speaker

    def test_speaker2_rate_matches_probability(self, catalog):
        cfg = SimulationConfig(p_speaker2=0.5, p_static=0.0, p_event=0.0)
        hits = sum(
            select_content(NumpyStream(s), catalog, cfg).speaker2 is not None
            for s in range(4000)
        )
        assert abs(hits - 2000) <= 95  # 3 sigma of Binomial(4000, 0.5)

    def test_draw_determinism(self, catalog):
        cfg = SimulationConfig()
        assert select_content(NumpyStream(7), catalog, cfg) == \
            select_content(NumpyStream(7), catalog, cfg)


class TestRandomSplit:
    def test_silence_stays_silent(self):
        cfg = SimulationConfig()
        x = AudioClip.silence(SR, SR)
        y, _ = random_split(NumpyStream(0), x, cfg)
        assert not np.any(y.samples)

    def test_forced_full_copy(self):
        cfg = SimulationConfig()
        x = AudioClip(np.random.default_rng(0).uniform(-0.5, 0.5, 100), SR)
        # one segment: length draw = 100, write cursor jump to 0, stop draw
        stream = FixedStream(randints=[100, 0], randoms=[1.0])
        y, smap = random_split(stream, x, cfg)
        assert np.array_equal(y.samples, x.samples)
        assert smap.segments == ((0, 0, 100),)

    def test_splice_map_soundness(self):
        cfg = SimulationConfig()
        x = AudioClip(np.random.default_rng(1).uniform(-0.5, 0.5, 5000), SR)
        for seed in range(30):
            y, smap = random_split(NumpyStream(seed), x, cfg)
            check = np.zeros(len(x))
            prev_end = 0
            for src, dst, n in smap.segments:
                assert dst >= prev_end
                prev_end = dst + n
                check[dst:dst + n] = x.samples[src:src + n]
            assert np.array_equal(y.samples, check)

    def test_matches_reference_interpreter(self):
        cfg = SimulationConfig()
        x = np.random.default_rng(2).uniform(-0.5, 0.5, 777)
        clip = AudioClip(x, SR)
        for seed in range(100):
            got, _ = random_split(ScriptedStream(seed), clip, cfg)
            want = random_split_reference(ScriptedStream(seed), list(x))
            np.testing.assert_array_equal(got.samples, np.array(want))

    def test_output_length_preserved(self):
        cfg = SimulationConfig()
        x = AudioClip(np.ones(1234), SR)
        y, _ = random_split(NumpyStream(3), x, cfg)
        assert len(y) == 1234

    def test_splice_map_round_trip(self):
        cfg = SimulationConfig()
        x = AudioClip(np.ones(400), SR)
        _, smap = random_split(NumpyStream(4), x, cfg)
        assert SpliceMap.from_list(smap.to_list()) == smap


class TestActivityMaskAndOverlap:
    def test_mask_silence_all_false(self):
        assert not speech_activity_mask(AudioClip.silence(1000, SR)).any()

    def test_mask_hangover_extends_forward(self):
        x = np.zeros(SR)
        x[1000] = 0.5
        mask = speech_activity_mask(AudioClip(x, SR), hangover_ms=50.0)
        assert mask[1000]
        assert mask[1000 + 800]          # 50 ms at 16 kHz
        assert not mask[1000 + 801]
        assert not mask[999]

    def test_overlapping_burst_dropped_entirely(self):
        ev = np.zeros(2000)
        ev[100:300] = 0.4   # touches speech
        ev[1200:1400] = 0.4  # clear of speech
        mask = np.zeros(2000, dtype=bool)
        mask[250:600] = True
        out = remove_event_overlap(AudioClip(ev, SR), mask)
        assert not out.samples[100:300].any()
        assert np.array_equal(out.samples[1200:1400], ev[1200:1400])

    def test_no_speech_keeps_event(self):
        ev = np.random.default_rng(0).uniform(-0.3, 0.3, 500)
        out = remove_event_overlap(AudioClip(ev, SR), np.zeros(500, dtype=bool))
        assert np.array_equal(out.samples, ev)

    def test_full_speech_silences_event(self):
        ev = np.random.default_rng(1).uniform(-0.3, 0.3, 500)
        out = remove_event_overlap(AudioClip(ev, SR), np.ones(500, dtype=bool))
        assert not out.samples.any()


class TestAssembleExample:
    def test_single_speaker_static_only_is_additive(self, catalog):
        cfg = SimulationConfig(duration_s=2.0)
        scen = ScenarioSpec.from_tag("S-N")
        ex = assemble_example(NumpyStream(11), catalog, cfg, scen, seed=11)
        assert not ex.targets[1].samples.any()
        assert ex.event_track is None
        recomputed = (ex.targets[0].samples + ex.targets[1].samples) \
            + ex.static_track.samples
        assert np.array_equal(ex.mixture.samples, recomputed)

    def test_two_speaker_mixture_association_order(self, catalog):
        cfg = SimulationConfig(duration_s=2.0)
        scen = ScenarioSpec.from_tag("D-All")
        ex = assemble_example(NumpyStream(21), catalog, cfg, scen, seed=21)
        total = ex.targets[0].samples + ex.targets[1].samples
        if ex.static_track is not None:
            total = total + ex.static_track.samples
        if ex.event_track is not None:
            total = total + ex.event_track.samples
        assert np.array_equal(ex.mixture.samples, total)

    def test_seed_determinism(self, catalog):
        cfg = SimulationConfig(duration_s=2.0)
        scen = ScenarioSpec.from_tag("D-All")
        a = assemble_example(NumpyStream(5), catalog, cfg, scen, seed=5)
        b = assemble_example(NumpyStream(5), catalog, cfg, scen, seed=5)
        assert np.array_equal(a.mixture.samples, b.mixture.samples)
        assert a.metadata == b.metadata

    @pytest.mark.parametrize("tag", ["D-All", "D-NE", "D-NR", "D-N",
                                     "S-All", "S-NE", "S-NR", "S-N"])
    def test_scenario_constraints_respected(self, catalog, tag):
        cfg = SimulationConfig(duration_s=1.5)
        scen = ScenarioSpec.from_tag(tag)
        for seed in range(6):
            ex = assemble_example(NumpyStream(seed), catalog, cfg, scen, seed=seed)
            md = ex.metadata
            if scen.speakers == 2:
                assert md.speaker2 is not None
                assert ex.targets[1].samples.any()
            else:
                assert md.speaker2 is None
                assert not ex.targets[1].samples.any()
            if not scen.event_allowed:
                assert md.event is None and ex.event_track is None
            if not scen.reverb_allowed:
                for rec in (md.speaker1, md.speaker2, md.static, md.event):
                    if rec is not None:
                        assert rec.plan.reverb is None

    def test_expected_duration_and_rate(self, catalog):
        cfg = SimulationConfig(duration_s=2.0)
        ex = assemble_example(NumpyStream(0), catalog, cfg,
                              ScenarioSpec.from_tag("S-N"), seed=0)
        assert len(ex.mixture) == cfg.n_samples
        assert ex.mixture.sample_rate_hz == cfg.sample_rate_hz

    def test_peak_never_exceeds_limit(self, catalog):
        cfg = SimulationConfig(duration_s=1.0)
        for seed in range(20):
            ex = assemble_example(NumpyStream(seed), catalog, cfg,
                                  ScenarioSpec.from_tag("D-All"), seed=seed)
            assert ex.mixture.peak() <= 0.99 + 1e-12

    def test_metadata_round_trip(self, catalog):
        cfg = SimulationConfig(duration_s=1.0)
        ex = assemble_example(NumpyStream(9), catalog, cfg,
                              ScenarioSpec.from_tag("D-All"), seed=9)
        md = ex.metadata
        assert ExampleMetadata.from_dict(md.to_dict()) == md

    def test_static_snr_honored_before_clipping(self, catalog):
        cfg = SimulationConfig(duration_s=2.0)
        ex = assemble_example(NumpyStream(13), catalog, cfg,
                              ScenarioSpec.from_tag("S-N"), seed=13)
        speech = ex.targets[0].samples + ex.targets[1].samples
        snr = 10.0 * np.log10(np.dot(speech, speech)
                              / ex.static_track.energy())
        assert snr == pytest.approx(ex.metadata.static.snr_db, abs=1e-6)


class TestScenarioConfig:
    def test_bad_tag_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioSpec.from_tag("X-All")
        with pytest.raises(ConfigError):
            ScenarioSpec.from_tag("D-XX")

    def test_two_speaker_needs_two_voices(self, catalog):
        # a catalog with one speaker id cannot build a D scenario
        from acsim.catalog import AssetCatalog
        one = [a for a in catalog.speech if a.speaker == catalog.speech[0].speaker]
        small = AssetCatalog(one, {a.id: catalog.clip(a.id) for a in one})
        cfg = SimulationConfig(duration_s=1.0)
        with pytest.raises((ConfigError, CatalogError)):
            assemble_example(NumpyStream(0), small, cfg,
                             ScenarioSpec.from_tag("D-N"), seed=0)
