import numpy as np
import pytest

from speakintent.accel import load_accel
from speakintent.annotation import cue_summary, parse_eaf
from speakintent.errors import ConfigError
from speakintent.synth import ScenarioConfig, generate_scenario, scenario_manifest, write_scenario
from speakintent.vad import CaseLabel, clean, extract_onsets, load_vad

SMALL = dict(participants=2, duration_s=600.0, seed=4, unsuccessful_rate_per_min=1.0)


class TestDeterminism:
    def test_same_seed_same_arrays(self):
        a = generate_scenario(ScenarioConfig(**SMALL))
        b = generate_scenario(ScenarioConfig(**SMALL))
        for ta, tb in zip(a.vad_tracks, b.vad_tracks):
            np.testing.assert_array_equal(ta.frames, tb.frames)
        for sa, sb in zip(a.accel_series, b.accel_series):
            np.testing.assert_array_equal(sa.values, sb.values)

    def test_same_seed_identical_files(self, tmp_path):
        for sub in ("one", "two"):
            write_scenario(generate_scenario(ScenarioConfig(**SMALL)), tmp_path / sub)
        for rel in sorted(p.relative_to(tmp_path / "one") for p in (tmp_path / "one").rglob("*") if p.is_file()):
            assert (tmp_path / "one" / rel).read_bytes() == (tmp_path / "two" / rel).read_bytes()

    def test_different_seed_differs(self):
        a = generate_scenario(ScenarioConfig(**SMALL))
        b = generate_scenario(ScenarioConfig(**{**SMALL, "seed": 5}))
        assert any(
            not np.array_equal(ta.frames, tb.frames) for ta, tb in zip(a.vad_tracks, b.vad_tracks)
        )


class TestRoundTrip:
    def test_emitted_files_parse_back(self, tmp_path):
        cfg = ScenarioConfig(**SMALL)
        scenario = generate_scenario(cfg)
        write_scenario(scenario, tmp_path)
        for pid in cfg.participant_ids():
            track = load_vad(tmp_path / "vad" / f"{pid}.vad")
            series = load_accel(tmp_path / "accel" / f"{pid}.accel")
            doc = parse_eaf(tmp_path / "annotations" / f"{pid}.eaf")
            assert track.participant_id == series.participant_id == doc.participant_id == pid
            orig = next(t for t in scenario.vad_tracks if t.participant_id == pid)
            np.testing.assert_array_equal(track.frames, orig.frames)
            orig_series = next(s for s in scenario.accel_series if s.participant_id == pid)
            np.testing.assert_allclose(series.values, orig_series.values, atol=1e-6)

    def test_manifest_counts_match_parsed_files(self, tmp_path):
        cfg = ScenarioConfig(**SMALL)
        write_scenario(generate_scenario(cfg), tmp_path)
        manifest = scenario_manifest(cfg)
        for pid, counts in manifest["participants"].items():
            track = clean(load_vad(tmp_path / "vad" / f"{pid}.vad"))
            assert len(extract_onsets(track)) == counts["onsets"]
            doc = parse_eaf(tmp_path / "annotations" / f"{pid}.eaf")
            assert len(doc.tiers["INTS_start"]) == counts["ints_start"]
            assert len(doc.tiers["INTS_continue"]) == counts["ints_continue"]

    def test_cue_tier_emitted(self, tmp_path):
        cfg = ScenarioConfig(**SMALL)
        write_scenario(generate_scenario(cfg), tmp_path)
        total = sum(
            sum(cue_summary(parse_eaf(p)).values())
            for p in (tmp_path / "annotations").glob("*.eaf")
        )
        manifest = scenario_manifest(cfg)["totals"]
        assert total == manifest["ints_start"] + manifest["ints_continue"]
        assert total > 0


class TestTrackStructure:
    def test_cleaning_is_identity_on_generated_tracks(self):
        scenario = generate_scenario(ScenarioConfig(**SMALL))
        for track in scenario.vad_tracks:
            np.testing.assert_array_equal(clean(track).frames, track.frames)

    def test_onsets_match_bookkeeping(self):
        scenario = generate_scenario(ScenarioConfig(**SMALL))
        for track in scenario.vad_tracks:
            onsets = extract_onsets(clean(track))
            assert onsets.tolist() == scenario.onsets[track.participant_id]

    def test_annotations_avoid_speech(self):
        cfg = ScenarioConfig(**SMALL)
        scenario = generate_scenario(cfg)
        by_pid = {t.participant_id: t for t in scenario.vad_tracks}
        for pid, planted in scenario.planted.items():
            frames = by_pid[pid].frames
            for end, _label in planted:
                # the clearance window before each annotation end is silent
                lo = int((end - cfg.intent_clearance_s) * cfg.vad_rate_hz)
                hi = int(np.ceil(end * cfg.vad_rate_hz))
                assert frames[max(lo, 0) : hi].sum() == 0

    def test_turn_rate_roughly_matches(self):
        cfg = ScenarioConfig(participants=1, duration_s=3000.0, seed=1, turn_rate_per_min=2.0)
        scenario = generate_scenario(cfg)
        count = len(scenario.onsets[cfg.participant_ids()[0]])
        assert 0.5 * 100 <= count <= 1.5 * 100  # expectation is 100 turns

    def test_zero_unsuccessful_rate(self):
        cfg = ScenarioConfig(**{**SMALL, "unsuccessful_rate_per_min": 0.0})
        manifest = scenario_manifest(cfg)
        assert manifest["totals"]["ints_start"] == 0
        assert manifest["totals"]["ints_continue"] == 0


class TestBursts:
    def test_strength_zero_leaves_noise_untouched_by_events(self):
        base = generate_scenario(ScenarioConfig(**SMALL, effect_strength=0.0))
        strong = generate_scenario(ScenarioConfig(**SMALL, effect_strength=4.0))
        # identical noise realization, differing only within burst spans
        for a, b in zip(base.accel_series, strong.accel_series):
            diff = np.abs(a.values - b.values).sum(axis=1)
            changed = np.flatnonzero(diff > 0)
            assert len(changed) > 0
            total_burst_budget = (
                len(base.onsets[a.participant_id]) + len(base.planted[a.participant_id])
            ) * ScenarioConfig(**SMALL).burst_s * a.rate_hz
            assert len(changed) <= total_burst_budget + 1

    def test_bursts_precede_events(self):
        cfg = ScenarioConfig(**SMALL)
        base = generate_scenario(ScenarioConfig(**{**SMALL, "effect_strength": 0.0}))
        strong = generate_scenario(cfg)
        for a, b in zip(base.accel_series, strong.accel_series):
            pid = a.participant_id
            events = list(base.onsets[pid]) + [e for e, _ in base.planted[pid]]
            changed = np.flatnonzero(np.abs(a.values - b.values).sum(axis=1) > 0)
            for idx in changed:
                t = a.times[idx]
                assert any(e - cfg.effect_lead_s - 0.051 <= t < e for e in events)


class TestConfigValidation:
    def test_infeasible_density(self):
        with pytest.raises(ConfigError, match="infeasible density"):
            ScenarioConfig(turn_rate_per_min=10.0, mean_turn_s=5.0)

    def test_lead_must_cover_burst(self):
        with pytest.raises(ConfigError, match="burst"):
            ScenarioConfig(effect_lead_s=0.1)

    def test_negative_strength_rejected(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(effect_strength=-1.0)
