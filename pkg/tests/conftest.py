from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from speakintent.annotation import AnnotationDocument, AnnotationTier, CUE_TIER, write_eaf
from speakintent.pipeline import RunConfig, run
from speakintent.synth import ScenarioConfig, generate_scenario, write_scenario
from speakintent.vad import VadTrack

DATA_DIR = Path(__file__).parent / "data"


def make_track(frames, rate_hz=1.0, pid="p01", t0_s=0.0) -> VadTrack:
    return VadTrack(pid, rate_hz, np.array(frames, dtype=np.uint8), t0_s)


@pytest.fixture(scope="session")
def small_scenario_dir(tmp_path_factory) -> Path:
    """3 participants, 900 s, planted effect; test interval [600, 900)."""
    out = tmp_path_factory.mktemp("scenario")
    cfg = ScenarioConfig(
        participants=3,
        duration_s=900.0,
        seed=11,
        effect_strength=5.0,
        unsuccessful_rate_per_min=1.2,
    )
    write_scenario(generate_scenario(cfg), out)
    return out


@pytest.fixture(scope="session")
def small_run(small_scenario_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("small_run")
    config = RunConfig(
        data_dir=small_scenario_dir,
        out_dir=out,
        windows=(1.0, 2.0),
        repetitions=5,
        test_interval=(600.0, 900.0),
        seed=5,
        epochs=4,
    )
    return run(config)


def annotation_corpus(n_start=22, n_continue=19, participants=13, smack_participants=7):
    """Documents mirroring the annotated-corpus shape used in tests.

    Intention counts are spread round-robin so the totals are exact, and
    the first ``smack_participants`` documents get one audible-smack cue.
    """
    width = len(str(participants))
    docs = []
    for i in range(participants):
        pid = f"q{i + 1:0{width}d}"
        start_ivals = tuple(
            (100.0 * k + 10.0 * i, 100.0 * k + 10.0 * i + 1.0, "")
            for k in range(n_start)
            if k % participants == i
        )
        cont_ivals = tuple(
            (5000.0 + 100.0 * k + 10.0 * i, 5000.0 + 100.0 * k + 10.0 * i + 1.2, "")
            for k in range(n_continue)
            if k % participants == i
        )
        cues = []
        if i < smack_participants:
            cues.append((50.0 + i, 50.5 + i, "audible smack/tongue click"))
        cues.append((60.0 + i, 60.5 + i, "posture change"))
        tiers = {
            "INTS_start": AnnotationTier("INTS_start", start_ivals),
            "INTS_continue": AnnotationTier("INTS_continue", cont_ivals),
            CUE_TIER: AnnotationTier(CUE_TIER, tuple(cues)),
        }
        docs.append(AnnotationDocument(participant_id=pid, tiers=tiers))
    return docs


@pytest.fixture(scope="session")
def eaf_corpus_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("eaf_corpus")
    for doc in annotation_corpus():
        write_eaf(doc, out / f"{doc.participant_id}.eaf")
    return out
