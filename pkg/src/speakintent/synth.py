"""Synthetic multi-participant scenarios with planted pre-speech motion.

Each participant gets a speech track drawn from a renewal process, a
3-axis accelerometer trace (gravity offset + white noise + slow drift),
and planted unrealized-intention annotations.  A short half-sine burst
of configurable amplitude is injected on a random axis shortly before
every speech onset and before every annotation end, which makes the
downstream classification task exactly as hard as ``effect_strength``
dictates: at 0 the accelerometer is independent of the speech track.

Turn and gap durations are quantized to the VAD frame grid and kept
above the cleaning thresholds, so the emitted tracks are fixed points of
the cleaning pass and the generator's onset bookkeeping is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .accel import AccelSeries, write_accel
from .annotation import CANONICAL_CUES, CUE_TIER, TIER_NAMES, AnnotationDocument, AnnotationTier, write_eaf
from .errors import ConfigError
from .seeding import rng_for
from .vad import CaseLabel, VadTrack, write_vad


@dataclass(frozen=True)
class ScenarioConfig:
    participants: int = 13
    duration_s: float = 4200.0
    vad_rate_hz: float = 1.0
    accel_rate_hz: float = 20.0
    turn_rate_per_min: float = 2.0
    mean_turn_s: float = 8.0
    effect_strength: float = 5.0
    effect_lead_s: float = 1.0
    unsuccessful_rate_per_min: float = 0.3
    seed: int = 0
    noise_std: float = 0.3
    gravity: float = 9.81
    drift_std_ratio: float = 0.5
    burst_s: float = 0.4
    min_turn_s: float = 2.0
    min_gap_s: float = 2.5
    intent_clearance_s: float = 4.5

    def __post_init__(self):
        if self.participants < 1:
            raise ConfigError("participants must be >= 1")
        if min(self.duration_s, self.vad_rate_hz, self.accel_rate_hz) <= 0:
            raise ConfigError("durations and rates must be positive")
        if self.turn_rate_per_min <= 0 or self.mean_turn_s <= 0:
            raise ConfigError("turn_rate_per_min and mean_turn_s must be positive")
        if self.effect_strength < 0:
            raise ConfigError("effect_strength must be >= 0")
        if self.effect_lead_s < self.burst_s:
            raise ConfigError("effect_lead_s must cover the burst duration")
        if self.mean_gap_s <= self.min_gap_s:
            raise ConfigError(
                f"infeasible density: implied mean gap {self.mean_gap_s:.2f} s "
                f"is not above the minimum gap {self.min_gap_s:.2f} s"
            )

    @property
    def mean_gap_s(self) -> float:
        return 60.0 / self.turn_rate_per_min - self.mean_turn_s

    def participant_ids(self) -> list[str]:
        width = max(2, len(str(self.participants)))
        return [f"p{i + 1:0{width}d}" for i in range(self.participants)]


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    vad_tracks: tuple[VadTrack, ...]
    accel_series: tuple[AccelSeries, ...]
    annotations: tuple[AnnotationDocument, ...]
    onsets: dict[str, list[float]] = field(repr=False, default_factory=dict)
    planted: dict[str, list[tuple[float, CaseLabel]]] = field(repr=False, default_factory=dict)


def _draw_turns(cfg: ScenarioConfig, rng) -> list[tuple[int, int]]:
    """(start_frame, stop_frame) per turn on the VAD grid."""
    rate = cfg.vad_rate_hz
    n_frames = int(round(cfg.duration_s * rate))
    min_turn = max(1, int(np.ceil(cfg.min_turn_s * rate)))
    min_gap = max(1, int(np.ceil(cfg.min_gap_s * rate)))
    turns = []
    pos = max(min_gap, int(round(max(rng.exponential(cfg.mean_gap_s), cfg.min_gap_s) * rate)))
    while True:
        turn = max(min_turn, int(round(max(rng.exponential(cfg.mean_turn_s), cfg.min_turn_s) * rate)))
        if pos + turn + 1 > n_frames:
            break
        turns.append((pos, pos + turn))
        gap = max(min_gap, int(round(max(rng.exponential(cfg.mean_gap_s), cfg.min_gap_s) * rate)))
        pos = pos + turn + gap
    return turns


def _plant_annotations(cfg: ScenarioConfig, turns, rng) -> list[tuple[float, float, CaseLabel]]:
    """(start_s, end_s, label) intervals placed inside silence gaps.

    Every annotation end keeps ``intent_clearance_s`` of silence before
    it, so windows up to that length never overlap speech; "continue"
    cases sit right behind the preceding turn of the same participant.
    """
    rate = cfg.vad_rate_hz
    n_frames = int(round(cfg.duration_s * rate))
    gaps = []
    prev_end = 0
    for start, stop in turns:
        gaps.append((prev_end / rate, start / rate, prev_end > 0))
        prev_end = stop
    gaps.append((prev_end / rate, n_frames / rate, prev_end > 0))

    out = []
    clearance = cfg.intent_clearance_s
    for gap_start, gap_end, has_prev_turn in gaps:
        length = gap_end - gap_start
        if length < clearance + 1.0:
            continue
        if rng.random() >= min(1.0, cfg.unsuccessful_rate_per_min / 60.0 * length):
            continue
        is_continue = has_prev_turn and rng.random() < 0.5
        dur = rng.uniform(0.5, 1.5)
        if is_continue:
            end = gap_start + clearance + rng.uniform(0.0, 0.5)
        else:
            end = rng.uniform(gap_start + clearance, gap_end - 0.3)
        end = round(end * 1000.0) / 1000.0  # annotation files carry whole ms
        start = round((end - dur) * 1000.0) / 1000.0
        label = CaseLabel.INTS_CONTINUE if is_continue else CaseLabel.INTS_START
        out.append((start, end, label))
    return out


def _accel_trace(cfg: ScenarioConfig, events, rng) -> tuple[np.ndarray, np.ndarray]:
    """times, values with baseline noise plus one burst before each event."""
    n = int(round(cfg.duration_s * cfg.accel_rate_hz))
    times = np.arange(n) / cfg.accel_rate_hz
    values = rng.normal(0.0, cfg.noise_std, size=(n, 3))
    values[:, 2] += cfg.gravity
    for axis in range(3):
        amplitude = rng.uniform(0.0, cfg.drift_std_ratio * cfg.noise_std)
        period = rng.uniform(120.0, 600.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        values[:, axis] += amplitude * np.sin(2.0 * np.pi * times / period + phase)

    amp = cfg.effect_strength * cfg.noise_std
    for event_t in events:
        lo, hi = event_t - cfg.effect_lead_s, event_t - cfg.burst_s
        burst_start = rng.uniform(lo, hi) if hi > lo else lo
        axis = int(rng.integers(3))
        sign = -1.0 if rng.random() < 0.5 else 1.0
        if burst_start < 0:
            continue
        i0 = int(np.ceil(burst_start * cfg.accel_rate_hz - 1e-9))
        i1 = min(n, int(np.floor((burst_start + cfg.burst_s) * cfg.accel_rate_hz)) + 1)
        if i0 >= i1:
            continue
        tau = times[i0:i1] - burst_start
        values[i0:i1, axis] += sign * amp * np.sin(np.pi * tau / cfg.burst_s)
    return times, values


def generate_scenario(cfg: ScenarioConfig) -> Scenario:
    """Deterministic in cfg.seed; participants use independent streams."""
    tracks, series, docs = [], [], []
    onsets_map: dict[str, list[float]] = {}
    planted_map: dict[str, list[tuple[float, CaseLabel]]] = {}
    n_frames = int(round(cfg.duration_s * cfg.vad_rate_hz))
    if n_frames < 1:
        raise ConfigError("duration too short for one VAD frame")

    for idx, pid in enumerate(cfg.participant_ids()):
        rng = rng_for(cfg.seed, "participant", idx)
        turns = _draw_turns(cfg, rng)
        annotations = _plant_annotations(cfg, turns, rng)

        frames = np.zeros(n_frames, dtype=np.uint8)
        for start, stop in turns:
            frames[start:stop] = 1
        tracks.append(VadTrack(pid, cfg.vad_rate_hz, frames, 0.0))

        onsets = [start / cfg.vad_rate_hz for start, _ in turns]
        events = onsets + [end for _, end, _ in annotations]
        times, values = _accel_trace(cfg, events, rng)
        series.append(AccelSeries(pid, cfg.accel_rate_hz, 0.0, times, values))

        cue_rng_labels = [CANONICAL_CUES[int(rng.integers(len(CANONICAL_CUES)))] for _ in annotations]
        tiers = {
            name: AnnotationTier(
                name,
                tuple((s, e, "") for s, e, lab in annotations if TIER_NAMES[lab] == name),
            )
            for name in TIER_NAMES.values()
        }
        tiers[CUE_TIER] = AnnotationTier(
            CUE_TIER,
            tuple((s, e, cue) for (s, e, _), cue in zip(annotations, cue_rng_labels)),
        )
        docs.append(AnnotationDocument(participant_id=pid, tiers=tiers))

        onsets_map[pid] = onsets
        planted_map[pid] = [(end, lab) for _, end, lab in annotations]

    return Scenario(
        config=cfg,
        vad_tracks=tuple(tracks),
        accel_series=tuple(series),
        annotations=tuple(docs),
        onsets=onsets_map,
        planted=planted_map,
    )


def scenario_manifest(cfg: ScenarioConfig) -> dict:
    """Ground-truth counts per participant plus totals."""
    scenario = generate_scenario(cfg)
    per = {}
    for pid in cfg.participant_ids():
        planted = scenario.planted[pid]
        per[pid] = {
            "onsets": len(scenario.onsets[pid]),
            "ints_start": sum(1 for _, lab in planted if lab is CaseLabel.INTS_START),
            "ints_continue": sum(1 for _, lab in planted if lab is CaseLabel.INTS_CONTINUE),
        }
    totals = {key: sum(p[key] for p in per.values()) for key in ("onsets", "ints_start", "ints_continue")}
    return {"participants": per, "totals": totals}


def write_scenario(scenario: Scenario, out_dir) -> dict[str, list[Path]]:
    """Emit vad/, accel/ and annotations/ files; byte-stable per seed."""
    out_dir = Path(out_dir)
    written: dict[str, list[Path]] = {"vad": [], "accel": [], "annotations": []}
    for sub in written:
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    for track in scenario.vad_tracks:
        path = out_dir / "vad" / f"{track.participant_id}.vad"
        write_vad(track, path)
        written["vad"].append(path)
    for series in scenario.accel_series:
        path = out_dir / "accel" / f"{series.participant_id}.accel"
        write_accel(series, path)
        written["accel"].append(path)
    for doc in scenario.annotations:
        path = out_dir / "annotations" / f"{doc.participant_id}.eaf"
        write_eaf(doc, path)
        written["annotations"].append(path)
    return written
