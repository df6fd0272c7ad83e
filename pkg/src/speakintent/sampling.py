"""Positive/negative sample construction for the five evaluation setups.

Negatives are uniform random windows rejected against an exclusion set;
the unsuccessful-intention setups additionally exclude every successful
case window.  All sampling is driven by caller-provided RNG streams so a
run is a pure function of its seeds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .accel import WindowTensor
from .errors import DataFormatError, SamplingError
from .intervals import IntervalSet
from .vad import CaseLabel, CaseWindow, VadTrack, speaking_intervals

MAX_ATTEMPTS = 10_000


class Experiment(enum.Enum):
    """The five evaluation setups, in reporting order."""

    ALL = "all"
    SUCCESSFUL = "successful"
    UNSUCCESSFUL = "unsuccessful"
    UNSUCCESSFUL_START = "unsuccessful_start"
    UNSUCCESSFUL_CONTINUE = "unsuccessful_continue"

    @property
    def cli_name(self) -> str:
        return self.value.replace("_", "-")

    @classmethod
    def from_name(cls, name: str) -> "Experiment":
        key = name.strip().lower().replace("-", "_")
        for exp in cls:
            if exp.value == key:
                return exp
        raise ValueError(f"unknown experiment {name!r} (choose from {[e.cli_name for e in cls]})")

    @property
    def uses_successful_exclusions(self) -> bool:
        """In the unsuccessful setups negatives also avoid successful cases."""
        return self in (
            Experiment.UNSUCCESSFUL,
            Experiment.UNSUCCESSFUL_START,
            Experiment.UNSUCCESSFUL_CONTINUE,
        )


EXPERIMENT_ORDER = tuple(Experiment)


@dataclass(frozen=True)
class SampleSet:
    """Positive and negative window tensors for one experiment config."""

    positives: tuple[WindowTensor, ...]
    negatives: tuple[WindowTensor, ...]
    window_s: float
    experiment: Experiment
    seed: int

    def __post_init__(self):
        lengths = {t.n_samples for t in self.positives} | {t.n_samples for t in self.negatives}
        if len(lengths) > 1:
            raise ValueError(f"inconsistent tensor lengths {sorted(lengths)}")
        if any(t.label != 1 for t in self.positives) or any(t.label != 0 for t in self.negatives):
            raise ValueError("labels inconsistent with positive/negative role")


def build_positives(
    experiment: Experiment,
    successful: Sequence[CaseWindow],
    annotated: Sequence[CaseWindow],
    vad: VadTrack,
) -> list[CaseWindow]:
    """Select the experiment's positive windows for one participant.

    Annotated windows overlapping any speaking frame of the participant's
    (cleaned) track are discarded; successful windows end exactly at a
    speech onset and the interval is half-open, so they always survive.
    """
    speech = IntervalSet(speaking_intervals(vad))
    surviving = [w for w in annotated if not speech.intersects(w.start_s, w.end_s)]
    if experiment is Experiment.SUCCESSFUL:
        chosen = list(successful)
    elif experiment is Experiment.ALL:
        chosen = list(successful) + surviving
    elif experiment is Experiment.UNSUCCESSFUL:
        chosen = surviving
    elif experiment is Experiment.UNSUCCESSFUL_START:
        chosen = [w for w in surviving if w.label is CaseLabel.INTS_START]
    else:
        chosen = [w for w in surviving if w.label is CaseLabel.INTS_CONTINUE]
    return sorted(chosen, key=lambda w: (w.start_s, w.end_s))


def build_negatives(
    n: int,
    window_s: float,
    allowed: IntervalSet,
    exclusions: IntervalSet,
    rng: np.random.Generator,
    *,
    participant_id: str = "",
    grid_s: float | None = None,
    grid_anchor: float = 0.0,
    max_attempts: int = MAX_ATTEMPTS,
) -> list[CaseWindow]:
    """Sample n non-excluded windows with uniform start times.

    Start times are uniform over the placements that fit inside a single
    allowed interval; each candidate is rejected if it overlaps the
    exclusion set.  When grid_s is given, placements are restricted to
    the sensor sample grid (anchor + k * grid_s): windows are ultimately
    slices of a sampled signal, and off-grid starts would tilt their
    content through resampling.  Deterministic given the rng state.
    Raises SamplingError with the achieved count when placement keeps
    failing.
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    if n < 0:
        raise ValueError("n must be >= 0")

    draw = _continuous_draw(allowed, window_s, rng) if grid_s is None else _grid_draw(
        allowed, window_s, rng, grid_s, grid_anchor
    )
    if draw is None:
        raise SamplingError(f"no feasible placement for {window_s} s windows (achieved 0 of {n})")

    out: list[CaseWindow] = []
    for _ in range(n):
        placed = False
        for _attempt in range(max_attempts):
            start = draw()
            end = start + window_s
            if not exclusions.intersects(start, end):
                out.append(CaseWindow(participant_id, float(start), float(end), CaseLabel.NEGATIVE))
                placed = True
                break
        if not placed:
            raise SamplingError(
                f"negative placement infeasible after {max_attempts} attempts "
                f"(achieved {len(out)} of {n})"
            )
    return out


def _continuous_draw(allowed: IntervalSet, window_s: float, rng):
    """Uniform over real-valued feasible start positions."""
    ranges = [(s, e - window_s) for s, e in allowed if e - s >= window_s]
    if not ranges:
        return None
    lengths = np.array([hi - lo for lo, hi in ranges], dtype=float)
    if lengths.sum() <= 0:
        starts = [lo for lo, _ in ranges]
        return lambda: starts[int(rng.integers(len(starts)))]
    cum = np.cumsum(lengths)

    def draw():
        u = rng.uniform(0.0, cum[-1])
        idx = min(int(np.searchsorted(cum, u, side="right")), len(ranges) - 1)
        return ranges[idx][0] + (u - (cum[idx] - lengths[idx]))

    return draw


def _grid_draw(allowed: IntervalSet, window_s: float, rng, grid_s: float, anchor: float):
    """Uniform over feasible start positions of the form anchor + k*grid_s."""
    eps = 1e-9
    choices = []
    for s, e in allowed:
        if e - s < window_s:
            continue
        k_min = int(np.ceil((s - anchor) / grid_s - eps))
        k_max = int(np.floor((e - window_s - anchor) / grid_s + eps))
        if k_max >= k_min:
            choices.append((k_min, k_max - k_min + 1))
    if not choices:
        return None
    counts = np.array([c for _, c in choices], dtype=np.int64)
    cum = np.cumsum(counts)

    def draw():
        r = int(rng.integers(cum[-1]))
        idx = int(np.searchsorted(cum, r, side="right"))
        k = choices[idx][0] + (r - (cum[idx] - counts[idx]))
        return anchor + k * grid_s

    return draw


def overlap_report(negatives: Sequence[CaseWindow], vad: VadTrack) -> tuple[float, float]:
    """(speech_overlap_fraction, silence_fraction) over negative windows.

    A window counts as speech-overlapping when it intersects at least one
    speaking frame of the track.  The two fractions sum to 1.
    """
    if len(negatives) == 0:
        raise ValueError("empty negative set")
    speech = IntervalSet(speaking_intervals(vad))
    hits = sum(1 for w in negatives if speech.intersects(w.start_s, w.end_s))
    frac = hits / len(negatives)
    return (frac, 1.0 - frac)


def exclusion_set(
    experiment: Experiment,
    positives: Sequence[CaseWindow],
    all_successful: Sequence[CaseWindow],
    *,
    speech: Sequence[tuple[float, float]] = (),
) -> IntervalSet:
    """Intervals a negative window must not touch for this experiment."""
    intervals = [(w.start_s, w.end_s) for w in positives]
    if experiment.uses_successful_exclusions:
        intervals += [(w.start_s, w.end_s) for w in all_successful]
    intervals += [(s, e) for s, e in speech]
    return IntervalSet(intervals)


MANIFEST_HEADER = "participant,experiment,label,start_s,end_s,kind"


def write_manifest(windows: Sequence[tuple[CaseWindow, Experiment]], path) -> None:
    """One line per window: participant,experiment,label,start_s,end_s,kind."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(MANIFEST_HEADER + "\n")
        for w, exp in windows:
            kind = "neg" if w.label is CaseLabel.NEGATIVE else "pos"
            fh.write(
                f"{w.participant_id},{exp.value},{w.label},{w.start_s:.6f},{w.end_s:.6f},{kind}\n"
            )


def read_manifest(path) -> list[tuple[CaseWindow, Experiment]]:
    path = Path(path)
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text == MANIFEST_HEADER:
                continue
            parts = text.split(",")
            if len(parts) != 6:
                raise DataFormatError(f"{path}:{lineno}: expected 6 comma-separated fields")
            pid, exp_name, label, start, end, _kind = parts
            out.append(
                (
                    CaseWindow(pid, float(start), float(end), CaseLabel(label)),
                    Experiment.from_name(exp_name),
                )
            )
    return out
