"""Binary voice-activity tracks: parsing, cleaning, and case-window extraction.

A track is a fixed-rate sequence of 0/1 speaking-status frames for one
participant.  Cleaning happens in a fixed order: short pauses are merged
into the surrounding speech first, then short turns are discarded.  The
order matters; see ``clean``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError

DEFAULT_PAUSE_S = 1.5
DEFAULT_TURN_S = 1.5


class CaseLabel(str, enum.Enum):
    """Label attached to an extracted sample window."""

    SUCCESSFUL = "successful"
    INTS_START = "ints_start"
    INTS_CONTINUE = "ints_continue"
    NEGATIVE = "negative"  # bookkeeping only, for sampled negative windows

    def __str__(self) -> str:  # keeps manifests compact
        return self.value


@dataclass(frozen=True)
class CaseWindow:
    """Half-open window [start_s, end_s) attributed to one participant."""

    participant_id: str
    start_s: float
    end_s: float
    label: CaseLabel

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError(f"empty window [{self.start_s}, {self.end_s})")

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class VadTrack:
    """Fixed-rate binary speaking-status sequence for one participant."""

    participant_id: str
    rate_hz: float
    frames: np.ndarray = field(repr=False)
    t0_s: float = 0.0

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.uint8)
        object.__setattr__(self, "frames", frames)
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        if frames.size == 0:
            raise ValueError("empty track")
        if not np.isin(frames, (0, 1)).all():
            raise ValueError("frames must be 0 or 1")
        frames.setflags(write=False)

    @property
    def duration_s(self) -> float:
        return len(self.frames) / self.rate_hz

    @property
    def extent(self) -> tuple[float, float]:
        return (self.t0_s, self.t0_s + self.duration_s)


def _parse_header(line: str, path, lineno: int) -> dict:
    if not line.startswith("#"):
        raise DataFormatError(f"{path}:{lineno}: missing '# key=value' header line")
    fields = {}
    for tok in line[1:].split():
        if "=" not in tok:
            raise DataFormatError(f"{path}:{lineno}: malformed header token {tok!r}")
        key, val = tok.split("=", 1)
        fields[key] = val
    return fields


def _header_floats(fields: dict, names: tuple[str, ...], path) -> dict:
    out = {}
    for name in names:
        if name not in fields:
            raise DataFormatError(f"{path}:1: header missing {name!r}")
        try:
            out[name] = float(fields[name])
        except ValueError:
            raise DataFormatError(f"{path}:1: header {name}={fields[name]!r} is not a number")
    return out


def load_vad(path) -> VadTrack:
    """Parse a VAD text file.

    Format: header ``# participant=<id> rate_hz=<float> t0_s=<float>``
    followed by one frame value (0 or 1) per line.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}:1: empty file")
    header = _parse_header(lines[0], path, 1)
    if "participant" not in header:
        raise DataFormatError(f"{path}:1: header missing 'participant'")
    nums = _header_floats(header, ("rate_hz", "t0_s"), path)
    frames = []
    for lineno, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if text == "0":
            frames.append(0)
        elif text == "1":
            frames.append(1)
        else:
            raise DataFormatError(f"{path}:{lineno}: non-binary frame value {text!r}")
    if not frames:
        raise DataFormatError(f"{path}: empty track (no frame lines)")
    return VadTrack(
        participant_id=header["participant"],
        rate_hz=nums["rate_hz"],
        frames=np.array(frames, dtype=np.uint8),
        t0_s=nums["t0_s"],
    )


def write_vad(track: VadTrack, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# participant={track.participant_id} rate_hz={track.rate_hz:g} t0_s={track.t0_s:g}\n")
        fh.write("\n".join(str(int(v)) for v in track.frames))
        fh.write("\n")


def _runs(frames: np.ndarray) -> list[tuple[int, int, int]]:
    """(value, start, stop) for each maximal constant run, stop exclusive."""
    boundaries = np.flatnonzero(np.diff(frames)) + 1
    edges = np.concatenate(([0], boundaries, [len(frames)]))
    return [(int(frames[edges[i]]), int(edges[i]), int(edges[i + 1])) for i in range(len(edges) - 1)]


def merge_short_pauses(track: VadTrack, threshold_s: float = DEFAULT_PAUSE_S) -> VadTrack:
    """Rewrite interior 0-runs strictly shorter than threshold_s to 1.

    Leading and trailing silence is never touched: a pause is only a pause
    when speech bounds it on both sides.  Idempotent.
    """
    if threshold_s < 0:
        raise ValueError("threshold_s must be >= 0")
    frames = np.array(track.frames, dtype=np.uint8)
    runs = _runs(frames)
    for i, (value, start, stop) in enumerate(runs):
        if value != 0 or i == 0 or i == len(runs) - 1:
            continue
        if (stop - start) / track.rate_hz < threshold_s:
            frames[start:stop] = 1
    return VadTrack(track.participant_id, track.rate_hz, frames, track.t0_s)


def drop_short_turns(track: VadTrack, threshold_s: float = DEFAULT_TURN_S) -> VadTrack:
    """Rewrite 1-runs strictly shorter than threshold_s to 0.  Idempotent."""
    if threshold_s < 0:
        raise ValueError("threshold_s must be >= 0")
    frames = np.array(track.frames, dtype=np.uint8)
    for value, start, stop in _runs(frames):
        if value == 1 and (stop - start) / track.rate_hz < threshold_s:
            frames[start:stop] = 0
    return VadTrack(track.participant_id, track.rate_hz, frames, track.t0_s)


def clean(track: VadTrack, pause_s: float = DEFAULT_PAUSE_S, turn_s: float = DEFAULT_TURN_S) -> VadTrack:
    """Full cleaning pass: merge short pauses, then drop short turns.

    The order is load-bearing: on [1,0,1] at 1 Hz with 1.5 s thresholds,
    merge-first yields [1,1,1] while drop-first would yield [0,0,0].
    """
    return drop_short_turns(merge_short_pauses(track, pause_s), turn_s)


def extract_onsets(track: VadTrack) -> np.ndarray:
    """Times (seconds) of every 0-to-1 transition.

    A track that starts with a 1-frame does not yield an onset at index 0:
    there is no preceding silence to transition from.
    """
    frames = track.frames
    idx = np.flatnonzero((frames[1:] == 1) & (frames[:-1] == 0)) + 1
    return track.t0_s + idx / track.rate_hz


def speaking_intervals(track: VadTrack) -> list[tuple[float, float]]:
    """Half-open (start_s, end_s) for each maximal 1-run."""
    out = []
    for value, start, stop in _runs(track.frames):
        if value == 1:
            out.append((track.t0_s + start / track.rate_hz, track.t0_s + stop / track.rate_hz))
    return out


def successful_case_windows(
    onsets,
    window_s: float,
    *,
    participant_id: str,
    t0_s: float = 0.0,
) -> list[CaseWindow]:
    """One [t - window_s, t) window per onset t, labelled SUCCESSFUL.

    Onsets without window_s seconds of history before them (relative to
    t0_s) are dropped rather than padded.
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    out = []
    for t in np.asarray(onsets, dtype=float):
        start = t - window_s
        if start < t0_s:
            continue
        out.append(CaseWindow(participant_id, float(start), float(t), CaseLabel.SUCCESSFUL))
    return out
