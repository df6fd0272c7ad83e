"""Accelerometer time series, window slicing, and normalization.

Series carry explicit per-sample timestamps so real recordings with
occasional dropped samples can be ingested; windows are evaluated on a
uniform grid at the declared rate, with small gaps bridged by linear
interpolation and larger ones rejecting the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, SpeakIntentError
from .intervals import IntervalSet
from .vad import CaseLabel

DEFAULT_MAX_GAP_S = 0.25
RATE_TOLERANCE = 0.01
AXES = ("x", "y", "z")


class WindowError(SpeakIntentError):
    """A requested window cannot be materialized from the series."""


class WindowOutOfRangeError(WindowError):
    pass


class WindowGapError(WindowError):
    pass


@dataclass(frozen=True)
class AccelSeries:
    """3-axis accelerometer samples (m/s^2) for one participant."""

    participant_id: str
    rate_hz: float
    t0_s: float
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # shape (n, 3)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        if times.ndim != 1 or values.shape != (len(times), 3):
            raise ValueError("times must be (n,), values (n, 3)")
        if len(times) == 0:
            raise ValueError("empty series")
        if not np.isfinite(values).all() or not np.isfinite(times).all():
            raise ValueError("non-finite sample")
        times.setflags(write=False)
        values.setflags(write=False)

    @property
    def extent(self) -> tuple[float, float]:
        return (float(self.times[0]), float(self.times[-1]))

    @property
    def duration_s(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class WindowTensor:
    """Fixed-length (3, N) window of accelerometer data with a binary label."""

    values: np.ndarray = field(repr=False)
    participant_id: str = ""
    start_s: float = 0.0
    end_s: float = 0.0
    label: int = 0
    case_label: CaseLabel | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != 3:
            raise ValueError(f"values must be (3, N), got {values.shape}")
        if not np.isfinite(values).all():
            raise ValueError("non-finite window values")
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")
        values.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    @property
    def kind(self) -> str:
        return "pos" if self.label == 1 else "neg"


@dataclass(frozen=True)
class AxisStats:
    """Per-axis mean/std used for z-scoring; std of 0 falls back to 1."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(3)
        std = np.asarray(self.std, dtype=float).reshape(3)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", np.where(std > 0, std, 1.0))


def load_accel(path) -> AccelSeries:
    """Parse an accelerometer text file.

    Format: header ``# participant=<id> rate_hz=<float> t0_s=<float>``,
    then one ``t_s,ax,ay,az`` row per sample, timestamps strictly
    increasing and consistent with the declared rate within 1%.
    """
    from .vad import _header_floats, _parse_header  # same header syntax

    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}:1: empty file")
    header = _parse_header(lines[0], path, 1)
    if "participant" not in header:
        raise DataFormatError(f"{path}:1: header missing 'participant'")
    nums = _header_floats(header, ("rate_hz", "t0_s"), path)

    times, rows = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split(",")
        if len(parts) != 4:
            raise DataFormatError(f"{path}:{lineno}: expected t_s,ax,ay,az")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: non-numeric value")
        if not all(np.isfinite(vals)):
            raise DataFormatError(f"{path}:{lineno}: non-finite sample")
        times.append(vals[0])
        rows.append(vals[1:])
    if not times:
        raise DataFormatError(f"{path}: empty series (no sample rows)")

    t = np.asarray(times)
    if len(t) > 1:
        if not (np.diff(t) > 0).all():
            bad = int(np.flatnonzero(np.diff(t) <= 0)[0]) + 3  # +1 header +2 one-based next row
            raise DataFormatError(f"{path}:{bad}: non-monotonic timestamps")
        implied = (len(t) - 1) / (t[-1] - t[0])
        if abs(implied - nums["rate_hz"]) > RATE_TOLERANCE * nums["rate_hz"]:
            raise DataFormatError(
                f"{path}: implied rate {implied:.4g} Hz deviates more than "
                f"{RATE_TOLERANCE:.0%} from declared {nums['rate_hz']:.4g} Hz"
            )
    return AccelSeries(
        participant_id=header["participant"],
        rate_hz=nums["rate_hz"],
        t0_s=nums["t0_s"],
        times=t,
        values=np.asarray(rows),
    )


def write_accel(series: AccelSeries, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"# participant={series.participant_id} rate_hz={series.rate_hz:g} t0_s={series.t0_s:g}\n"
        )
        for t, (ax, ay, az) in zip(series.times, series.values):
            fh.write(f"{t:.6f},{ax:.6f},{ay:.6f},{az:.6f}\n")


def window_sample_count(window_s: float, rate_hz: float) -> int:
    """Samples per window; every tensor in a run must have this length."""
    return int(round(window_s * rate_hz))


def slice_window(
    series: AccelSeries,
    start_s: float,
    end_s: float,
    *,
    label: int = 0,
    case_label: CaseLabel | None = None,
    max_gap_s: float = DEFAULT_MAX_GAP_S,
) -> WindowTensor:
    """Extract [start_s, end_s) as a (3, N) tensor on the series' rate grid.

    Grid points are filled by linear interpolation between the two
    surrounding samples; if those samples are more than max_gap_s apart
    the window is rejected with WindowGapError so the caller can drop it.
    """
    n = window_sample_count(end_s - start_s, series.rate_hz)
    if n < 1:
        raise ValueError("window shorter than one sample period")
    grid = start_s + np.arange(n) / series.rate_hz
    t = series.times
    eps = 1e-9
    if grid[0] < t[0] - eps or grid[-1] > t[-1] + eps:
        raise WindowOutOfRangeError(
            f"window [{start_s}, {end_s}) out of range [{t[0]}, {t[-1]}]"
        )
    if len(t) > 1:
        left = np.clip(np.searchsorted(t, grid, side="right") - 1, 0, len(t) - 2)
        gaps = t[left + 1] - t[left]
        interior = (grid > t[left] + eps) & (grid < t[left + 1] - eps)
        if (gaps[interior] > max_gap_s).any():
            raise WindowGapError(
                f"window [{start_s}, {end_s}) spans a gap larger than {max_gap_s} s"
            )
    cols = np.stack([np.interp(grid, t, series.values[:, ax]) for ax in range(3)])
    return WindowTensor(
        values=cols,
        participant_id=series.participant_id,
        start_s=float(start_s),
        end_s=float(end_s),
        label=label,
        case_label=case_label,
    )


def axis_stats(series: AccelSeries, exclude: IntervalSet | None = None) -> AxisStats:
    """Per-axis mean/std over samples outside the excluded intervals.

    Pass the evaluation hold-out as ``exclude`` so normalization never
    sees test-segment data.
    """
    mask = np.ones(len(series.times), dtype=bool)
    if exclude is not None:
        for s, e in exclude:
            mask &= ~((series.times >= s) & (series.times < e))
    if not mask.any():
        raise ValueError("no samples left to compute stats from")
    sel = series.values[mask]
    return AxisStats(mean=sel.mean(axis=0), std=sel.std(axis=0))


def normalize(tensor: WindowTensor, stats: AxisStats) -> WindowTensor:
    """Per-axis z-score using precomputed stats."""
    z = (tensor.values - stats.mean[:, None]) / stats.std[:, None]
    return WindowTensor(
        values=z,
        participant_id=tensor.participant_id,
        start_s=tensor.start_s,
        end_s=tensor.end_s,
        label=tensor.label,
        case_label=tensor.case_label,
    )


def denormalize(tensor: WindowTensor, stats: AxisStats) -> WindowTensor:
    """Inverse of normalize (affine round trip)."""
    v = tensor.values * stats.std[:, None] + stats.mean[:, None]
    return WindowTensor(
        values=v,
        participant_id=tensor.participant_id,
        start_s=tensor.start_s,
        end_s=tensor.end_s,
        label=tensor.label,
        case_label=tensor.case_label,
    )
