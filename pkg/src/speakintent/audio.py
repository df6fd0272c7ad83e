"""High-pass filtering and amplification of short audio clips.

The filter is a 4th-order maximally-flat high pass realized as two
cascaded biquad sections, applied causally from zero initial state, so a
tone at the cutoff frequency comes out 3 dB down and low-frequency
voice content falls off at 24 dB per octave.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import butter, sosfilt

from .errors import DataFormatError

DEFAULT_GAIN = 20.0


@dataclass(frozen=True)
class AudioClip:
    """Mono audio, samples in [-1, 1]."""

    sample_rate_hz: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if samples.ndim != 1:
            raise ValueError("samples must be 1-d (mono)")
        if not np.isfinite(samples).all():
            raise ValueError("non-finite samples")
        samples.setflags(write=False)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples ** 2)))


def read_wav(path) -> AudioClip:
    """Read a PCM16 or float32 WAV; stereo is downmixed by averaging."""
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except Exception as exc:
        raise DataFormatError(f"{path}: unreadable WAV ({exc})") from None
    if data.ndim == 2:
        data = data.mean(axis=1)
    if data.dtype == np.int16:
        samples = data.astype(float) / 32768.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(float)
    else:
        raise DataFormatError(f"{path}: unsupported WAV sample format {data.dtype}")
    return AudioClip(sample_rate_hz=int(rate), samples=samples)


def write_wav(clip: AudioClip, path, *, fmt: str = "int16") -> None:
    path = Path(path)
    clipped = np.clip(clip.samples, -1.0, 1.0)
    if fmt == "int16":
        payload = np.clip(np.round(clipped * 32768.0), -32768, 32767).astype(np.int16)
    elif fmt == "float32":
        payload = clipped.astype(np.float32)
    else:
        raise ValueError(f"unsupported format {fmt!r}")
    wavfile.write(path, clip.sample_rate_hz, payload)


def high_pass(clip: AudioClip, cutoff_hz: float) -> AudioClip:
    """4th-order high pass with the -3 dB point at cutoff_hz."""
    nyquist = clip.sample_rate_hz / 2.0
    if not 0 < cutoff_hz < nyquist:
        raise ValueError(f"cutoff must be in (0, {nyquist}) Hz, got {cutoff_hz}")
    sos = butter(4, cutoff_hz, btype="highpass", fs=clip.sample_rate_hz, output="sos")
    filtered = sosfilt(sos, clip.samples)
    return AudioClip(sample_rate_hz=clip.sample_rate_hz, samples=filtered)


def amplify(clip: AudioClip, gain: float = DEFAULT_GAIN) -> AudioClip:
    """Multiply by gain and hard-clip to [-1, 1]."""
    if gain <= 0:
        raise ValueError("gain must be positive")
    boosted = np.clip(clip.samples * gain, -1.0, 1.0)
    return AudioClip(sample_rate_hz=clip.sample_rate_hz, samples=boosted)


def clipped_count(clip: AudioClip, gain: float) -> int:
    return int(np.sum(np.abs(clip.samples * gain) > 1.0))


def process_clip(path_in, path_out, cutoff_hz: float, gain: float = DEFAULT_GAIN) -> dict:
    """Read, high-pass, amplify, write, and report RMS / clipping stats."""
    clip = read_wav(path_in)
    filtered = high_pass(clip, cutoff_hz)
    n_clipped = clipped_count(filtered, gain)
    out = amplify(filtered, gain)
    write_wav(out, path_out)
    return {
        "input_rms": clip.rms(),
        "filtered_rms": filtered.rms(),
        "output_rms": out.rms(),
        "clipped_samples": n_clipped,
        "cutoff_hz": float(cutoff_hz),
        "gain": float(gain),
        "sample_rate_hz": clip.sample_rate_hz,
        "n_samples": len(clip.samples),
    }


def tone(freq_hz: float, duration_s: float, sample_rate_hz: int, amplitude: float = 1.0) -> AudioClip:
    """Pure sine tone, handy for response measurements and demos."""
    t = np.arange(int(round(duration_s * sample_rate_hz))) / sample_rate_hz
    return AudioClip(sample_rate_hz=sample_rate_hz, samples=amplitude * np.sin(2 * np.pi * freq_hz * t))
