"""PCM WAV decoding, frame energies, and silence/pause detection.

The pause detector is the acoustic evidence source for prosodic break
annotation: frames whose RMS energy sits near the track's own noise floor
are silent, and maximal silent runs long enough to count as pauses are
returned as intervals. Thresholding is relative to the per-track floor, so
recordings at different gains behave identically.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ToolkitError

RMS_FLOOR = 1e-8
RMS_FLOOR_DB = 20.0 * np.log10(RMS_FLOOR)  # -160 dB

DEFAULT_FRAME_LENGTH = 0.025
DEFAULT_HOP = 0.010
DEFAULT_THRESHOLD_DB = 10.0
DEFAULT_MIN_PAUSE = 0.080


class NotRiffError(ToolkitError):
    """File is not a RIFF/WAVE container."""


class UnsupportedCodecError(ToolkitError):
    """WAV data is not 16-bit integer PCM, mono or stereo."""


class TruncatedDataError(ToolkitError):
    """WAV chunks end before their declared size."""


class FramingError(ToolkitError):
    """Invalid frame length / hop combination."""


class EmptyTrackError(ToolkitError):
    """Energy track has no frames."""


@dataclass(frozen=True)
class WavAudio:
    """Mono audio normalized to [-1, 1]."""

    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ToolkitError(f"sample rate {self.sample_rate} <= 0")
        peak = float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0
        if peak > 1.0:
            raise ToolkitError(f"samples exceed [-1, 1] (peak {peak:.4f})")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class EnergyTrack:
    """Per-frame RMS energies in dBFS (always <= 0)."""

    frame_length: float
    hop: float
    energies: np.ndarray
    duration: float  # of the source audio, seconds


@dataclass(frozen=True)
class PauseTrack:
    """Detected silence intervals, sorted and non-overlapping."""

    pauses: tuple[tuple[float, float], ...]
    duration: float

    def __post_init__(self):
        last_end = 0.0
        for start, end in self.pauses:
            if not (0.0 <= start < end <= self.duration + 1e-9):
                raise ToolkitError(f"pause ({start}, {end}) outside [0, {self.duration}]")
            if start < last_end:
                raise ToolkitError("pauses overlap or are unsorted")
            last_end = end

    @property
    def total_pause(self) -> float:
        return sum(end - start for start, end in self.pauses)


def read_wav(path: str | Path) -> WavAudio:
    """Decode a RIFF/WAVE file holding 16-bit PCM, mono or stereo.

    Stereo is downmixed by averaging the channels; integer samples are
    scaled by 1/32768 into [-1, 1]. No resampling is performed.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotRiffError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    payload = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset : offset + 4]
        (chunk_size,) = struct.unpack_from("<I", data, offset + 4)
        body_start = offset + 8
        body_end = body_start + chunk_size
        if body_end > len(data):
            raise TruncatedDataError(
                f"{path}: chunk {chunk_id!r} declares {chunk_size} bytes, file ends early"
            )
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise TruncatedDataError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            payload = data[body_start:body_end]
        offset = body_end + (chunk_size & 1)  # chunks are word-aligned
    if fmt is None or payload is None:
        raise TruncatedDataError(f"{path}: missing fmt or data chunk")
    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedCodecError(f"{path}: non-PCM format code {audio_format}")
    if bits != 16:
        raise UnsupportedCodecError(f"{path}: {bits}-bit samples, only 16-bit supported")
    if channels not in (1, 2):
        raise UnsupportedCodecError(f"{path}: {channels} channels, only mono/stereo supported")
    if len(payload) % (2 * channels) != 0:
        raise TruncatedDataError(f"{path}: data chunk is not whole 16-bit frames")
    ints = np.frombuffer(payload, dtype="<i2")
    if channels == 2:
        samples = ints.reshape(-1, 2).mean(axis=1) / 32768.0
    else:
        samples = ints.astype(np.float64) / 32768.0
    return WavAudio(sample_rate, samples)


def write_wav(path: str | Path, sample_rate: int, samples: np.ndarray) -> None:
    """Write mono float samples in [-1, 1] as 16-bit PCM (test/fixture helper)."""
    ints = np.clip(np.asarray(samples) * 32768.0, -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,
        1,
        sample_rate,
        sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    Path(path).write_bytes(header + payload)


def frame_energy(
    audio: WavAudio,
    frame_length: float = DEFAULT_FRAME_LENGTH,
    hop: float = DEFAULT_HOP,
) -> EnergyTrack:
    """RMS energy per frame, in dBFS.

    Frame i covers [i*hop, i*hop + frame_length); the RMS is clamped at 1e-8
    before the log, bounding energies to [-160, 0] dB.
    """
    if not (0 < hop <= frame_length <= audio.duration):
        raise FramingError(
            f"need 0 < hop <= frame_length <= duration, got "
            f"hop={hop}, frame_length={frame_length}, duration={audio.duration:.4f}"
        )
    frame_n = int(round(frame_length * audio.sample_rate))
    hop_n = int(round(hop * audio.sample_rate))
    if frame_n < 1 or hop_n < 1:
        raise FramingError(f"frame or hop below one sample at {audio.sample_rate} Hz")
    windows = np.lib.stride_tricks.sliding_window_view(audio.samples, frame_n)[::hop_n]
    rms = np.sqrt(np.mean(np.square(windows), axis=1))
    energies = 20.0 * np.log10(np.maximum(rms, RMS_FLOOR))
    # store the sample-quantized frame/hop so interval arithmetic stays exact
    return EnergyTrack(
        frame_n / audio.sample_rate, hop_n / audio.sample_rate, energies, audio.duration
    )


def detect_pauses(
    track: EnergyTrack,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    min_pause: float = DEFAULT_MIN_PAUSE,
) -> PauseTrack:
    """Find silence intervals: maximal runs of frames near the noise floor.

    The noise floor is the 5th percentile of the frame energies; frames
    below floor + threshold_db are silent. Runs shorter than min_pause are
    dropped. Interval endpoints are the start of the first silent frame and
    the end (start + frame_length) of the last.

    A track without contrast (max energy within threshold_db of the floor)
    carries no pause evidence and yields no pauses, except digital silence
    pinned at the RMS clamp, which is one full-length pause.
    """
    if len(track.energies) == 0:
        raise EmptyTrackError("no frames in energy track")
    if min_pause < track.hop:
        raise FramingError(f"min_pause {min_pause} < hop {track.hop}")
    energies = track.energies
    floor = float(np.percentile(energies, 5))
    peak = float(np.max(energies))
    if peak - floor <= threshold_db:
        if peak <= RMS_FLOOR_DB + 1e-9:
            silent = np.ones(len(energies), dtype=bool)
        else:
            silent = np.zeros(len(energies), dtype=bool)
    else:
        silent = energies < floor + threshold_db
    pauses = []
    i = 0
    n = len(silent)
    while i < n:
        if not silent[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and silent[j + 1]:
            j += 1
        start = i * track.hop
        end = j * track.hop + track.frame_length
        if end - start >= min_pause:
            pauses.append((start, min(end, track.duration)))
        i = j + 1
    return PauseTrack(tuple(pauses), track.duration)
