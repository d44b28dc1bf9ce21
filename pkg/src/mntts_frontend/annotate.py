"""Automatic prosody annotation from paired audio and text.

Given a tokenized utterance and its recording, word boundaries whose
inter-word gap is long enough are labeled with increasingly strong break
levels; orthographic punctuation promotes a boundary to at least a prosodic
word break even without an audible pause. Word timing comes from an
imported forced alignment when one exists, otherwise from a proportional
estimate laid out around the detected pauses.

This is a deliberately transparent, signal-based annotator behind the same
audio+text -> annotation contract a neural annotator would fill.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import audio as audio_mod
from .audio import PauseTrack, WavAudio, detect_pauses, frame_energy, read_wav
from .errors import ToolkitError
from .prosody import BreakLevel, ProsodyAnnotation, Utterance, tokenize


class AlignmentError(ToolkitError):
    """Alignment file unusable: parse failure, bad ordering, count mismatch."""


class DegenerateAudioError(ToolkitError):
    """Pauses cover the entire recording; no speech time to distribute."""


class InconsistentAlignmentError(ToolkitError):
    """Alignment does not fit the utterance or the audio."""


@dataclass(frozen=True)
class BreakThresholds:
    """Minimum inter-word gap, in seconds, for each break level."""

    b3_min: float = 0.300
    b2_min: float = 0.100
    b1_min: float = 0.030

    def __post_init__(self):
        if not (0 <= self.b1_min < self.b2_min < self.b3_min):
            raise ToolkitError(
                f"need 0 <= b1_min < b2_min < b3_min, got "
                f"{self.b1_min}/{self.b2_min}/{self.b3_min}"
            )


@dataclass(frozen=True)
class WordAlignment:
    """Per-word (start, end) spans in seconds, ordered and non-overlapping."""

    spans: tuple[tuple[float, float], ...]

    def __post_init__(self):
        previous_end = 0.0
        for i, (start, end) in enumerate(self.spans):
            if start < 0 or start >= end:
                raise AlignmentError(f"span {i} ({start}, {end}) is not a forward interval")
            if start < previous_end:
                raise AlignmentError(f"span {i} starts before span {i - 1} ends")
            previous_end = end


def estimate_alignment(
    utterance: Utterance, audio: WavAudio, pauses: PauseTrack
) -> WordAlignment:
    """Approximate word spans without a forced aligner.

    Non-pause time is split among the words proportionally to their
    character counts. Each detected pause is assigned, left to right, to the
    nearest proportional word boundary not already taken; pauses left over
    (more pauses than boundaries) are absorbed into the neighboring word
    spans.
    """
    duration = audio.duration
    if pauses.total_pause >= duration:
        raise DegenerateAudioError("pauses cover the entire recording")
    n = len(utterance.words)
    total_chars = sum(utterance.char_counts)
    boundary_fractions = []
    cumulative = 0
    for count in utterance.char_counts[:-1]:
        cumulative += count
        boundary_fractions.append(cumulative / total_chars)

    # pauses -> internal boundaries, monotonically, at most one per boundary
    assigned: dict[int, tuple[float, float]] = {}
    next_free = 0
    for start, end in pauses.pauses:
        if next_free >= len(boundary_fractions):
            break
        midpoint_fraction = ((start + end) / 2) / duration
        best = min(
            range(next_free, len(boundary_fractions)),
            key=lambda j: (abs(boundary_fractions[j] - midpoint_fraction), j),
        )
        assigned[best] = (start, end)
        next_free = best + 1

    speech_total = duration - sum(end - start for start, end in assigned.values())
    spans = []
    t = 0.0
    for i, count in enumerate(utterance.char_counts):
        length = speech_total * count / total_chars
        spans.append((t, t + length))
        t += length
        if i in assigned:
            start, end = assigned[i]
            t += end - start
    # guard against float drift at the file end
    last_start, _ = spans[-1]
    spans[-1] = (last_start, min(duration, t))
    return WordAlignment(tuple(spans))


def load_alignment(path: str | Path, utterance: Utterance) -> WordAlignment:
    """Import a forced alignment TSV: ``word<TAB>start<TAB>end`` per row."""
    path = Path(path)
    spans = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise AlignmentError(f"{path}:{line_no}: expected 3 tab-separated fields")
            try:
                start, end = float(parts[1]), float(parts[2])
            except ValueError:
                raise AlignmentError(f"{path}:{line_no}: non-numeric span") from None
            spans.append((start, end))
    if len(spans) != len(utterance.words):
        raise AlignmentError(
            f"{path}: {len(spans)} aligned words for a {len(utterance.words)}-word utterance"
        )
    return WordAlignment(tuple(spans))


def annotate(
    utterance: Utterance,
    audio: WavAudio,
    alignment: WordAlignment,
    thresholds: BreakThresholds = BreakThresholds(),
) -> ProsodyAnnotation:
    """Label every word boundary from the aligned inter-word gaps.

    Boundary i gets B3/B2/B1 by comparing the gap before word i+1 against
    the thresholds; punctuation after word i promotes the boundary to at
    least B1. The utterance-final boundary is B3 unconditionally.
    """
    if len(alignment.spans) != len(utterance.words):
        raise InconsistentAlignmentError(
            f"{len(alignment.spans)} spans for {len(utterance.words)} words"
        )
    if alignment.spans[-1][1] > audio.duration + 1e-6:
        raise InconsistentAlignmentError(
            f"alignment ends at {alignment.spans[-1][1]:.3f}s in a "
            f"{audio.duration:.3f}s recording"
        )
    breaks = []
    for i in range(len(utterance.words) - 1):
        gap = alignment.spans[i + 1][0] - alignment.spans[i][1]
        if gap >= thresholds.b3_min:
            level = BreakLevel.B3
        elif gap >= thresholds.b2_min:
            level = BreakLevel.B2
        elif gap >= thresholds.b1_min or utterance.puncts[i]:
            level = BreakLevel.B1
        else:
            level = BreakLevel.B0
        breaks.append(level)
    breaks.append(BreakLevel.B3)
    return ProsodyAnnotation(utterance, tuple(breaks))


@dataclass(frozen=True)
class RecordError:
    record_id: str
    stage: str
    message: str


@dataclass(frozen=True)
class AnnotateSettings:
    """Knobs for corpus annotation; defaults match the audio module."""

    thresholds: BreakThresholds = BreakThresholds()
    frame_length: float = audio_mod.DEFAULT_FRAME_LENGTH
    hop: float = audio_mod.DEFAULT_HOP
    threshold_db: float = audio_mod.DEFAULT_THRESHOLD_DB
    min_pause: float = audio_mod.DEFAULT_MIN_PAUSE
    alignment_policy: str = "auto"  # auto | file | estimate
    alignment_dir: str = "align"

    def __post_init__(self):
        if self.alignment_policy not in ("auto", "file", "estimate"):
            raise ToolkitError(f"unknown alignment policy {self.alignment_policy!r}")


def _alignment_path(wav_path: Path, record_id: str, settings: AnnotateSettings) -> Path:
    return wav_path.parent.parent / settings.alignment_dir / f"{record_id}.tsv"


def annotate_record(
    record_id: str, text: str, wav_path: str | Path, settings: AnnotateSettings
) -> ProsodyAnnotation:
    """Annotate one text+recording pair. Raises on any stage failure."""
    wav_path = Path(wav_path)
    utterance = tokenize(text)
    audio = read_wav(wav_path)
    track = frame_energy(audio, settings.frame_length, settings.hop)
    pauses = detect_pauses(track, settings.threshold_db, settings.min_pause)
    align_file = _alignment_path(wav_path, record_id, settings)
    if settings.alignment_policy == "file" or (
        settings.alignment_policy == "auto" and align_file.exists()
    ):
        alignment = load_alignment(align_file, utterance)
    else:
        alignment = estimate_alignment(utterance, audio, pauses)
    return annotate(utterance, audio, alignment, settings.thresholds)


def annotate_corpus(
    records: Iterable[tuple[str, str, str | Path]],
    settings: AnnotateSettings = AnnotateSettings(),
    jobs: int = 1,
) -> tuple[list[tuple[str, ProsodyAnnotation]], list[RecordError]]:
    """Annotate (id, text, wav path) records, isolating per-record failures.

    Returns annotations in input order plus an error entry for every record
    that failed; one bad record never aborts the batch.
    """
    records = list(records)

    def run(record):
        record_id, text, wav_path = record
        try:
            return record_id, annotate_record(record_id, text, wav_path, settings), None
        except ToolkitError as exc:
            return record_id, None, RecordError(record_id, _stage_of(exc), str(exc))
        except OSError as exc:
            return record_id, None, RecordError(record_id, "read", str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, records))
    else:
        results = [run(r) for r in records]

    annotations = [(rid, ann) for rid, ann, err in results if err is None]
    failures = [err for _, _, err in results if err is not None]
    return annotations, failures


_STAGES = [
    ("tokenize", ("EmptyInputError",)),
    ("read", ("NotRiffError", "UnsupportedCodecError", "TruncatedDataError")),
    ("energy", ("FramingError", "EmptyTrackError")),
    ("align", ("AlignmentError", "DegenerateAudioError")),
    ("annotate", ("InconsistentAlignmentError",)),
]


def _stage_of(exc: ToolkitError) -> str:
    name = type(exc).__name__
    for stage, names in _STAGES:
        if name in names:
            return stage
    return "annotate"
