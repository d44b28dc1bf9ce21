"""Corpus ingestion, validation, and character-level label export.

Layout on disk: ``<root>/{train,valid,test}/metadata.csv`` with
``id<DELIM>text`` lines (``|`` by default), plus ``<root>/{train,valid}/
wavs/<id>.wav``. The test split ships text only. Exported training labels
are per grapheme cluster: a word's boundary break sits on its last
character, everything else is B0, so the expansion is lossless and
invertible.

Exports always embed ground-truth annotations produced from the audio,
never classifier predictions; the acoustic model downstream must train on
real break values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import ToolkitError
from .prosody import BreakLevel, ProsodyAnnotation, grapheme_clusters, length_regulate

SPLITS = ("train", "valid", "test")
EXPECTED_COUNTS = {"train": 1000, "valid": 298, "test": 200}
DEFAULT_DELIMITER = "|"


class MissingFileError(ToolkitError):
    """Referenced WAV files are absent."""


class DuplicateIdError(ToolkitError):
    """A record id appears more than once within a split."""


class MalformedLineError(ToolkitError):
    """A metadata line does not match ``id<DELIM>text``."""


@dataclass(frozen=True)
class DatasetRecord:
    record_id: str
    text: str
    wav_path: Path | None  # None for the test split


@dataclass(frozen=True)
class DatasetSplit:
    name: str
    records: tuple[DatasetRecord, ...]

    def __len__(self) -> int:
        return len(self.records)


def load_split(
    root: str | Path, name: str, delimiter: str = DEFAULT_DELIMITER
) -> DatasetSplit:
    """Load one split, checking id uniqueness and WAV presence.

    Lines split on the first delimiter only, so texts may contain it.
    """
    if name not in SPLITS:
        raise ToolkitError(f"unknown split {name!r}, expected one of {SPLITS}")
    root = Path(root)
    metadata = root / name / "metadata.csv"
    if not metadata.is_file():
        raise MissingFileError(f"{metadata}: no such file")
    wav_dir = root / name / "wavs"
    has_audio = name in ("train", "valid")
    records = []
    seen = set()
    missing = []
    with open(metadata, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if delimiter not in line:
                raise MalformedLineError(
                    f"{metadata}:{line_no}: no {delimiter!r} delimiter"
                )
            record_id, text = line.split(delimiter, 1)
            record_id = record_id.strip()
            if not record_id or not text.strip():
                raise MalformedLineError(f"{metadata}:{line_no}: empty id or text")
            if record_id in seen:
                raise DuplicateIdError(f"{metadata}:{line_no}: duplicate id {record_id!r}")
            seen.add(record_id)
            wav_path = None
            if has_audio:
                wav_path = wav_dir / f"{record_id}.wav"
                if not wav_path.is_file():
                    missing.append(record_id)
            records.append(DatasetRecord(record_id, text.strip(), wav_path))
    if missing:
        raise MissingFileError(
            f"{wav_dir}: missing WAV files for ids: {', '.join(missing)}"
        )
    return DatasetSplit(name, tuple(records))


@dataclass(frozen=True)
class CorpusReport:
    counts: dict[str, int]
    expected: dict[str, int]

    @property
    def matches_expected(self) -> bool:
        return self.counts == self.expected

    @property
    def flag(self) -> str:
        return "OK" if self.matches_expected else "MISMATCH"

    def to_dict(self) -> dict:
        return {"counts": self.counts, "expected": self.expected, "flag": self.flag}


def validate_corpus(root: str | Path, delimiter: str = DEFAULT_DELIMITER) -> CorpusReport:
    """Read-only audit: per-split counts compared against the official sizes.

    A count mismatch is only flagged, not an error, so subsets and fixtures
    validate cleanly. Structural problems (missing files, duplicate ids)
    propagate as errors.
    """
    counts = {}
    for name in SPLITS:
        counts[name] = len(load_split(root, name, delimiter))
    return CorpusReport(counts, dict(EXPECTED_COUNTS))


@dataclass(frozen=True)
class ExportRecord:
    record_id: str
    chars: tuple[str, ...]
    breaks: tuple[int, ...]
    word_index: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.record_id,
            "chars": list(self.chars),
            "breaks": list(self.breaks),
            "word_index": list(self.word_index),
        }


def export_record(record_id: str, annotation: ProsodyAnnotation) -> ExportRecord:
    """Expand a word-level annotation to character level.

    The word's break label lands on its last grapheme cluster; earlier
    clusters get B0. Word indices expand with the same regulator used for
    any other word-level payload.
    """
    utt = annotation.utterance
    chars: list[str] = []
    breaks: list[int] = []
    for word, level in zip(utt.words, annotation.breaks):
        clusters = grapheme_clusters(word)
        chars.extend(clusters)
        breaks.extend([int(BreakLevel.B0)] * (len(clusters) - 1))
        breaks.append(int(level))
    word_index = length_regulate(list(range(len(utt.words))), utt.char_counts)
    return ExportRecord(record_id, tuple(chars), tuple(breaks), tuple(word_index))


@dataclass(frozen=True)
class ExportFailure:
    record_id: str
    message: str


def export_training_labels(
    split: DatasetSplit,
    annotations: Mapping[str, ProsodyAnnotation],
) -> tuple[list[ExportRecord], list[ExportFailure]]:
    """Build character-level label records for every annotated id.

    Records come out in split order. Ids without an annotation become
    failure entries; the batch continues.
    """
    exported = []
    failures = []
    for record in split.records:
        annotation = annotations.get(record.record_id)
        if annotation is None:
            failures.append(
                ExportFailure(record.record_id, "no annotation for this id")
            )
            continue
        exported.append(export_record(record.record_id, annotation))
    return exported, failures


def write_labels_jsonl(fh: IO[str], records: Iterable[ExportRecord]) -> int:
    n = 0
    for record in records:
        json.dump(record.to_dict(), fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")
        n += 1
    return n
