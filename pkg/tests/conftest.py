import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mntts_frontend.audio import write_wav
from mntts_frontend.translit import (
    MappingRule,
    MappingTable,
    Script,
    load_mapping_table,
    packaged_table_path,
)

FIXTURES = Path(__file__).parent / "fixtures"


def make_table(source, target, rows):
    """rows: (source, target, position, priority) tuples."""
    return MappingTable(source, target, tuple(MappingRule(*row) for row in rows))


def write_table_tsv(path, source, target, rows):
    lines = [
        f"# source_script: {source}",
        f"# target_script: {target}",
        "source\ttarget\tposition\tpriority",
    ]
    for row in rows:
        lines.append("\t".join(str(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


@pytest.fixture(scope="session")
def latin_traditional():
    return load_mapping_table(packaged_table_path("latin_traditional.tsv"))


@pytest.fixture(scope="session")
def traditional_cyrillic():
    return load_mapping_table(packaged_table_path("traditional_cyrillic.tsv"))


@pytest.fixture
def toy_ab():
    return make_table(
        Script.LATIN,
        Script.TRADITIONAL,
        [("a", "ᠠ", "any", 0), ("b", "ᠪ", "any", 0)],
    )


def tone(duration, sr=16000, amplitude=0.5, freq=440.0):
    t = np.arange(int(round(duration * sr))) / sr
    return amplitude * np.sin(2 * np.pi * freq * t)


def quiet(duration, sr=16000, amplitude=1e-3, seed=0):
    rng = np.random.default_rng(seed)
    return amplitude * rng.uniform(-1.0, 1.0, int(round(duration * sr)))


def tone_silence_signal(segments, sr=16000, seed=0):
    """segments: list of ("tone"|"silence", duration). Returns (samples, silences)."""
    parts = []
    silences = []
    t = 0.0
    for kind, duration in segments:
        if kind == "tone":
            parts.append(tone(duration, sr))
        else:
            parts.append(quiet(duration, sr, seed=seed + len(parts)))
            silences.append((t, t + duration))
        t += duration
    return np.concatenate(parts), silences


def write_corpus(root, splits, sr=16000, wav_seconds=0.5):
    """Create a metadata.csv + wavs layout.

    splits: {"train": [(id, text), ...], ...}. Train/valid records get a
    simple tone WAV unless the text is the sentinel "MISSING" (no file) or
    "BROKEN" (truncated garbage).
    """
    root = Path(root)
    for name, records in splits.items():
        split_dir = root / name
        split_dir.mkdir(parents=True, exist_ok=True)
        lines = []
        for record_id, text in records:
            lines.append(f"{record_id}|{text}")
            if name in ("train", "valid"):
                wav_dir = split_dir / "wavs"
                wav_dir.mkdir(exist_ok=True)
                wav_path = wav_dir / f"{record_id}.wav"
                if text == "MISSING":
                    continue
                if text == "BROKEN":
                    wav_path.write_bytes(b"RIFFxxxx")
                    continue
                write_wav(wav_path, sr, tone(wav_seconds, sr))
        (split_dir / "metadata.csv").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
    return root
