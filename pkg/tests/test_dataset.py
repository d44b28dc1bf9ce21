import io

import pytest

from mntts_frontend.dataset import (
    DuplicateIdError,
    MalformedLineError,
    MissingFileError,
    export_record,
    export_training_labels,
    load_split,
    validate_corpus,
    write_labels_jsonl,
)
from mntts_frontend.prosody import (
    BreakLevel,
    ProsodyAnnotation,
    Utterance,
    length_regulate,
    parse_markup,
)

from conftest import write_corpus


def test_load_split_reads_records(tmp_path):
    root = write_corpus(
        tmp_path, {"train": [("a1", "сайн уу"), ("a2", "би"), ("a3", "та")]}
    )
    split = load_split(root, "train")
    assert len(split) == 3
    assert split.records[0].record_id == "a1"
    assert split.records[0].text == "сайн уу"
    assert split.records[0].wav_path.is_file()


def test_load_split_missing_wav_names_id(tmp_path):
    root = write_corpus(tmp_path, {"train": [("a1", "сайн"), ("a2", "MISSING")]})
    with pytest.raises(MissingFileError, match="a2"):
        load_split(root, "train")


def test_load_split_test_needs_no_wavs(tmp_path):
    root = write_corpus(tmp_path, {"test": [("t1", "сайн"), ("t2", "уу")]})
    split = load_split(root, "test")
    assert len(split) == 2
    assert all(r.wav_path is None for r in split.records)


def test_load_split_malformed_line_number(tmp_path):
    root = write_corpus(tmp_path, {"test": [("t1", "сайн")]})
    metadata = root / "test" / "metadata.csv"
    metadata.write_text("t1|сайн\nno delimiter here\n", encoding="utf-8")
    with pytest.raises(MalformedLineError, match=":2:"):
        load_split(root, "test")


def test_load_split_duplicate_id(tmp_path):
    root = write_corpus(tmp_path, {"test": [("t1", "сайн")]})
    metadata = root / "test" / "metadata.csv"
    metadata.write_text("t1|сайн\nt1|уу\n", encoding="utf-8")
    with pytest.raises(DuplicateIdError, match="t1"):
        load_split(root, "test")


def test_load_split_custom_delimiter(tmp_path):
    root = write_corpus(tmp_path, {"test": [("t1", "x")]})
    metadata = root / "test" / "metadata.csv"
    metadata.write_text("t1\tсайн|уу\n", encoding="utf-8")
    split = load_split(root, "test", delimiter="\t")
    assert split.records[0].text == "сайн|уу"


def test_load_split_text_may_contain_delimiter(tmp_path):
    root = write_corpus(tmp_path, {"test": [("t1", "x")]})
    (root / "test" / "metadata.csv").write_text("t1|сайн|уу\n", encoding="utf-8")
    split = load_split(root, "test")
    assert split.records[0].text == "сайн|уу"


def test_validate_fixture_counts_mismatch_flag(tmp_path):
    root = write_corpus(
        tmp_path,
        {
            "train": [("a1", "сайн"), ("a2", "уу"), ("a3", "та")],
            "valid": [("v1", "би"), ("v2", "ном")],
            "test": [("t1", "ус")],
        },
    )
    report = validate_corpus(root)
    assert report.counts == {"train": 3, "valid": 2, "test": 1}
    assert report.expected == {"train": 1000, "valid": 298, "test": 200}
    assert report.flag == "MISMATCH"


def test_validate_missing_split_is_error(tmp_path):
    root = write_corpus(tmp_path, {"train": [("a1", "сайн")], "test": [("t1", "уу")]})
    with pytest.raises(MissingFileError):
        validate_corpus(root)


def test_export_record_last_character_rule():
    # 2 words x 2 chars, breaks [B1, B3] -> [B0, B1, B0, B3]
    ann = ProsodyAnnotation(
        Utterance.from_words(["аб", "вг"]), (BreakLevel.B1, BreakLevel.B3)
    )
    record = export_record("r1", ann)
    assert record.chars == ("а", "б", "в", "г")
    assert record.breaks == (0, 1, 0, 3)
    assert record.word_index == (0, 0, 1, 1)


def test_export_record_lengths_match_regulator():
    ann = parse_markup("сайн #2 уу, та")
    record = export_record("r1", ann)
    expected_length = sum(ann.utterance.char_counts)
    assert len(record.chars) == len(record.breaks) == len(record.word_index) == expected_length
    assert record.word_index == tuple(
        length_regulate(list(range(3)), ann.utterance.char_counts)
    )


def test_export_exactly_one_label_slot_per_word():
    ann = parse_markup("сайн #1 уу #2 та")
    record = export_record("r1", ann)
    # every word's final character carries its boundary label position
    boundaries = [i for i, w in enumerate(record.word_index) if i + 1 == len(record.word_index) or record.word_index[i + 1] != w]
    assert [record.breaks[i] for i in boundaries] == [1, 2, 3]
    non_boundary = [b for i, b in enumerate(record.breaks) if i not in boundaries]
    assert all(b == 0 for b in non_boundary)


def test_export_training_labels_isolation(tmp_path):
    root = write_corpus(
        tmp_path, {"train": [("a1", "аб вг"), ("a2", "де"), ("a3", "жз")]}
    )
    split = load_split(root, "train")
    annotations = {
        "a1": parse_markup("аб #1 вг"),
        "a3": parse_markup("жз"),
    }
    exported, failures = export_training_labels(split, annotations)
    assert [r.record_id for r in exported] == ["a1", "a3"]
    assert len(failures) == 1 and failures[0].record_id == "a2"


def test_export_empty_split(tmp_path):
    root = write_corpus(tmp_path, {"test": []})
    split = load_split(root, "test")
    exported, failures = export_training_labels(split, {})
    assert exported == [] and failures == []


def test_export_jsonl_idempotent(tmp_path):
    root = write_corpus(tmp_path, {"train": [("a1", "аб вг"), ("a2", "де")]})
    split = load_split(root, "train")
    annotations = {"a1": parse_markup("аб #1 вг"), "a2": parse_markup("де")}

    def render():
        exported, _ = export_training_labels(split, annotations)
        buffer = io.StringIO()
        write_labels_jsonl(buffer, exported)
        return buffer.getvalue()

    first, second = render(), render()
    assert first == second
    assert '"id": "a1"' in first
