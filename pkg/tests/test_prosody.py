import io

import pytest
from hypothesis import given, strategies as st

from mntts_frontend.prosody import (
    BreakLevel,
    EmptyInputError,
    LengthMismatchError,
    MarkupError,
    ProsodyAnnotation,
    Utterance,
    ZeroCountError,
    grapheme_clusters,
    length_regulate,
    parse_markup,
    read_annotations_jsonl,
    serialize_markup,
    tokenize,
    write_annotations_jsonl,
)

words_st = st.text(alphabet="абвгдеёжзийклмн", min_size=1, max_size=8)
puncts_st = st.sampled_from(["", ".", ",", "!", "?", "…", ".»"])


@st.composite
def annotations(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    words = [draw(words_st) for _ in range(n)]
    puncts = [draw(puncts_st) for _ in range(n)]
    breaks = [draw(st.sampled_from(list(BreakLevel))) for _ in range(n - 1)]
    breaks.append(BreakLevel.B3)
    return ProsodyAnnotation(Utterance.from_words(words, puncts), tuple(breaks))


def test_tokenize_peels_punctuation():
    utt = tokenize("сайн уу.")
    assert utt.words == ("сайн", "уу")
    assert utt.puncts == ("", ".")
    assert utt.char_counts == (4, 2)  # с-а-й-н, у-у


def test_tokenize_single_token():
    utt = tokenize("a")
    assert utt.words == ("a",)
    assert utt.puncts == ("",)
    assert utt.char_counts == (1,)


def test_tokenize_blank_is_error():
    with pytest.raises(EmptyInputError):
        tokenize("   ")


def test_tokenize_standalone_punct_joins_previous():
    utt = tokenize("яв ! одоо")
    assert utt.words == ("яв", "одоо")
    assert utt.puncts == ("!", "")


def test_tokenize_combining_marks_count_as_one_cluster():
    # а + combining acute is one user-perceived character
    utt = tokenize("са́йн")
    assert utt.char_counts == (4,)
    assert grapheme_clusters("а́") == ["а́"]


def test_utterance_validates_parallel_lengths():
    with pytest.raises(LengthMismatchError):
        Utterance(("a",), ("", ""), (1,))


def test_utterance_rejects_empty():
    with pytest.raises(EmptyInputError):
        Utterance((), (), ())


def test_parse_markup_basic():
    ann = parse_markup("A #1 B")
    assert ann.utterance.words == ("A", "B")
    assert ann.breaks == (BreakLevel.B1, BreakLevel.B3)


def test_parse_markup_default_b0():
    ann = parse_markup("A B")
    assert ann.breaks == (BreakLevel.B0, BreakLevel.B3)


def test_parse_markup_leading_marker():
    with pytest.raises(MarkupError, match="token 0"):
        parse_markup("#2 A")


def test_parse_markup_unknown_marker():
    with pytest.raises(MarkupError, match="#4"):
        parse_markup("A #4 B")


def test_parse_markup_double_marker():
    with pytest.raises(MarkupError):
        parse_markup("A #1 #2 B")


def test_parse_markup_trailing_marker_overridden():
    # the utterance-final boundary is B3 no matter what the text says
    ann = parse_markup("A B #1")
    assert ann.breaks == (BreakLevel.B0, BreakLevel.B3)


def test_parse_markup_keeps_punctuation():
    ann = parse_markup("яв, #2 одоо.")
    assert ann.utterance.puncts == (",", ".")
    assert ann.breaks == (BreakLevel.B2, BreakLevel.B3)


def test_serialize_basic():
    ann = ProsodyAnnotation(
        Utterance.from_words(["A", "B"]), (BreakLevel.B1, BreakLevel.B3)
    )
    assert serialize_markup(ann) == "A #1 B"


def test_serialize_b0_and_final_implicit():
    ann = ProsodyAnnotation(
        Utterance.from_words(["A", "B"]), (BreakLevel.B0, BreakLevel.B3)
    )
    assert serialize_markup(ann) == "A B"


def test_serialize_single_word():
    ann = ProsodyAnnotation(Utterance.from_words(["A"]), (BreakLevel.B3,))
    assert serialize_markup(ann) == "A"


def test_serialize_nonfinal_b3_emitted():
    ann = ProsodyAnnotation(
        Utterance.from_words(["A", "B"]), (BreakLevel.B3, BreakLevel.B3)
    )
    assert serialize_markup(ann) == "A #3 B"


def test_serialize_rejects_marker_shaped_word():
    ann = ProsodyAnnotation(Utterance.from_words(["#1"]), (BreakLevel.B3,))
    with pytest.raises(MarkupError):
        serialize_markup(ann)


def test_final_break_must_be_b3():
    with pytest.raises(Exception, match="B3"):
        ProsodyAnnotation(Utterance.from_words(["A"]), (BreakLevel.B1,))


@given(annotations())
def test_markup_round_trip(ann):
    assert parse_markup(serialize_markup(ann)) == ann


@given(annotations())
def test_markup_canonical_fixed_point(ann):
    canonical = serialize_markup(ann)
    assert serialize_markup(parse_markup(canonical)) == canonical


def test_length_regulate_definitional():
    assert length_regulate(["x", "y"], [2, 3]) == ["x", "x", "y", "y", "y"]


def test_length_regulate_empty():
    assert length_regulate([], []) == []


def test_length_regulate_mismatch():
    with pytest.raises(LengthMismatchError):
        length_regulate(["x"], [2, 1])


def test_length_regulate_zero_count():
    with pytest.raises(ZeroCountError):
        length_regulate(["x"], [0])


@given(
    st.lists(
        st.tuples(st.integers(), st.integers(min_value=1, max_value=9)), max_size=30
    )
)
def test_length_regulate_sum_and_blocks(pairs):
    items = [item for item, _ in pairs]
    counts = [count for _, count in pairs]
    out = length_regulate(items, counts)
    assert len(out) == sum(counts)
    offset = 0
    for item, count in pairs:
        assert out[offset : offset + count] == [item] * count
        offset += count


@given(st.lists(st.integers(), max_size=30))
def test_length_regulate_identity_with_unit_counts(items):
    assert length_regulate(items, [1] * len(items)) == items


def test_regulate_matches_tokenized_grapheme_total():
    utt = tokenize("сайн уу, та?")
    out = length_regulate(list(utt.words), utt.char_counts)
    assert len(out) == sum(len(grapheme_clusters(w)) for w in utt.words)


def test_annotation_jsonl_round_trip():
    items = [
        ("utt-1", parse_markup("сайн #1 уу")),
        ("utt-2", parse_markup("би #2 явна.")),
    ]
    buffer = io.StringIO()
    assert write_annotations_jsonl(buffer, items) == 2
    buffer.seek(0)
    assert read_annotations_jsonl(buffer) == items
