"""Prosody data model: tokenization, break levels, inline markup, length regulation.

Break levels label inter-word boundaries with the strength of the prosodic
break: B0 none, B1 prosodic word, B2 prosodic phrase, B3 intonational
phrase. Every utterance ends an intonational phrase, so the final boundary
is always B3. Inline markup writes the non-default levels between words as
``#1`` / ``#2`` / ``#3`` tokens.

Character counts are grapheme clusters (the user-perceived units), so
downstream character-level consumers stay aligned with what a speaker
actually articulates.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from enum import IntEnum
from typing import IO, Iterable, Sequence, TypeVar

import regex

from .errors import ToolkitError

T = TypeVar("T")

_GRAPHEME = regex.compile(r"\X")
_MARKER = regex.compile(r"#\d+$")


class EmptyInputError(ToolkitError):
    """Input text is empty after trimming."""


class MarkupError(ToolkitError):
    """Malformed inline prosody markup."""


class LengthMismatchError(ToolkitError):
    """Parallel sequences disagree in length."""


class ZeroCountError(ToolkitError):
    """A repeat count below one."""


class BreakLevel(IntEnum):
    B0 = 0  # no break
    B1 = 1  # prosodic word
    B2 = 2  # prosodic phrase
    B3 = 3  # intonational phrase


def grapheme_clusters(text: str) -> list[str]:
    """Split text into extended grapheme clusters."""
    return _GRAPHEME.findall(text)


def _is_punct(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


@dataclass(frozen=True)
class Utterance:
    """Tokenized words with per-word trailing punctuation and grapheme counts.

    Invariants: at least one word; words are non-empty and contain no
    whitespace; puncts and char_counts run parallel to words; char_counts[i]
    is the grapheme-cluster count of words[i].
    """

    words: tuple[str, ...]
    puncts: tuple[str, ...]
    char_counts: tuple[int, ...]

    def __post_init__(self):
        if not self.words:
            raise EmptyInputError("utterance has no words")
        if not (len(self.words) == len(self.puncts) == len(self.char_counts)):
            raise LengthMismatchError(
                f"words/puncts/char_counts lengths differ: "
                f"{len(self.words)}/{len(self.puncts)}/{len(self.char_counts)}"
            )
        for word, count in zip(self.words, self.char_counts):
            if not word or any(c.isspace() for c in word):
                raise ToolkitError(f"invalid word {word!r}")
            if count != len(grapheme_clusters(word)):
                raise ToolkitError(
                    f"char count {count} does not match grapheme count of {word!r}"
                )

    @classmethod
    def from_words(cls, words: Sequence[str], puncts: Sequence[str] | None = None) -> "Utterance":
        words = tuple(words)
        if puncts is None:
            puncts = ("",) * len(words)
        counts = tuple(len(grapheme_clusters(w)) for w in words)
        return cls(words, tuple(puncts), counts)


@dataclass(frozen=True)
class ProsodyAnnotation:
    """Break levels at each word boundary, including the utterance-final one.

    Invariant: one break per word; the final break is always B3.
    """

    utterance: Utterance
    breaks: tuple[BreakLevel, ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.utterance.words):
            raise LengthMismatchError(
                f"{len(self.breaks)} breaks for {len(self.utterance.words)} words"
            )
        if self.breaks[-1] is not BreakLevel.B3:
            raise ToolkitError("final boundary must be B3")


def _peel(token: str) -> tuple[str, str]:
    """Strip trailing punctuation off a token.

    A token that is punctuation throughout is kept whole as a word, so the
    result is always non-empty.
    """
    end = len(token)
    while end > 0 and _is_punct(token[end - 1]):
        end -= 1
    if end == 0:
        return token, ""
    return token[:end], token[end:]


def tokenize(text: str) -> Utterance:
    """Split text on Unicode whitespace into an Utterance.

    Trailing punctuation of each token is peeled into the punct slot; a
    token made only of punctuation is appended to the previous word's punct.
    """
    tokens = text.split()
    if not tokens:
        raise EmptyInputError("no words in input")
    words: list[str] = []
    puncts: list[str] = []
    for token in tokens:
        word, punct = _peel(token)
        if all(_is_punct(c) for c in word) and words:
            puncts[-1] += token
            continue
        words.append(word)
        puncts.append(punct)
    return Utterance.from_words(words, puncts)


def parse_markup(text: str) -> ProsodyAnnotation:
    """Parse inline ``#1/#2/#3`` markup into an annotation.

    A marker applies to the boundary after the word it follows; boundaries
    without a marker are B0. The utterance-final boundary is forced to B3
    (a trailing marker is accepted and overridden). Raises MarkupError, with
    the token position, for unknown markers or a marker with no word before
    it, and for two markers in a row.
    """
    tokens = text.split()
    if not tokens:
        raise EmptyInputError("no words in markup")
    words: list[str] = []
    puncts: list[str] = []
    breaks: list[BreakLevel | None] = []
    for pos, token in enumerate(tokens):
        if _MARKER.fullmatch(token):
            level = token[1:]
            if level not in ("1", "2", "3"):
                raise MarkupError(f"token {pos}: unknown marker {token!r}")
            if not words:
                raise MarkupError(f"token {pos}: marker {token!r} before any word")
            if breaks[-1] is not None:
                raise MarkupError(f"token {pos}: marker {token!r} follows another marker")
            breaks[-1] = BreakLevel(int(level))
            continue
        word, punct = _peel(token)
        if all(_is_punct(c) for c in word) and words:
            puncts[-1] += token
            continue
        words.append(word)
        puncts.append(punct)
        breaks.append(None)
    utterance = Utterance.from_words(words, puncts)
    filled = [b if b is not None else BreakLevel.B0 for b in breaks]
    filled[-1] = BreakLevel.B3
    return ProsodyAnnotation(utterance, tuple(filled))


def serialize_markup(annotation: ProsodyAnnotation) -> str:
    """Canonical inline form: B0 emits nothing, the final B3 is implicit.

    Inverse of parse_markup for annotations whose words are in tokenizer
    normal form (no trailing punctuation inside the word slot). Raises
    MarkupError for a word that itself looks like a marker token, since the
    output could not be parsed back.
    """
    utt = annotation.utterance
    parts: list[str] = []
    for i, (word, punct) in enumerate(zip(utt.words, utt.puncts)):
        if _MARKER.fullmatch(word + punct):
            raise MarkupError(f"word {word + punct!r} is indistinguishable from a marker")
        parts.append(word + punct)
        is_final = i == len(utt.words) - 1
        level = annotation.breaks[i]
        if not is_final and level is not BreakLevel.B0:
            parts.append(f"#{int(level)}")
    return " ".join(parts)


def length_regulate(items: Sequence[T], char_counts: Sequence[int]) -> list[T]:
    """Expand word-level items to character level.

    Each item is repeated its word's character count, in order, so the
    output has exactly sum(char_counts) entries.
    """
    if len(items) != len(char_counts):
        raise LengthMismatchError(
            f"{len(items)} items vs {len(char_counts)} counts"
        )
    out: list[T] = []
    for item, count in zip(items, char_counts):
        if count < 1:
            raise ZeroCountError(f"repeat count {count} < 1")
        out.extend([item] * count)
    return out


def annotation_to_record(record_id: str, annotation: ProsodyAnnotation) -> dict:
    utt = annotation.utterance
    return {
        "id": record_id,
        "words": list(utt.words),
        "puncts": list(utt.puncts),
        "breaks": [int(b) for b in annotation.breaks],
    }


def annotation_from_record(record: dict) -> tuple[str, ProsodyAnnotation]:
    utt = Utterance.from_words(record["words"], record["puncts"])
    breaks = tuple(BreakLevel(b) for b in record["breaks"])
    return record["id"], ProsodyAnnotation(utt, breaks)


def write_annotations_jsonl(fh: IO[str], items: Iterable[tuple[str, ProsodyAnnotation]]) -> int:
    """Write ``{"id", "words", "puncts", "breaks"}`` records, one per line."""
    n = 0
    for record_id, annotation in items:
        json.dump(annotation_to_record(record_id, annotation), fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")
        n += 1
    return n


def read_annotations_jsonl(fh: IO[str]) -> list[tuple[str, ProsodyAnnotation]]:
    out = []
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            out.append(annotation_from_record(record))
        except (KeyError, ValueError) as exc:
            raise ToolkitError(f"line {line_no}: bad annotation record: {exc}") from exc
    return out
