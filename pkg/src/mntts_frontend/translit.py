"""Rule-table transliteration among Mongolian writing systems.

Tables are plain TSV files mapping source grapheme sequences to target
sequences, optionally restricted to a word position (initial/medial/final/
isolated). Conversion is greedy longest-match, left to right, word by word;
characters no rule covers pass through unchanged and are reported back to
the caller instead of failing, since real corpus lines contain digits and
stray Latin punctuation.

The shipped demonstration tables (``data/latin_traditional.tsv``,
``data/traditional_cyrillic.tsv``) encode one plausible romanization scheme
and are meant as editable starting points, not a complete ruleset.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ToolkitError

MONGOLIAN_BLOCK = (0x1800, 0x18AF)

POSITIONS = ("any", "initial", "medial", "final", "isolated")


class Script(Enum):
    LATIN = "latin"
    TRADITIONAL = "traditional"
    CYRILLIC = "cyrillic"
    HAN = "han"


class TableError(ToolkitError):
    """Mapping table file could not be parsed or violates its invariants."""


class ScriptMismatchError(ToolkitError):
    """Input text script does not match the table's source script."""


@dataclass(frozen=True)
class ScriptText:
    """A text string tagged with its writing system. NFC-normalized."""

    script: Script
    text: str

    def __post_init__(self):
        object.__setattr__(self, "text", unicodedata.normalize("NFC", self.text))


@dataclass(frozen=True)
class MappingRule:
    source: str
    target: str
    position: str  # one of POSITIONS
    priority: int


@dataclass(frozen=True)
class MappingTable:
    source_script: Script
    target_script: Script
    rules: tuple[MappingRule, ...]
    warnings: tuple[str, ...] = ()
    _by_source: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        seen = set()
        priorities: dict[str, set[int]] = {}
        by_source: dict[str, list[MappingRule]] = {}
        for rule in self.rules:
            if not rule.source:
                raise TableError("empty source sequence in mapping rule")
            if rule.position not in POSITIONS:
                raise TableError(f"invalid position {rule.position!r}")
            key = (rule.source, rule.position)
            if key in seen:
                raise TableError(
                    f"duplicate entry for source {rule.source!r} position {rule.position!r}"
                )
            seen.add(key)
            group = priorities.setdefault(rule.source, set())
            if rule.priority in group:
                raise TableError(
                    f"priority {rule.priority} reused within source group {rule.source!r}"
                )
            group.add(rule.priority)
            by_source.setdefault(rule.source, []).append(rule)
        for group_rules in by_source.values():
            group_rules.sort(key=lambda r: r.priority)
        object.__setattr__(self, "_by_source", by_source)

    @property
    def max_source_len(self) -> int:
        return max((len(r.source) for r in self.rules), default=0)


@dataclass(frozen=True)
class Unmatched:
    """A character that no rule covered, passed through verbatim."""

    char: str
    index: int  # codepoint index into the stage input text
    table: str  # "<source>-><target>" label of the stage that skipped it


@dataclass(frozen=True)
class TransliterationResult:
    output: ScriptText
    unmatched: tuple[Unmatched, ...] = ()

    @property
    def text(self) -> str:
        return self.output.text


def _parse_script_tag(value: str, line_no: int, path: Path) -> Script:
    try:
        return Script(value.strip().lower())
    except ValueError:
        raise TableError(
            f"{path}:{line_no}: invalid script tag {value.strip()!r} "
            f"(expected one of {[s.value for s in Script]})"
        ) from None


def load_mapping_table(path: str | Path) -> MappingTable:
    """Load a mapping table from TSV.

    Format: UTF-8, LF endings, header ``source<TAB>target<TAB>position<TAB>
    priority``. Comment lines start with ``#``; two pragma comments declare
    the scripts and are required::

        # source_script: latin
        # target_script: traditional

    Raises TableError on parse problems (with line numbers), duplicate
    (source, position) pairs, or missing/unknown script tags. Target text
    outside the Mongolian Unicode block U+1800-U+18AF in a table targeting
    the traditional script is recorded as a load warning, not an error.
    """
    path = Path(path)
    source_script = None
    target_script = None
    rules = []
    warnings = []
    header_seen = False
    seen_keys = set()
    seen_priorities = set()
    with open(path, encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.lower().startswith("source_script:"):
                    source_script = _parse_script_tag(body.split(":", 1)[1], line_no, path)
                elif body.lower().startswith("target_script:"):
                    target_script = _parse_script_tag(body.split(":", 1)[1], line_no, path)
                continue
            fields = line.split("\t")
            if not header_seen:
                if fields != ["source", "target", "position", "priority"]:
                    raise TableError(f"{path}:{line_no}: bad header {line!r}")
                header_seen = True
                continue
            if len(fields) != 4:
                raise TableError(f"{path}:{line_no}: expected 4 tab-separated fields, got {len(fields)}")
            source, target, position, priority_text = fields
            source = unicodedata.normalize("NFC", source)
            target = unicodedata.normalize("NFC", target)
            if not source:
                raise TableError(f"{path}:{line_no}: empty source sequence")
            if position not in POSITIONS:
                raise TableError(f"{path}:{line_no}: invalid position {position!r}")
            try:
                priority = int(priority_text)
            except ValueError:
                raise TableError(f"{path}:{line_no}: priority {priority_text!r} is not an integer") from None
            if (source, position) in seen_keys:
                raise TableError(
                    f"{path}:{line_no}: duplicate entry for source {source!r} position {position!r}"
                )
            if (source, priority) in seen_priorities:
                raise TableError(
                    f"{path}:{line_no}: priority {priority} reused within source group {source!r}"
                )
            seen_keys.add((source, position))
            seen_priorities.add((source, priority))
            rules.append(MappingRule(source, target, position, priority))
    if source_script is None or target_script is None:
        raise TableError(f"{path}: missing '# source_script:' / '# target_script:' tags")
    if not header_seen:
        raise TableError(f"{path}: missing header line")
    if target_script is Script.TRADITIONAL:
        for rule in rules:
            bad = [c for c in rule.target if not _in_mongolian_block(c)]
            if bad:
                warnings.append(
                    "target %r for source %r contains characters outside U+1800-U+18AF"
                    % (rule.target, rule.source)
                )
    return MappingTable(source_script, target_script, tuple(rules), tuple(warnings))


def _in_mongolian_block(char: str) -> bool:
    return MONGOLIAN_BLOCK[0] <= ord(char) <= MONGOLIAN_BLOCK[1]


def is_delimiter(char: str) -> bool:
    """Word delimiters: whitespace and Unicode punctuation."""
    return char.isspace() or unicodedata.category(char).startswith("P")


def _span_position(start: int, end: int, word_len: int) -> str:
    """Classify a matched span [start, end) within a word of word_len chars."""
    if start == 0 and end == word_len:
        return "isolated"
    if start == 0:
        return "initial"
    if end == word_len:
        return "final"
    return "medial"


def _match_at(word: str, start: int, table: MappingTable) -> MappingRule | None:
    """Longest match at word[start:], priority breaking equal-length ties.

    Lower priority numbers win. Position constraints are evaluated against
    the matched span's place inside the word.
    """
    max_len = min(table.max_source_len, len(word) - start)
    for length in range(max_len, 0, -1):
        chunk = word[start : start + length]
        span_pos = _span_position(start, start + length, len(word))
        for rule in table._by_source.get(chunk, ()):  # sorted by priority
            if rule.position == "any" or rule.position == span_pos:
                return rule
    return None


def _convert_word(word: str, offset: int, table: MappingTable, label: str):
    out = []
    unmatched = []
    i = 0
    while i < len(word):
        rule = _match_at(word, i, table)
        if rule is None:
            out.append(word[i])
            unmatched.append(Unmatched(word[i], offset + i, label))
            i += 1
        else:
            out.append(rule.target)
            i += len(rule.source)
    return "".join(out), unmatched


def transliterate(text: ScriptText, table: MappingTable) -> TransliterationResult:
    """Convert text with one mapping table.

    Greedy longest-match, scanning left to right within each word (words are
    maximal runs of non-delimiter characters). Delimiters pass through
    silently; in-word characters no rule matches pass through and are
    reported in the result's ``unmatched`` list.
    """
    if text.script is not table.source_script:
        raise ScriptMismatchError(
            f"input is {text.script.value}, table expects {table.source_script.value}"
        )
    label = f"{table.source_script.value}->{table.target_script.value}"
    out = []
    unmatched: list[Unmatched] = []
    i = 0
    s = text.text
    while i < len(s):
        if is_delimiter(s[i]):
            out.append(s[i])
            i += 1
            continue
        j = i
        while j < len(s) and not is_delimiter(s[j]):
            j += 1
        converted, missed = _convert_word(s[i:j], i, table, label)
        out.append(converted)
        unmatched.extend(missed)
        i = j
    return TransliterationResult(
        ScriptText(table.target_script, "".join(out)), tuple(unmatched)
    )


def latin_to_cyrillic(
    text: ScriptText, latin_traditional: MappingTable, traditional_cyrillic: MappingTable
) -> TransliterationResult:
    """Latin romanization to Cyrillic via the traditional script.

    There is deliberately no direct Latin->Cyrillic table; the conversion is
    exactly the two-step composition, and the unmatched reports of both
    stages are concatenated.
    """
    if text.script is not Script.LATIN:
        raise ScriptMismatchError(f"input is {text.script.value}, expected latin")
    if (
        latin_traditional.source_script is not Script.LATIN
        or latin_traditional.target_script is not Script.TRADITIONAL
    ):
        raise ScriptMismatchError("first table must map latin -> traditional")
    if (
        traditional_cyrillic.source_script is not Script.TRADITIONAL
        or traditional_cyrillic.target_script is not Script.CYRILLIC
    ):
        raise ScriptMismatchError("second table must map traditional -> cyrillic")
    first = transliterate(text, latin_traditional)
    second = transliterate(first.output, traditional_cyrillic)
    return TransliterationResult(second.output, first.unmatched + second.unmatched)


def packaged_table_path(name: str) -> Path:
    """Path of a demonstration table shipped inside the package."""
    return Path(__file__).parent / "data" / name
