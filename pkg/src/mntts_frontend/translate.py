"""Word-aligned translation clients: Cyrillic Mongolian words to Han tokens.

The pivot exists so a pretrained Chinese-text annotator can be slotted in
behind a stable interface. One Han token string comes back per input word,
in order, so downstream per-boundary labels always map back to the source
words. The dictionary client keeps tests hermetic; the HTTP client speaks a
minimal JSON POST contract and caches per word.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import ToolkitError

UNK_TOKEN = "〇"  # 〇, single Han codepoint


class UnknownWordError(ToolkitError):
    """Word missing from the dictionary under the error fallback policy."""


class TransportError(ToolkitError):
    """HTTP request failed or returned a malformed response."""


class TranslationClient(Protocol):
    def translate_words(self, words: Sequence[str]) -> list[str]:
        """One Han token string per input word, order preserved."""
        ...


def load_dictionary(path: str | Path) -> dict[str, str]:
    """Read a ``cyrillic<TAB>han`` TSV; ``#`` lines are comments."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ToolkitError(f"{path}:{line_no}: expected 2 tab-separated fields")
            table[parts[0].casefold()] = parts[1]
    return table


class DictionaryTranslator:
    """Offline lookup translator. Lookup is case-folded.

    fallback: "unk" substitutes the UNK token for unknown words; "error"
    raises UnknownWordError instead.
    """

    def __init__(self, table: dict[str, str], fallback: str = "unk"):
        if fallback not in ("unk", "error"):
            raise ToolkitError(f"unknown fallback policy {fallback!r}")
        self._table = {k.casefold(): v for k, v in table.items()}
        self._fallback = fallback

    def translate_words(self, words: Sequence[str]) -> list[str]:
        out = []
        for i, word in enumerate(words):
            if not word:
                raise ToolkitError(f"word {i} is empty")
            han = self._table.get(word.casefold())
            if han is None:
                if self._fallback == "error":
                    raise UnknownWordError(f"word {i}: no entry for {word!r}")
                han = UNK_TOKEN
            out.append(han)
        return out


class HttpTranslator:
    """Batch HTTP translator with a per-word cache.

    Wire format: POST ``{"words": [...]}`` to the endpoint, expect UTF-8
    JSON ``{"translations": [...]}`` of equal length; any non-200 status is
    a transport error. A cached word is never requested again.
    """

    def __init__(self, endpoint: str, timeout: float = 5.0, retries: int = 1):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self._cache: dict[str, str] = {}
        self._hits = 0
        self._misses = 0
        self._lock = threading.Lock()

    def cache_stats(self) -> tuple[int, int]:
        """(hits, misses) so far; both only ever grow."""
        with self._lock:
            return self._hits, self._misses

    def _post(self, words: list[str], indices: list[int]) -> list[str]:
        last_error = None
        for _ in range(1 + max(0, self.retries)):  # first attempt plus retries
            try:
                response = requests.post(
                    self.endpoint, json={"words": words}, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                last_error = ToolkitError(f"status {response.status_code}")
                continue
            try:
                translations = response.json()["translations"]
            except (KeyError, json.JSONDecodeError, ValueError) as exc:
                raise TransportError(f"malformed response for word indices {indices}: {exc}") from exc
            if len(translations) != len(words):
                raise TransportError(
                    f"response length {len(translations)} != request length {len(words)} "
                    f"(word indices {indices})"
                )
            return [str(t) for t in translations]
        raise TransportError(f"request failed for word indices {indices}: {last_error}")

    def translate_words(self, words: Sequence[str]) -> list[str]:
        for i, word in enumerate(words):
            if not word:
                raise ToolkitError(f"word {i} is empty")
        with self._lock:
            missing: list[str] = []
            missing_indices: list[int] = []
            for i, word in enumerate(words):
                if word in self._cache:
                    self._hits += 1
                elif word not in missing:
                    missing.append(word)
                    missing_indices.append(i)
            self._misses += len(missing)
        if missing:
            translations = self._post(missing, missing_indices)
            with self._lock:
                self._cache.update(zip(missing, translations))
        with self._lock:
            return [self._cache[word] for word in words]
