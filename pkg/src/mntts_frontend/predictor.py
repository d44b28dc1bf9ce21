"""Trainable word-level break classifier.

A multiclass averaged perceptron over cheap boundary features: word
lengths, position in the utterance, punctuation, a hashed word-identity
bucket, and the previously decoded break. It trains on automatically
produced annotations and decodes greedily left to right; the utterance-
final boundary is never predicted, it is always an intonational phrase
break by rule.

Deliberately linear and deterministic: same corpus, epochs, and seed give
byte-identical model files. Context vectors from a pretrained text encoder
can ride along as extra word-level payloads elsewhere; this classifier does
not consume them.
"""

from __future__ import annotations

import json
import random
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ToolkitError
from .prosody import BreakLevel, ProsodyAnnotation, Utterance

MAGIC = b"PNL1"
FORMAT_VERSION = 1

N_CLASSES = 4
DEFAULT_BUCKETS = 4096

# dense slots before the one-hot blocks
_SLOT_WORD_LEN = 0
_SLOT_NEXT_LEN = 1
_SLOT_POSITION = 2
_SLOT_PUNCT = 3
_PREV_BASE = 4  # 5 slots: no-previous, then B0..B3
_BUCKET_BASE = _PREV_BASE + 5


class EmptyCorpusError(ToolkitError):
    """Training requested on an empty corpus."""


class DimensionMismatchError(ToolkitError):
    """Model weights do not fit the configured feature space."""


class ModelFormatError(ToolkitError):
    """Model file is corrupt: bad magic, truncated, or inconsistent."""


class ModelVersionError(ToolkitError):
    """Model file uses an unsupported format version."""


def feature_dim(buckets: int) -> int:
    return _BUCKET_BASE + buckets


def word_bucket(word: str, buckets: int) -> int:
    """Stable hash bucket for a word (crc32, not process-salted)."""
    return zlib.crc32(word.encode("utf-8")) % buckets


def featurize(
    utterance: Utterance,
    index: int,
    history: list[BreakLevel],
    buckets: int = DEFAULT_BUCKETS,
) -> np.ndarray:
    """Feature vector for the boundary after word ``index``."""
    n = len(utterance.words)
    if not 0 <= index < n:
        raise ToolkitError(f"boundary index {index} out of range for {n} words")
    vec = np.zeros(feature_dim(buckets))
    vec[_SLOT_WORD_LEN] = utterance.char_counts[index]
    vec[_SLOT_NEXT_LEN] = utterance.char_counts[index + 1] if index + 1 < n else 0.0
    vec[_SLOT_POSITION] = (index + 1) / n  # final boundary gets 1.0
    vec[_SLOT_PUNCT] = 1.0 if utterance.puncts[index] else 0.0
    if index == 0:
        vec[_PREV_BASE] = 1.0
    else:
        vec[_PREV_BASE + 1 + int(history[index - 1])] = 1.0
    vec[_BUCKET_BASE + word_bucket(utterance.words[index], buckets)] = 1.0
    return vec


@dataclass(frozen=True)
class ProsodyModel:
    """Weights of the boundary classifier plus its training metadata."""

    weights: np.ndarray  # (N_CLASSES, feature_dim) float64
    buckets: int
    epochs: int
    seed: int

    def __post_init__(self):
        expected = (N_CLASSES, feature_dim(self.buckets))
        if self.weights.shape != expected:
            raise DimensionMismatchError(
                f"weight shape {self.weights.shape} != {expected} for {self.buckets} buckets"
            )

    def __eq__(self, other):
        if not isinstance(other, ProsodyModel):
            return NotImplemented
        return (
            self.buckets == other.buckets
            and self.epochs == other.epochs
            and self.seed == other.seed
            and np.array_equal(self.weights, other.weights)
        )


def _decode(weights: np.ndarray, utterance: Utterance, buckets: int) -> list[BreakLevel]:
    """Greedy left-to-right decoding; argmax ties go to the lower level."""
    history: list[BreakLevel] = []
    n = len(utterance.words)
    for i in range(n - 1):
        scores = weights @ featurize(utterance, i, history, buckets)
        history.append(BreakLevel(int(np.argmax(scores))))
    history.append(BreakLevel.B3)
    return history


def train(
    corpus: list[ProsodyAnnotation],
    epochs: int = 10,
    seed: int = 0,
    buckets: int = DEFAULT_BUCKETS,
) -> ProsodyModel:
    """Averaged-perceptron training on annotated utterances.

    Utterance order is shuffled each epoch with its own seeded RNG. Within
    an utterance, boundaries are decoded greedily and the model's own
    running predictions feed the history feature. Final boundaries are
    rule-forced and excluded from training. The returned weights are the
    average over every update step, which damps the usual perceptron
    thrashing.
    """
    if not corpus:
        raise EmptyCorpusError("no annotations to train on")
    dim = feature_dim(buckets)
    weights = np.zeros((N_CLASSES, dim))
    totals = np.zeros((N_CLASSES, dim))
    rng = random.Random(seed)
    order = list(range(len(corpus)))
    steps = 0
    for _ in range(epochs):
        rng.shuffle(order)
        for k in order:
            annotation = corpus[k]
            utterance = annotation.utterance
            history: list[BreakLevel] = []
            for i in range(len(utterance.words) - 1):
                vec = featurize(utterance, i, history, buckets)
                scores = weights @ vec
                guess = int(np.argmax(scores))
                gold = int(annotation.breaks[i])
                if guess != gold:
                    weights[gold] += vec
                    weights[guess] -= vec
                history.append(BreakLevel(guess))
                totals += weights
                steps += 1
            # greedy history continues with the forced final break
            history.append(BreakLevel.B3)
    averaged = totals / steps if steps else weights
    return ProsodyModel(averaged, buckets, epochs, seed)


def predict(model: ProsodyModel, utterance: Utterance) -> ProsodyAnnotation:
    """Predict break levels for every boundary; the final one is B3 by rule."""
    breaks = _decode(model.weights, utterance, model.buckets)
    return ProsodyAnnotation(utterance, tuple(breaks))


def training_accuracy(model: ProsodyModel, corpus: list[ProsodyAnnotation]) -> float:
    """Fraction of non-final boundaries the model reproduces on its corpus."""
    correct = 0
    total = 0
    for annotation in corpus:
        decoded = _decode(model.weights, annotation.utterance, model.buckets)
        for predicted, gold in zip(decoded[:-1], annotation.breaks[:-1]):
            correct += predicted == gold
            total += 1
    return correct / total if total else 1.0


def save_model(model: ProsodyModel, path: str | Path) -> None:
    """Write magic, version, a JSON header, then float64-LE weights."""
    header = json.dumps(
        {
            "buckets": model.buckets,
            "epochs": model.epochs,
            "seed": model.seed,
            "classes": N_CLASSES,
            "dim": feature_dim(model.buckets),
        },
        sort_keys=True,
    ).encode("utf-8")
    payload = model.weights.astype("<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(payload)


def load_model(path: str | Path) -> ProsodyModel:
    data = Path(path).read_bytes()
    if len(data) < 10 or data[:4] != MAGIC:
        raise ModelFormatError(f"{path}: bad magic bytes")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"{path}: format version {version}, supported: {FORMAT_VERSION}")
    (header_len,) = struct.unpack_from("<I", data, 6)
    header_end = 10 + header_len
    if header_end > len(data):
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(data[10:header_end].decode("utf-8"))
        buckets = int(header["buckets"])
        epochs = int(header["epochs"])
        seed = int(header["seed"])
        classes = int(header["classes"])
        dim = int(header["dim"])
    except (ValueError, KeyError) as exc:
        raise ModelFormatError(f"{path}: bad header: {exc}") from exc
    if classes != N_CLASSES or dim != feature_dim(buckets):
        raise DimensionMismatchError(
            f"{path}: header declares {classes} classes x {dim} features, "
            f"expected {N_CLASSES} x {feature_dim(buckets)}"
        )
    expected_bytes = classes * dim * 8
    blob = data[header_end:]
    if len(blob) != expected_bytes:
        raise ModelFormatError(
            f"{path}: {len(blob)} weight bytes, expected {expected_bytes}"
        )
    weights = np.frombuffer(blob, dtype="<f8").reshape(classes, dim).copy()
    return ProsodyModel(weights, buckets, epochs, seed)
