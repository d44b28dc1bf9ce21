"""Evaluation metrics: word error rate and per-level boundary scores.

WER counts come from a minimal edit alignment with unit costs; ties in the
backtrace prefer substitution over an insertion+deletion pair, so the
breakdown is deterministic. Boundary precision/recall/F1 compare predicted
against gold break levels per boundary, excluding the utterance-final
boundary, which is B3 on both sides by construction.

Mean opinion scores come from human raters, not software; the only MOS
support here is aggregation of externally collected score tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

from .errors import ToolkitError
from .prosody import BreakLevel, ProsodyAnnotation

SCORED_LEVELS = (BreakLevel.B1, BreakLevel.B2, BreakLevel.B3)


class MismatchedCorpusError(ToolkitError):
    """Gold and predicted corpora do not pair up."""


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    insertions: int
    deletions: int
    reference_length: int

    @property
    def rate(self) -> float:
        return (self.substitutions + self.insertions + self.deletions) / max(
            1, self.reference_length
        )

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "reference_length": self.reference_length,
            "rate": self.rate,
        }


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """Minimal-edit-distance word error rate with unit costs.

    The empty-reference rate divides by max(1, N) so results stay totally
    ordered without a zero division.
    """
    n, m = len(reference), len(hypothesis)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            same = reference[i - 1] == hypothesis[j - 1]
            dist[i][j] = min(
                dist[i - 1][j - 1] + (0 if same else 1),
                dist[i][j - 1] + 1,
                dist[i - 1][j] + 1,
            )
    substitutions = insertions = deletions = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + (
            0 if reference[i - 1] == hypothesis[j - 1] else 1
        ):
            if reference[i - 1] != hypothesis[j - 1]:
                substitutions += 1
            i, j = i - 1, j - 1
        elif j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            insertions += 1
            j -= 1
        else:
            deletions += 1
            i -= 1
    return WerBreakdown(substitutions, insertions, deletions, n)


@dataclass(frozen=True)
class LevelScore:
    true_positives: int
    false_positives: int
    false_negatives: int

    @property
    def precision(self) -> float:
        denom = self.true_positives + self.false_positives
        return self.true_positives / denom if denom else 0.0

    @property
    def recall(self) -> float:
        denom = self.true_positives + self.false_negatives
        return self.true_positives / denom if denom else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_dict(self) -> dict:
        return {
            "tp": self.true_positives,
            "fp": self.false_positives,
            "fn": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class BoundaryScores:
    per_level: dict[BreakLevel, LevelScore]
    micro: LevelScore

    def to_dict(self) -> dict:
        out = {level.name: score.to_dict() for level, score in self.per_level.items()}
        out["micro"] = self.micro.to_dict()
        return out


def boundary_scores(
    gold: Sequence[tuple[str, ProsodyAnnotation]],
    predicted: Sequence[tuple[str, ProsodyAnnotation]],
) -> BoundaryScores:
    """Per-level precision/recall/F1 over non-final boundaries.

    Utterances pair by id, so corpus order does not matter. Zero-division
    precision/recall are defined as 0.
    """
    gold_by_id = dict(gold)
    pred_by_id = dict(predicted)
    if len(gold_by_id) != len(gold) or len(pred_by_id) != len(predicted):
        raise MismatchedCorpusError("duplicate utterance ids")
    if set(gold_by_id) != set(pred_by_id):
        missing = set(gold_by_id) ^ set(pred_by_id)
        raise MismatchedCorpusError(f"unpaired utterance ids: {sorted(missing)[:5]}")
    tp = {level: 0 for level in SCORED_LEVELS}
    fp = {level: 0 for level in SCORED_LEVELS}
    fn = {level: 0 for level in SCORED_LEVELS}
    for record_id, gold_ann in gold_by_id.items():
        pred_ann = pred_by_id[record_id]
        if len(gold_ann.breaks) != len(pred_ann.breaks):
            raise MismatchedCorpusError(
                f"{record_id}: {len(gold_ann.breaks)} gold vs {len(pred_ann.breaks)} predicted boundaries"
            )
        for g, p in zip(gold_ann.breaks[:-1], pred_ann.breaks[:-1]):
            for level in SCORED_LEVELS:
                if g is level and p is level:
                    tp[level] += 1
                elif p is level:
                    fp[level] += 1
                elif g is level:
                    fn[level] += 1
    per_level = {
        level: LevelScore(tp[level], fp[level], fn[level]) for level in SCORED_LEVELS
    }
    micro = LevelScore(
        sum(tp.values()), sum(fp.values()), sum(fn.values())
    )
    return BoundaryScores(per_level, micro)


@dataclass(frozen=True)
class MosSummary:
    count: int
    mean: float
    ci95_low: float
    ci95_high: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "ci95_low": self.ci95_low,
            "ci95_high": self.ci95_high,
        }


def mos_summary(scores: Sequence[float]) -> MosSummary:
    """Mean and normal-approximation 95% CI of externally collected scores."""
    if not scores:
        raise ToolkitError("no scores to aggregate")
    n = len(scores)
    mean = sum(scores) / n
    if n == 1:
        return MosSummary(1, mean, mean, mean)
    variance = sum((s - mean) ** 2 for s in scores) / (n - 1)
    half = NormalDist().inv_cdf(0.975) * (variance / n) ** 0.5
    return MosSummary(n, mean, mean - half, mean + half)
