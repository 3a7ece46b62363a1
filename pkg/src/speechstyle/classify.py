"""Scalarization, per-group scoring, and the dominance decision rule."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import EmptyCell, EmptyResults, UnknownPrompt
from .features import FeatureBundle
from .metric import Triplet, compute_triplet

if TYPE_CHECKING:
    from .reference import ReferenceSet


class NormKind(Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


def triplet_components(t: Triplet) -> tuple[float, float, float]:
    """Map a triplet onto three [0, 1] penalties, 0 meaning identical."""
    return (t.id / (1.0 + t.id), (1.0 - t.p) / 2.0, (1.0 - t.ir) / 2.0)


def scalarize(t: Triplet, norm: NormKind = NormKind.L2) -> float:
    """Collapse a triplet to a single nonnegative score, lower is closer."""
    v = triplet_components(t)
    if norm is NormKind.L1:
        return v[0] + v[1] + v[2]
    if norm is NormKind.L2:
        return float(np.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2))
    return max(v)


@dataclass(frozen=True)
class GroupScore:
    """Best triplet of a test utterance against one group's ideals."""

    group: int
    triplet: Triplet
    scalar: float
    ideal_used: str


@dataclass(frozen=True)
class ClassificationResult:
    prompt: int
    scores: tuple[GroupScore, ...]
    chosen: int
    dominant: bool
    margin: float


def score_against_group(
    test: FeatureBundle,
    ideals: Sequence[tuple[str, FeatureBundle]],
    group: int,
    norm: NormKind = NormKind.L2,
) -> GroupScore:
    """Score a test utterance against every ideal of one group.

    Returns the triplet with the smallest scalarized score; ties go to
    the ideal with the smallest speaker id.
    """
    if not ideals:
        raise EmptyCell(f"group {group} has no ideals for this prompt")
    best: tuple[float, str, Triplet] | None = None
    for speaker, bundle in sorted(ideals, key=lambda item: item[0]):
        t = compute_triplet(test, bundle)
        s = scalarize(t, norm)
        if best is None or s < best[0]:
            best = (s, speaker, t)
    return GroupScore(group=group, triplet=best[2], scalar=best[0], ideal_used=best[1])


def _dominates(t: Triplet, others: Sequence[Triplet]) -> bool:
    return all(t.id <= o.id and t.p >= o.p and t.ir >= o.ir for o in others)


def classify_utterance(
    test: FeatureBundle,
    prompt: int,
    refs: "ReferenceSet",
    norm: NormKind = NormKind.L2,
) -> ClassificationResult:
    """Pick the group whose ideals a test utterance sits closest to.

    If exactly one group's best triplet is at least as good as every
    other group's in all three parts at once, that group wins and the
    result is marked dominant. Otherwise the smallest scalarized score
    decides, with ties going to the lower group rank.
    """
    if not refs.has_prompt(prompt):
        raise UnknownPrompt(f"prompt {prompt} is not covered by the reference set")
    scores = tuple(
        score_against_group(test, refs.ideals(prompt, g), g, norm)
        for g in range(refs.n_groups)
    )
    dominant_groups = [
        g
        for g, score in enumerate(scores)
        if _dominates(score.triplet, [s.triplet for s in scores if s.group != g])
    ]
    if len(dominant_groups) == 1:
        chosen = dominant_groups[0]
        dominant = True
    else:
        chosen = min(range(len(scores)), key=lambda g: (scores[g].scalar, g))
        dominant = len(scores) == 1
    others = [s.scalar for s in scores if s.group != chosen]
    margin = min(others) - scores[chosen].scalar if others else 0.0
    return ClassificationResult(
        prompt=prompt, scores=scores, chosen=chosen, dominant=dominant, margin=margin
    )


def classify_speaker(results: Sequence[ClassificationResult]) -> int:
    """Majority vote over a speaker's per-utterance decisions.

    Ties go to the tied group with the smallest mean scalarized score
    across the speaker's utterances, then to the lower rank.
    """
    if not results:
        raise EmptyResults("cannot aggregate zero utterance results")
    votes: dict[int, int] = {}
    for r in results:
        votes[r.chosen] = votes.get(r.chosen, 0) + 1
    top = max(votes.values())
    tied = [g for g, count in votes.items() if count == top]
    if len(tied) == 1:
        return tied[0]

    def mean_scalar(group: int) -> float:
        return float(np.mean([r.scores[group].scalar for r in results]))

    return min(tied, key=lambda g: (mean_scalar(g), g))
