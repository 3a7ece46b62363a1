"""Reference-set construction: cell statistics and ideal selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .audio import read_wav, strip_silence
from .classify import NormKind, scalarize
from .corpus import ManifestEntry, entry_group
from .errors import (
    EmptyCell,
    MissingCell,
    MissingLabel,
    ParseError,
    RateMismatch,
)
from .features import FeatureBundle, FrameConfig, extract_features
from .metric import Triplet, compute_triplet

MODEL_VERSION = 1


@dataclass(frozen=True)
class CellUtterance:
    speaker: str
    bundle: FeatureBundle


@dataclass(frozen=True)
class CorpusIndex:
    """Extracted features of a labeled corpus, addressed by (prompt, group)."""

    prompts: int
    groups: tuple[str, ...]
    cells: dict[tuple[int, int], tuple[CellUtterance, ...]]
    config: FrameConfig

    def cell(self, prompt: int, group: int) -> tuple[CellUtterance, ...]:
        try:
            return self.cells[(prompt, group)]
        except KeyError:
            raise MissingCell(f"no utterances for prompt {prompt}, group {group}") from None


@dataclass(frozen=True)
class CellAverage:
    """Component-wise mean triplet of a cell plus its score spread."""

    mean: Triplet
    variation: float
    size: int


@dataclass(frozen=True)
class ReferenceCell:
    prompt: int
    group: int
    mean: Triplet
    variation: float
    ideals: tuple[CellUtterance, ...]


@dataclass(frozen=True)
class ReferenceSet:
    """Selected ideals for every (prompt, group) cell."""

    config: FrameConfig
    threshold: float
    groups: tuple[str, ...]
    cells: tuple[ReferenceCell, ...]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_prompts(self) -> int:
        return 1 + max(c.prompt for c in self.cells)

    def has_prompt(self, prompt: int) -> bool:
        return any(c.prompt == prompt for c in self.cells)

    def cell(self, prompt: int, group: int) -> ReferenceCell:
        for c in self.cells:
            if c.prompt == prompt and c.group == group:
                return c
        raise MissingCell(f"model has no cell for prompt {prompt}, group {group}")

    def ideals(self, prompt: int, group: int) -> tuple[tuple[str, FeatureBundle], ...]:
        return tuple((u.speaker, u.bundle) for u in self.cell(prompt, group).ideals)


def default_group_labels(n_groups: int) -> tuple[str, ...]:
    if n_groups == 5:
        return ("very_bad", "bad", "average", "good", "very_good")
    return tuple(f"group{g}" for g in range(n_groups))


def _pairwise_triplets(cell: Sequence[CellUtterance]) -> list[list[Triplet]]:
    """Full N x N triplet table; the diagonal is (0, 1, 1) by identity."""
    n = len(cell)
    table: list[list[Triplet | None]] = [[None] * n for _ in range(n)]
    identity = Triplet(0.0, 1.0, 1.0)
    for k in range(n):
        table[k][k] = identity
        for l in range(k + 1, n):
            t = compute_triplet(cell[k].bundle, cell[l].bundle)
            table[k][l] = t
            table[l][k] = t
    return table


def compute_cell_average(
    cell: Sequence[CellUtterance],
    norm: NormKind = NormKind.L2,
    _pairs: list[list[Triplet]] | None = None,
) -> CellAverage:
    """Average the triplet over all ordered pairs of cell utterances.

    Every ordered pair (k, l) enters the mean, including k = l, so the
    divisor is N squared and the diagonal pulls the mean toward the
    identity triplet. The variation is the standard deviation of the
    scalarized score over the off-diagonal ordered pairs, 0 for N = 1.
    """
    if not cell:
        raise EmptyCell("cannot average an empty cell")
    n = len(cell)
    pairs = _pairs if _pairs is not None else _pairwise_triplets(cell)
    sum_id = sum_p = sum_ir = 0.0
    scalars: list[float] = []
    for k in range(n):
        for l in range(n):
            t = pairs[k][l]
            sum_id += t.id
            sum_p += t.p
            sum_ir += t.ir
            if k != l:
                scalars.append(scalarize(t, norm))
    mean = Triplet(sum_id / (n * n), sum_p / (n * n), sum_ir / (n * n))
    variation = float(np.std(scalars)) if scalars else 0.0
    return CellAverage(mean=mean, variation=variation, size=n)


def _scalar_matrix(
    cell: Sequence[CellUtterance], norm: NormKind, pairs: list[list[Triplet]]
) -> np.ndarray:
    n = len(cell)
    mat = np.zeros((n, n))
    for k in range(n):
        for l in range(n):
            if k != l:
                mat[k, l] = scalarize(pairs[k][l], norm)
    return mat


def _medoid(indices: list[int], scalars: np.ndarray, cell: Sequence[CellUtterance]) -> int:
    """Index minimizing the summed score to the other listed utterances.

    Ties fall to the smallest speaker id.
    """
    best = None
    for k in indices:
        total = sum(scalars[k, l] for l in indices if l != k)
        key = (total, cell[k].speaker)
        if best is None or key < best[0]:
            best = (key, k)
    return best[1]


def _select_cell_ideals(
    cell: Sequence[CellUtterance],
    variation: float,
    threshold: float,
    norm: NormKind,
    pairs: list[list[Triplet]],
) -> tuple[int, ...]:
    scalars = _scalar_matrix(cell, norm, pairs)
    everyone = list(range(len(cell)))
    if variation <= threshold:
        return (_medoid(everyone, scalars, cell),)
    chosen: list[int] = []
    uncovered = everyone
    while uncovered:
        pick = _medoid(uncovered, scalars, cell)
        chosen.append(pick)
        uncovered = [k for k in uncovered if scalars[k, pick] > threshold]
    return tuple(sorted(chosen))


def select_ideals(
    index: CorpusIndex,
    averages: dict[tuple[int, int], CellAverage],
    threshold: float,
    norm: NormKind = NormKind.L2,
) -> ReferenceSet:
    """Choose reference ideals for every cell of an indexed corpus.

    A cell whose variation stays within the threshold is summarized by
    its single medoid. A more scattered cell is covered greedily: the
    medoid of the still-uncovered utterances is added until everyone
    lies within the threshold of some chosen ideal, so in the worst
    case every utterance of the cell becomes an ideal.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    cells = []
    for (prompt, group) in sorted(index.cells):
        cell = index.cell(prompt, group)
        pairs = _pairwise_triplets(cell)
        avg = averages[(prompt, group)]
        picks = _select_cell_ideals(cell, avg.variation, threshold, norm, pairs)
        cells.append(
            ReferenceCell(
                prompt=prompt,
                group=group,
                mean=avg.mean,
                variation=avg.variation,
                ideals=tuple(cell[k] for k in picks),
            )
        )
    return ReferenceSet(
        config=index.config,
        threshold=threshold,
        groups=index.groups,
        cells=tuple(cells),
    )


def ingest_clip(path: str | Path, cfg: FrameConfig, expected_rate: int | None = None):
    """Read one WAV, trim edge silence, and extract features.

    Returns (bundle, sample_rate). A rate different from expected_rate
    raises RateMismatch; corpora must be single-rate.
    """
    clip = read_wav(path)
    if expected_rate is not None and clip.sample_rate != expected_rate:
        raise RateMismatch(
            f"{path}: sample rate {clip.sample_rate} differs from corpus rate {expected_rate}"
        )
    return extract_features(strip_silence(clip), cfg), clip.sample_rate


def build_corpus_index(
    entries: Sequence[ManifestEntry],
    cfg: FrameConfig,
    bundles: dict[Path, FeatureBundle] | None = None,
) -> CorpusIndex:
    """Extract features for labeled entries and group them into cells.

    Group ranks come from the truth column, falling back to expert1.
    Prompt and group counts are inferred from the largest indices seen;
    any hole in the (prompt, group) grid raises MissingCell.
    """
    if not entries:
        raise MissingCell("manifest has no usable entries")
    labeled: list[tuple[ManifestEntry, int]] = []
    for entry in entries:
        group = entry_group(entry)
        if group is None:
            raise MissingLabel(f"{entry.path}: no truth or expert1 label")
        labeled.append((entry, group))
    n_prompts = 1 + max(e.prompt for e, _ in labeled)
    n_groups = 1 + max(g for _, g in labeled)
    cells: dict[tuple[int, int], list[CellUtterance]] = {}
    rate: int | None = None
    for entry, group in labeled:
        if bundles is not None:
            bundle = bundles[entry.path]
        else:
            bundle, rate = ingest_clip(entry.path, cfg, rate)
        cells.setdefault((entry.prompt, group), []).append(
            CellUtterance(speaker=entry.speaker, bundle=bundle)
        )
    missing = [
        (w, g)
        for w in range(n_prompts)
        for g in range(n_groups)
        if (w, g) not in cells
    ]
    if missing:
        raise MissingCell(
            "manifest is missing cells (prompt, group): "
            + ", ".join(str(c) for c in missing)
        )
    return CorpusIndex(
        prompts=n_prompts,
        groups=default_group_labels(n_groups),
        cells={key: tuple(val) for key, val in sorted(cells.items())},
        config=cfg,
    )


def build_reference_set(
    entries: Sequence[ManifestEntry],
    cfg: FrameConfig,
    threshold: float,
    norm: NormKind = NormKind.L2,
    bundles: dict[Path, FeatureBundle] | None = None,
) -> ReferenceSet:
    """End-to-end reference build from manifest entries.

    The pairwise triplet table of each cell is computed once and shared
    between the average and the ideal selection.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    index = build_corpus_index(entries, cfg, bundles)
    cells = []
    for (prompt, group) in sorted(index.cells):
        cell = index.cell(prompt, group)
        pairs = _pairwise_triplets(cell)
        avg = compute_cell_average(cell, norm, _pairs=pairs)
        picks = _select_cell_ideals(cell, avg.variation, threshold, norm, pairs)
        cells.append(
            ReferenceCell(
                prompt=prompt,
                group=group,
                mean=avg.mean,
                variation=avg.variation,
                ideals=tuple(cell[k] for k in picks),
            )
        )
    return ReferenceSet(
        config=cfg, threshold=threshold, groups=index.groups, cells=tuple(cells)
    )


def _pitch_to_json(pitch: np.ndarray) -> list[float | None]:
    return [None if math.isnan(x) else float(x) for x in pitch]


def _pitch_from_json(values: list) -> np.ndarray:
    return np.array([math.nan if v is None else float(v) for v in values], dtype=np.float64)


def reference_set_to_dict(refs: ReferenceSet) -> dict:
    return {
        "version": MODEL_VERSION,
        "frame_config": refs.config.to_dict(),
        "threshold": refs.threshold,
        "groups": list(refs.groups),
        "cells": [
            {
                "prompt": c.prompt,
                "group": c.group,
                "mean": list(c.mean.as_tuple()),
                "variation": c.variation,
                "ideals": [
                    {
                        "speaker": u.speaker,
                        "spectral": u.bundle.spectral.tolist(),
                        "pitch": _pitch_to_json(u.bundle.pitch),
                        "stress": u.bundle.stress.tolist(),
                    }
                    for u in c.ideals
                ],
            }
            for c in refs.cells
        ],
    }


def reference_set_from_dict(doc: dict) -> ReferenceSet:
    try:
        version = doc["version"]
        if version != MODEL_VERSION:
            raise ParseError(f"unsupported model version {version}")
        cfg = FrameConfig.from_dict(doc["frame_config"])
        cells = []
        for cell in doc["cells"]:
            mean = Triplet(*[float(x) for x in cell["mean"]])
            ideals = tuple(
                CellUtterance(
                    speaker=item["speaker"],
                    bundle=FeatureBundle(
                        spectral=np.array(item["spectral"], dtype=np.float64),
                        pitch=_pitch_from_json(item["pitch"]),
                        stress=np.array(item["stress"], dtype=np.float64),
                        config=cfg,
                    ),
                )
                for item in cell["ideals"]
            )
            cells.append(
                ReferenceCell(
                    prompt=int(cell["prompt"]),
                    group=int(cell["group"]),
                    mean=mean,
                    variation=float(cell["variation"]),
                    ideals=ideals,
                )
            )
        return ReferenceSet(
            config=cfg,
            threshold=float(doc["threshold"]),
            groups=tuple(doc["groups"]),
            cells=tuple(cells),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model file: {exc}") from exc


def save_reference_set(refs: ReferenceSet, path: str | Path) -> None:
    with open(path, "w") as handle:
        json.dump(reference_set_to_dict(refs), handle, indent=2)
        handle.write("\n")


def load_reference_set(path: str | Path) -> ReferenceSet:
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    return reference_set_from_dict(doc)
