"""Utterance comparison: DTW alignment and the distance triplet."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigMismatch, DimensionMismatch
from .features import FeatureBundle

# Aligned contours with variance below this are treated as constant.
DEGENERATE_VARIANCE = 1e-10

_DIAG, _VERT, _HORIZ = 1, 2, 3


@dataclass(frozen=True)
class Triplet:
    """Articulation distance plus pitch and stress similarities.

    id is a nonnegative length-normalized spectral distance; p and ir
    are correlations in [-1, 1]. Lower id and higher p/ir mean closer.
    """

    id: float
    p: float
    ir: float

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("id must be nonnegative")
        if not (-1.0 <= self.p <= 1.0 and -1.0 <= self.ir <= 1.0):
            raise ValueError("p and ir must lie in [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.id, self.p, self.ir)


@dataclass(frozen=True)
class AlignmentPath:
    """Monotone frame pairing with its accumulated weighted cost."""

    pairs: tuple[tuple[int, int], ...]
    cost: float


def dtw_align(a: np.ndarray, b: np.ndarray) -> AlignmentPath:
    """Globally optimal DTW alignment of two feature tracks.

    Per-cell cost is the Euclidean distance between frame vectors; step
    weights are 2 for a diagonal move and 1 for horizontal or vertical,
    with the start cell weighted like a diagonal entry so that the
    weights along any full path sum to len(a) + len(b). Ties during
    backtrace prefer diagonal, then vertical, then horizontal.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("cannot align an empty track")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"tracks have {a.shape[1]} and {b.shape[1]} coefficients per frame"
        )
    dist = np.sqrt(((a[:, np.newaxis, :] - b[np.newaxis, :, :]) ** 2).sum(axis=2))
    n, m = dist.shape
    d = dist.tolist()
    acc = [[0.0] * m for _ in range(n)]
    move = [[0] * m for _ in range(n)]
    acc[0][0] = 2.0 * d[0][0]
    for j in range(1, m):
        acc[0][j] = acc[0][j - 1] + d[0][j]
        move[0][j] = _HORIZ
    for i in range(1, n):
        acc[i][0] = acc[i - 1][0] + d[i][0]
        move[i][0] = _VERT
    for i in range(1, n):
        row = acc[i]
        above = acc[i - 1]
        costs = d[i]
        moves = move[i]
        for j in range(1, m):
            c = costs[j]
            diag = above[j - 1] + 2.0 * c
            vert = above[j] + c
            horiz = row[j - 1] + c
            if diag <= vert and diag <= horiz:
                row[j] = diag
                moves[j] = _DIAG
            elif vert <= horiz:
                row[j] = vert
                moves[j] = _VERT
            else:
                row[j] = horiz
                moves[j] = _HORIZ
    pairs = []
    i, j = n - 1, m - 1
    while True:
        pairs.append((i, j))
        step = move[i][j]
        if step == _DIAG:
            i, j = i - 1, j - 1
        elif step == _VERT:
            i -= 1
        elif step == _HORIZ:
            j -= 1
        else:
            break
    pairs.reverse()
    return AlignmentPath(pairs=tuple(pairs), cost=acc[n - 1][m - 1])


def _similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Pearson correlation with the degenerate-variance convention.

    Two flat contours are perfectly similar; a flat contour against a
    moving one is maximally uninformative and scores 0.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    var_u = float(np.var(u))
    var_v = float(np.var(v))
    u_flat = var_u < DEGENERATE_VARIANCE
    v_flat = var_v < DEGENERATE_VARIANCE
    if u_flat and v_flat:
        return 1.0
    if u_flat or v_flat:
        return 0.0
    du = u - u.mean()
    dv = v - v.mean()
    r = float(np.dot(du, dv) / np.sqrt(np.dot(du, du) * np.dot(dv, dv)))
    return min(max(r, -1.0), 1.0)


def compute_triplet(a: FeatureBundle, b: FeatureBundle) -> Triplet:
    """Compare two utterances along articulation, pitch, and stress.

    One spectral DTW alignment drives all three parts: id is the path
    cost divided by the summed frame counts, p correlates log-f0 over
    path pairs voiced on both sides (0 when fewer than two exist), and
    ir correlates the stress contours over every path pair.
    """
    if a.config != b.config:
        raise ConfigMismatch("feature bundles come from different frame configs")
    path = dtw_align(a.spectral, b.spectral)
    idx_a = np.fromiter((i for i, _ in path.pairs), dtype=int)
    idx_b = np.fromiter((j for _, j in path.pairs), dtype=int)
    id_dist = path.cost / (a.frame_count + b.frame_count)
    pitch_a = a.pitch[idx_a]
    pitch_b = b.pitch[idx_b]
    both_voiced = ~np.isnan(pitch_a) & ~np.isnan(pitch_b)
    if both_voiced.sum() < 2:
        p = 0.0
    else:
        p = _similarity(np.log(pitch_a[both_voiced]), np.log(pitch_b[both_voiced]))
    ir = _similarity(a.stress[idx_a], b.stress[idx_b])
    return Triplet(id=id_dist, p=p, ir=ir)
