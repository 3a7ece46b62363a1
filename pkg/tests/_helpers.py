"""Independent oracles and bundle builders shared by the test suite."""

import math

import numpy as np

from speechstyle import FeatureBundle, FrameConfig, compute_triplet, scalarize

DEFAULT_CFG = FrameConfig()


def make_bundle(rng, frames, ceps=3, voiced_prob=1.0, cfg=DEFAULT_CFG):
    """Random but smooth feature tracks, shaped like real extractions."""
    spectral = np.cumsum(rng.normal(scale=0.8, size=(frames, ceps)), axis=0)
    f0 = np.clip(
        120.0 * 2.0 ** (np.cumsum(rng.normal(scale=0.4, size=frames)) / 12.0),
        60.0,
        480.0,
    )
    pitch = np.where(rng.random(frames) < voiced_prob, f0, np.nan)
    stress = np.cumsum(rng.normal(scale=1.5, size=frames)) - 25.0
    return FeatureBundle(spectral=spectral, pitch=pitch, stress=stress, config=cfg)


def euclid(u, v):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(u, v)))


def brute_force_dtw_cost(a, b):
    """Minimum path cost by enumerating every monotone path.

    The start cell and diagonal steps weigh their cell cost by 2,
    horizontal and vertical steps by 1, matching the alignment's step
    pattern. Costs accumulate left to right along the path so a DP that
    sums the same way must agree bit for bit.
    """
    n, m = len(a), len(b)
    d = [[euclid(a[i], b[j]) for j in range(m)] for i in range(n)]
    best = [math.inf]

    def walk(i, j, acc):
        if i == n - 1 and j == m - 1:
            if acc < best[0]:
                best[0] = acc
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc + 2.0 * d[i + 1][j + 1])
        if i + 1 < n:
            walk(i + 1, j, acc + d[i + 1][j])
        if j + 1 < m:
            walk(i, j + 1, acc + d[i][j + 1])

    walk(0, 0, 2.0 * d[0][0])
    return best[0]


def quadruple_loop_average(bundles):
    """Literal ordered-pair average, diagonal included, divisor N*N."""
    n = len(bundles)
    s_id = s_p = s_ir = 0.0
    for k in range(n):
        for l in range(n):
            t = compute_triplet(bundles[k], bundles[l])
            s_id += t.id
            s_p += t.p
            s_ir += t.ir
    return (s_id / (n * n), s_p / (n * n), s_ir / (n * n))


def ordered_pair_scalar_std(bundles, norm):
    """Population standard deviation of scalars over ordered pairs k != l."""
    n = len(bundles)
    scalars = []
    for k in range(n):
        for l in range(n):
            if k != l:
                scalars.append(scalarize(compute_triplet(bundles[k], bundles[l]), norm))
    return float(np.std(scalars)) if scalars else 0.0
