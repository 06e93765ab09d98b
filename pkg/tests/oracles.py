"""Independent brute-force oracles used to cross-check the library.

Everything here is deliberately written with plain Python loops over lists
and ``math`` calls, so it shares no code path with the production
implementations it checks.
"""

from __future__ import annotations

import math


def brute_inner(values, p):
    vals = [abs(v) for v in values]
    if not vals:
        return 0.0
    if math.isinf(p):
        return max(vals)
    total = 0.0
    for v in vals:
        total += v**p
    return total ** (1.0 / p)


def brute_agg(norms, p):
    if not norms:
        return 0.0
    if math.isinf(p):
        return max(norms)
    total = 0.0
    for v in norms:
        total += v**p
    return total ** (1.0 / p)


def brute_lp_dist(x, y, p):
    return brute_inner([a - b for a, b in zip(x, y)], p)


def brute_block_distance(u, v, inner_p, outer_p):
    """Distance between two BlockVectors via nested python loops."""
    ids = sorted(set(u.blocks) | set(v.blocks))
    norms = []
    for j in ids:
        x = u.blocks.get(j)
        y = v.blocks.get(j)
        xl = list(map(float, x)) if x is not None else [0.0] * len(y)
        yl = list(map(float, y)) if y is not None else [0.0] * len(x)
        norms.append(brute_inner([a - b for a, b in zip(xl, yl)], inner_p))
    return brute_agg(norms, outer_p)


def brute_pair_distances(images, inner_p, outer_p):
    """Full pairwise image distance matrix as nested lists."""
    n = len(images)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = brute_block_distance(images[i], images[j], inner_p, outer_p)
            out[i][j] = out[j][i] = d
    return out


def brute_triangle_violation(matrix, tol=0.0):
    """First (i, j, k) with d(i,j) > d(i,k) + d(k,j) + tol, or None."""
    n = len(matrix)
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                if k == i or k == j:
                    continue
                if matrix[i][j] > matrix[i][k] + matrix[k][j] + tol:
                    return (i, j, k)
    return None


def brute_net_check(matrix, members, center, ball_radius, radius, seed):
    """(seeded, separated, maximal) flags for a claimed net."""
    n = len(matrix)
    seeded = members[0] == seed
    separated = True
    for a in members:
        for b in members:
            if a != b and matrix[a][b] < radius:
                separated = False
    maximal = True
    for i in range(n):
        if matrix[i][center] > ball_radius:
            continue
        if not any(matrix[i][m] < radius for m in members):
            maximal = False
    return seeded, separated, maximal


def brute_moduli(dmat, imat, thresholds):
    """(compression, expansion) lists over distinct pairs, non-strict."""
    n = len(dmat)
    pairs = [(dmat[i][j], imat[i][j]) for i in range(n) for j in range(i + 1, n)]
    compression = []
    expansion = []
    for t in thresholds:
        above = [img for d, img in pairs if d >= t]
        compression.append(min(above) if above else math.inf)
        below = [img for d, img in pairs if d <= t]
        expansion.append(max(below) if below else 0.0)
    return compression, expansion


def brute_distortion(dmat, imat):
    n = len(dmat)
    expand = 0.0
    invert = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if imat[i][j] == 0.0:
                return math.inf
            expand = max(expand, imat[i][j] / dmat[i][j])
            invert = max(invert, dmat[i][j] / imat[i][j])
    return expand * invert


def brute_worst_slacks(dmat, imat, lower, upper):
    """(worst lower slack, worst upper slack) over distinct pairs."""
    n = len(dmat)
    lo = math.inf
    hi = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            lo = min(lo, imat[i][j] - lower(dmat[i][j]))
            hi = min(hi, upper(dmat[i][j]) - imat[i][j])
    return lo, hi


def weight_series_partial(terms):
    """sum_{m in Z} 1/(m^2+1) summed to |m| <= terms, plus an integral tail bracket.

    The tail sum over m > M is bracketed by integrals of 1/(x^2+1); the
    midpoint of the bracket is accurate to its half-width, well under 1e-10
    for a million terms.
    """
    partial = 1.0
    acc = 0.0
    for m in range(terms, 0, -1):  # ascending magnitude keeps rounding tame
        acc += 1.0 / (m * m + 1.0)
    tail_hi = math.pi / 2 - math.atan(terms)
    tail_lo = math.pi / 2 - math.atan(terms + 1)
    tail = (tail_hi + tail_lo) / 2.0
    return partial + 2.0 * (acc + tail), (tail_hi - tail_lo) / 2.0
