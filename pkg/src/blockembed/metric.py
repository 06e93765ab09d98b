"""Finite metric spaces, greedy maximal nets, and embedding diagnostics.

A :class:`FiniteMetricSpace` is the universal input of the package: point
labels plus a validated square distance matrix.  The diagnostic side lives
here as well: compression and expansion moduli, distortion, and the
two-sided envelope verifier that certifies a map pair by pair.

Everything in this module is immutable after construction and every
operation is a pure function, so values can be shared freely across
threads.  Pair loops run in lexicographic index order so results are
bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "MetricError",
    "NegativeEntry",
    "AsymmetricMatrix",
    "NonzeroDiagonal",
    "ZeroOffDiagonal",
    "TriangleViolation",
    "SeedOutsideBall",
    "TooFewPoints",
    "LengthMismatch",
    "FiniteMetricSpace",
    "PointedSpace",
    "Net",
    "ModuliProfile",
    "PairRecord",
    "BoundsReport",
    "validate_metric",
    "greedy_maximal_net",
    "min_positive_distance",
    "moduli_profile",
    "distortion",
    "verify_bounds",
]


class MetricError(ValueError):
    """The input fails a metric-space requirement."""


class NegativeEntry(MetricError):
    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"negative distance d({i},{j}) = {value}")


class AsymmetricMatrix(MetricError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"matrix is asymmetric at ({i},{j})")


class NonzeroDiagonal(MetricError):
    def __init__(self, i: int, value: float):
        self.i, self.value = i, value
        super().__init__(f"nonzero diagonal d({i},{i}) = {value}")


class ZeroOffDiagonal(MetricError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"d({i},{j}) = 0 for distinct points {i} and {j}")


class TriangleViolation(MetricError):
    def __init__(self, i: int, j: int, k: int, lhs: float, rhs: float):
        self.i, self.j, self.k = i, j, k
        self.lhs, self.rhs = lhs, rhs
        super().__init__(
            f"triangle violation ({i},{j},{k}): d({i},{j}) = {lhs} "
            f"> d({i},{k}) + d({k},{j}) = {rhs}"
        )


class SeedOutsideBall(MetricError):
    def __init__(self, seed: int, center: int, radius: float):
        self.seed, self.center, self.radius = seed, center, radius
        super().__init__(f"seed {seed} lies outside ball B({center}, {radius})")


class TooFewPoints(MetricError):
    pass


class LengthMismatch(MetricError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Validated finite metric space: labels and a square distance matrix.

    Construct through :func:`validate_metric`; direct construction skips the
    full triangle check and only asserts the cheap shape invariants.
    """

    labels: tuple[str, ...]
    dist: np.ndarray

    def __post_init__(self):
        if self.dist.ndim != 2 or self.dist.shape[0] != self.dist.shape[1]:
            raise MetricError("distance matrix must be square")
        if len(self.labels) != self.dist.shape[0]:
            raise LengthMismatch("labels and matrix size differ")

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n_points else 0.0


@dataclass(frozen=True)
class PointedSpace:
    """A finite metric space with a distinguished basepoint.

    ``norms()`` returns the distance of every point to the basepoint; the
    basepoint itself has norm 0.
    """

    space: FiniteMetricSpace
    basepoint: int = 0

    def __post_init__(self):
        if not 0 <= self.basepoint < self.space.n_points:
            raise MetricError(f"basepoint {self.basepoint} out of range")

    def norms(self) -> np.ndarray:
        return self.space.dist[self.basepoint]


@dataclass(frozen=True)
class Net:
    """A radius-separated, radius-covering subset of a closed ball.

    ``members`` is ordered by admission (scan order), so iteration over a
    net is reproducible.  Separation means every two distinct members are
    at distance >= ``radius``; maximality means every ball point is within
    strict distance ``radius`` of some member.
    """

    members: tuple[int, ...]
    radius: float
    center: int
    ball_radius: float

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ModuliProfile:
    """Sampled compression (rho) and expansion (omega) moduli.

    compression[i] is the infimum of image distances over pairs at domain
    distance >= thresholds[i] (``math.inf`` when no pair qualifies);
    expansion[i] the supremum over pairs at distance <= thresholds[i]
    (0.0 when none).  Both are non-decreasing in the threshold.
    """

    thresholds: tuple[float, ...]
    compression: tuple[float, ...]
    expansion: tuple[float, ...]


@dataclass(frozen=True)
class PairRecord:
    """One pair's verification: envelope values and the observed distance."""

    i: int
    j: int
    d: float
    image_distance: float
    lower: float
    upper: float
    passed: bool


@dataclass(frozen=True)
class BoundsReport:
    """Outcome of an envelope check over all distinct pairs.

    Slack is signed margin: ``image_distance - lower`` on the lower side and
    ``upper - image_distance`` on the upper side.  The worst slacks are the
    minima over all recorded pairs; a negative worst slack beyond the
    tolerance means the check failed.
    """

    records: tuple[PairRecord, ...]
    worst_lower_slack: float
    worst_upper_slack: float
    empirical_distortion: float
    tolerance: float
    constants: Mapping[str, Any]
    passed: bool

    @property
    def n_pairs(self) -> int:
        return len(self.records)

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.records if not r.passed)

    def summary(self) -> dict[str, Any]:
        return {
            "pairs_total": self.n_pairs,
            "pairs_passed": self.n_pairs - self.n_failed,
            "pairs_failed": self.n_failed,
            "worst_lower_slack": self.worst_lower_slack,
            "worst_upper_slack": self.worst_upper_slack,
            "empirical_distortion": self.empirical_distortion,
            "tolerance": self.tolerance,
        }


def validate_metric(
    matrix: Any,
    labels: Sequence[str] | None = None,
    *,
    tol: float | None = None,
) -> FiniteMetricSpace:
    """Validate a square matrix as a finite metric and wrap it.

    Checks, in order: finite entries, non-negativity, symmetry, zero
    diagonal, no zero distance between distinct points, and the triangle
    inequality.  The triangle check allows absolute slack ``tol``; the
    default (``None``) scales it to 1e-12 times the largest entry, which
    absorbs the rounding noise of distances evaluated in floating point
    (exactly tight triangles are common in l_1 and l_inf point sets) while
    still catching any genuine violation.  Pass ``tol=0.0`` for an exact
    check.  The first offending entry in lexicographic index order is
    reported; the matrix is never repaired.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MetricError("matrix must be square")
    n = a.shape[0]
    if not np.all(np.isfinite(a)):
        raise MetricError("matrix entries must be finite")
    if tol is None:
        tol = 1e-12 * max(1.0, float(a.max(initial=0.0)))

    neg = np.argwhere(a < 0)
    if neg.size:
        i, j = map(int, neg[0])
        raise NegativeEntry(i, j, float(a[i, j]))

    asym = np.argwhere(a != a.T)
    if asym.size:
        i, j = map(int, asym[0])
        if i > j:
            i, j = j, i
        raise AsymmetricMatrix(i, j)

    diag = np.flatnonzero(np.diagonal(a) != 0)
    if diag.size:
        i = int(diag[0])
        raise NonzeroDiagonal(i, float(a[i, i]))

    zero = np.argwhere((a == 0) & ~np.eye(n, dtype=bool))
    if zero.size:
        i, j = map(int, zero[0])
        if i > j:
            i, j = j, i
        raise ZeroOffDiagonal(i, j)

    # First violating triple (i, j, k), meaning d(i,j) > d(i,k) + d(k,j).
    for i in range(n):
        excess = a[i][:, None] - a[i][None, :] - a.T
        excess[i, :] = -np.inf
        excess[:, i] = -np.inf
        np.fill_diagonal(excess, -np.inf)
        bad = np.argwhere(excess > tol)
        if bad.size:
            j, k = map(int, bad[0])
            raise TriangleViolation(i, j, k, float(a[i, j]), float(a[i, k] + a[k, j]))

    if labels is None:
        labels = tuple(f"p{i}" for i in range(n))
    else:
        if len(labels) != n:
            raise LengthMismatch("labels and matrix size differ")
        labels = tuple(str(s) for s in labels)
    a.setflags(write=False)
    return FiniteMetricSpace(labels, a)


def greedy_maximal_net(
    space: FiniteMetricSpace,
    ball: tuple[int, float],
    net_radius: float,
    seed: int,
) -> Net:
    """Greedy maximal ``net_radius``-net of a closed ball, seed forced first.

    Scan order is the input index order.  A candidate is admitted iff its
    distance to every member admitted so far is >= ``net_radius`` (a tie at
    exactly the radius is admitted).  The result is then automatically
    maximal: every ball point sits strictly within ``net_radius`` of a
    member.
    """
    center, ball_radius = ball
    if net_radius <= 0:
        raise MetricError("net radius must be positive")
    d = space.dist
    if not 0 <= seed < space.n_points or not 0 <= center < space.n_points:
        raise MetricError("seed or center index out of range")
    if d[seed, center] > ball_radius:
        raise SeedOutsideBall(seed, center, ball_radius)

    members = [seed]
    for i in range(space.n_points):
        if i == seed or d[i, center] > ball_radius:
            continue
        if np.all(d[i, members] >= net_radius):
            members.append(i)
    return Net(tuple(members), float(net_radius), center, float(ball_radius))


def min_positive_distance(space: FiniteMetricSpace) -> float:
    """Minimum distance over distinct pairs."""
    if space.n_points < 2:
        raise TooFewPoints("need at least two points")
    off = space.dist[~np.eye(space.n_points, dtype=bool)]
    return float(off.min())


def _image_distance_matrix(
    n: int,
    images: Sequence[Any] | None,
    image_dist: Callable[[Any, Any], float] | None,
    image_distances: np.ndarray | None,
) -> np.ndarray:
    if image_distances is not None:
        m = np.asarray(image_distances, dtype=float)
        if m.shape != (n, n):
            raise LengthMismatch("image distance matrix has wrong shape")
        return m
    if images is None:
        raise LengthMismatch("either images or image_distances is required")
    if len(images) != n:
        raise LengthMismatch(f"{len(images)} images for {n} points")
    f = image_dist if image_dist is not None else _euclidean
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = f(images[i], images[j])
    return m


def _euclidean(u: Any, v: Any) -> float:
    return float(np.linalg.norm(np.asarray(u, dtype=float) - np.asarray(v, dtype=float)))


def moduli_profile(
    domain: FiniteMetricSpace,
    images: Sequence[Any] | None,
    thresholds: Sequence[float],
    *,
    image_dist: Callable[[Any, Any], float] | None = None,
    image_distances: np.ndarray | None = None,
) -> ModuliProfile:
    """Sample the compression and expansion moduli on a threshold grid.

    For each threshold t, compression is the infimum of image distances
    over distinct pairs with d >= t and expansion the supremum over pairs
    with d <= t.  An empty infimum is reported as ``math.inf`` (the
    "unbounded" marker), an empty supremum as 0.0.
    """
    ts = [float(t) for t in thresholds]
    if any(t < 0 for t in ts):
        raise MetricError("thresholds must be non-negative")
    ts.sort()
    n = domain.n_points
    m = _image_distance_matrix(n, images, image_dist, image_distances)

    iu = np.triu_indices(n, k=1)
    dd = domain.dist[iu]
    ii = m[iu]
    compression = []
    expansion = []
    for t in ts:
        above = ii[dd >= t]
        compression.append(float(above.min()) if above.size else math.inf)
        below = ii[dd <= t]
        expansion.append(float(below.max()) if below.size else 0.0)
    return ModuliProfile(tuple(ts), tuple(compression), tuple(expansion))


def distortion(
    domain: FiniteMetricSpace,
    images: Sequence[Any] | None,
    *,
    image_dist: Callable[[Any, Any], float] | None = None,
    image_distances: np.ndarray | None = None,
) -> float:
    """Product of the two Lipschitz constants of the map and its inverse.

    Scale-invariant; ``math.inf`` when two distinct points share an image.
    """
    n = domain.n_points
    m = _image_distance_matrix(n, images, image_dist, image_distances)
    iu = np.triu_indices(n, k=1)
    dd = domain.dist[iu]
    ii = m[iu]
    if dd.size == 0:
        raise TooFewPoints("need at least two points")
    if np.any(ii == 0):
        return math.inf
    return float(np.max(ii / dd) * np.max(dd / ii))


def verify_bounds(
    domain: FiniteMetricSpace,
    images: Sequence[Any] | None,
    lower_envelope: Callable[[float], float],
    upper_envelope: Callable[[float], float],
    *,
    tolerance: float = 1e-9,
    image_dist: Callable[[Any, Any], float] | None = None,
    image_distances: np.ndarray | None = None,
    constants: Mapping[str, Any] | None = None,
) -> BoundsReport:
    """Check lower(d) - tol <= image distance <= upper(d) + tol on all pairs.

    The tolerance is an absolute two-sided slack.  Failures are report
    content, never exceptions.  Records are emitted in lexicographic pair
    order; worst slacks are the minima over all pairs.
    """
    n = domain.n_points
    m = _image_distance_matrix(n, images, image_dist, image_distances)

    records = []
    worst_lo = math.inf
    worst_hi = math.inf
    any_zero = False
    max_exp = 0.0
    max_inv = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = float(domain.dist[i, j])
            v = float(m[i, j])
            lo = float(lower_envelope(d))
            hi = float(upper_envelope(d))
            slack_lo = v - lo
            slack_hi = hi - v
            ok = slack_lo >= -tolerance and slack_hi >= -tolerance
            records.append(PairRecord(i, j, d, v, lo, hi, ok))
            worst_lo = min(worst_lo, slack_lo)
            worst_hi = min(worst_hi, slack_hi)
            if v == 0:
                any_zero = True
            else:
                max_inv = max(max_inv, d / v)
            max_exp = max(max_exp, v / d)

    emp = math.inf if any_zero else (max_exp * max_inv if records else 1.0)
    passed = all(r.passed for r in records)
    return BoundsReport(
        records=tuple(records),
        worst_lower_slack=worst_lo if records else 0.0,
        worst_upper_slack=worst_hi if records else 0.0,
        empirical_distortion=emp,
        tolerance=float(tolerance),
        constants=dict(constants) if constants else {},
        passed=passed,
    )
