"""Sparse block vectors and the block-sum sequence space they live in.

The embedding codomain is modeled concretely: a direct sum of
finite-dimensional blocks, each carrying an inner l_p norm, aggregated by
an outer rule that is either a supremum (the c0-style model) or an l_p sum.
Coordinate projections onto a single block then have norm one, strictly
inside the hypotheses the distance envelopes were derived under, so every
certified bound must hold a fortiori.

Block isomorphism slack is modeled by per-block scale factors theta_j in a
configurable interval of (0, 1]; the seeded mode derives theta_j from a
counter-based generator keyed by (seed, j), so factors are reproducible and
independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "NonpositiveK",
    "DimensionMismatch",
    "NormSpec",
    "BlockVector",
    "BlockIsoModel",
    "PairingSpec",
    "pair_index",
    "unpair_index",
    "inner_norm",
    "outer_norm",
    "project_block",
    "axpy",
    "scale_block",
    "block_distance",
    "pairwise_distance_matrix",
]

_THETA_TAG = 101  # stream tag separating theta draws from other consumers


class NonpositiveK(ValueError):
    pass


class DimensionMismatch(ValueError):
    def __init__(self, block_id: int, a: int, b: int):
        self.block_id = block_id
        super().__init__(f"block {block_id}: dimensions {a} and {b} differ")


def pair_index(n: int, k: int) -> int:
    """Bijection (n, k) in Z x {1,2,...} -> non-negative block id.

    Zigzag the integer n onto the naturals (z = 2n for n >= 0, z = -2n - 1
    for n < 0), then Cantor-pair with k - 1:
    C(z, k-1) = (z + k - 1)(z + k) / 2 + (k - 1).
    """
    if k < 1:
        raise NonpositiveK(f"k must be >= 1, got {k}")
    z = 2 * n if n >= 0 else -2 * n - 1
    s = z + k - 1
    return s * (s + 1) // 2 + (k - 1)


def unpair_index(j: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    if j < 0:
        raise ValueError(f"block id must be non-negative, got {j}")
    w = (math.isqrt(8 * j + 1) - 1) // 2
    km1 = j - w * (w + 1) // 2
    z = w - km1
    n = z // 2 if z % 2 == 0 else -(z + 1) // 2
    return n, km1 + 1


@dataclass(frozen=True)
class PairingSpec:
    """Marker for the (shell, level) -> block id bijection in force.

    Exactly one convention exists, fixed forever so block layouts stay
    reproducible across versions; ``index``/``unindex`` expose it.
    """

    convention: str = "zigzag-cantor"

    def __post_init__(self):
        if self.convention != "zigzag-cantor":
            raise ValueError(f"unknown pairing convention {self.convention!r}")

    def index(self, n: int, k: int) -> int:
        return pair_index(n, k)

    def unindex(self, j: int) -> tuple[int, int]:
        return unpair_index(j)


@dataclass(frozen=True)
class NormSpec:
    """Outer aggregation exponent and inner per-block exponent, both in [1, inf].

    ``outer_p = inf`` is the sup-sum rule; any other value is an l_p sum of
    the per-block inner norms.
    """

    outer_p: float = math.inf
    inner_p: float = math.inf

    def __post_init__(self):
        for p in (self.outer_p, self.inner_p):
            if not (p >= 1):
                raise ValueError(f"norm exponent must lie in [1, inf], got {p}")

    @classmethod
    def sup_sum(cls) -> "NormSpec":
        return cls(math.inf, math.inf)

    @classmethod
    def lp_sum(cls, p: float) -> "NormSpec":
        return cls(float(p), float(p))


class BlockVector:
    """Sparse map from block id to a finite real coordinate vector.

    Canonical sparsity is enforced at construction: zero blocks are
    dropped, ids are kept in ascending order, and the stored arrays are
    read-only.  Instances compare by exact coordinate equality.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Mapping[int, Any] | None = None):
        canonical: dict[int, np.ndarray] = {}
        if blocks:
            for j in sorted(blocks):
                if not isinstance(j, (int, np.integer)) or j < 0:
                    raise ValueError(f"block id must be a non-negative integer, got {j!r}")
                v = np.asarray(blocks[j], dtype=float)
                if v.ndim == 0:
                    v = v.reshape(1)
                if v.ndim != 1:
                    raise ValueError(f"block {j} must be a 1-D vector")
                if not np.any(v):
                    continue
                v = v.copy()
                v.setflags(write=False)
                canonical[int(j)] = v
        object.__setattr__(self, "blocks", canonical)

    @classmethod
    def empty(cls) -> "BlockVector":
        return cls()

    @property
    def block_ids(self) -> tuple[int, ...]:
        return tuple(self.blocks)

    def get(self, j: int) -> np.ndarray | None:
        return self.blocks.get(j)

    @property
    def is_zero(self) -> bool:
        return not self.blocks

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockVector):
            return NotImplemented
        if self.blocks.keys() != other.blocks.keys():
            return False
        return all(np.array_equal(self.blocks[j], other.blocks[j]) for j in self.blocks)

    def __hash__(self):
        return hash(tuple((j, v.tobytes()) for j, v in self.blocks.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{j}: dim {len(v)}" for j, v in self.blocks.items())
        return f"BlockVector({{{inner}}})"


def inner_norm(x: np.ndarray, p: float) -> float:
    """l_p norm of a plain vector, p in [1, inf]."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.abs(x).max())
    if p == 1:
        return float(np.abs(x).sum())
    if p == 2:
        return float(np.linalg.norm(x))
    return float((np.abs(x) ** p).sum() ** (1.0 / p))


def _aggregate(norms: Iterable[float], p: float) -> float:
    vals = list(norms)
    if not vals:
        return 0.0
    if math.isinf(p):
        return max(vals)
    if p == 1:
        return float(sum(vals))
    return float(sum(v**p for v in vals) ** (1.0 / p))


def outer_norm(v: BlockVector, spec: NormSpec) -> float:
    """Norm of a block vector: per-block inner norms fed to the outer rule."""
    return _aggregate((inner_norm(x, spec.inner_p) for x in v.blocks.values()), spec.outer_p)


def project_block(v: BlockVector, j: int) -> BlockVector:
    """Coordinate projection onto block ``j`` (empty when absent); idempotent."""
    x = v.blocks.get(j)
    return BlockVector({j: x}) if x is not None else BlockVector.empty()


def axpy(a: float, v: BlockVector, b: float, w: BlockVector) -> BlockVector:
    """Pointwise a*v + b*w with canonical sparsity restored."""
    out: dict[int, np.ndarray] = {}
    for j in sorted(v.blocks.keys() | w.blocks.keys()):
        x = v.blocks.get(j)
        y = w.blocks.get(j)
        if x is not None and y is not None:
            if len(x) != len(y):
                raise DimensionMismatch(j, len(x), len(y))
            out[j] = a * x + b * y
        elif x is not None:
            out[j] = a * x
        else:
            out[j] = b * y
    return BlockVector(out)


def scale_block(a: float, v: BlockVector) -> BlockVector:
    """a * v, canonically sparse."""
    return axpy(a, v, 0.0, BlockVector.empty())


def block_distance(u: BlockVector, v: BlockVector, spec: NormSpec) -> float:
    """Norm of u - v without materializing the difference vector."""
    norms = []
    # ascending ids fix the summation order, keeping results bit-stable
    for j in sorted(u.blocks.keys() | v.blocks.keys()):
        x = u.blocks.get(j)
        y = v.blocks.get(j)
        if x is None:
            norms.append(inner_norm(y, spec.inner_p))
        elif y is None:
            norms.append(inner_norm(x, spec.inner_p))
        else:
            if len(x) != len(y):
                raise DimensionMismatch(j, len(x), len(y))
            norms.append(inner_norm(x - y, spec.inner_p))
    return _aggregate(norms, spec.outer_p)


def pairwise_distance_matrix(images: Sequence[BlockVector], spec: NormSpec) -> np.ndarray:
    """All pairwise image distances, vectorized block by block.

    Equivalent to calling :func:`block_distance` on every pair; used on the
    hot verification paths.  The diagonal is exactly zero and the matrix is
    exactly symmetric.
    """
    n = len(images)
    dims: dict[int, int] = {}
    for v in images:
        for j, x in v.blocks.items():
            d = dims.setdefault(j, len(x))
            if d != len(x):
                raise DimensionMismatch(j, d, len(x))

    out = np.zeros((n, n))
    acc = None if math.isinf(spec.outer_p) else np.zeros((n, n))
    for j in sorted(dims):
        x = np.zeros((n, dims[j]))
        for i, v in enumerate(images):
            blk = v.blocks.get(j)
            if blk is not None:
                x[i] = blk
        diff = np.abs(x[:, None, :] - x[None, :, :])
        if math.isinf(spec.inner_p):
            dj = diff.max(axis=-1)
        elif spec.inner_p == 1:
            dj = diff.sum(axis=-1)
        elif spec.inner_p == 2:
            dj = np.sqrt((diff * diff).sum(axis=-1))
        else:
            dj = (diff**spec.inner_p).sum(axis=-1) ** (1.0 / spec.inner_p)
        if acc is None:
            np.maximum(out, dj, out=out)
        elif spec.outer_p == 1:
            acc += dj
        else:
            acc += dj**spec.outer_p
    if acc is not None:
        out = acc if spec.outer_p == 1 else acc ** (1.0 / spec.outer_p)
    np.fill_diagonal(out, 0.0)
    return out


@dataclass
class BlockIsoModel:
    """Per-block scale factors theta_j modeling block isomorphism slack.

    Modes: ``exact`` (theta_j = 1), ``fixed-factor`` (theta_j = theta_lo for
    every block), ``seeded-random`` (theta_j drawn uniformly from
    [theta_lo, theta_hi], keyed by (seed, j) so the draw is independent of
    evaluation order).  The interval must lie inside (0, 1].
    """

    mode: str = "exact"
    theta_lo: float = 1.0
    theta_hi: float = 1.0
    seed: int = 0
    _cache: dict[int, float] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("exact", "fixed-factor", "seeded-random"):
            raise ValueError(f"unknown iso mode {self.mode!r}")
        if not (0.0 < self.theta_lo <= self.theta_hi <= 1.0):
            raise ValueError("theta interval must satisfy 0 < lo <= hi <= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def exact(cls) -> "BlockIsoModel":
        return cls("exact", 1.0, 1.0, 0)

    @classmethod
    def seeded(cls, theta_lo: float, theta_hi: float, seed: int) -> "BlockIsoModel":
        return cls("seeded-random", theta_lo, theta_hi, seed)

    def factor(self, j: int) -> float:
        if self.mode == "exact":
            return 1.0
        if self.mode == "fixed-factor":
            return self.theta_lo
        th = self._cache.get(j)
        if th is None:
            rng = np.random.default_rng([self.seed, _THETA_TAG, int(j)])
            th = float(rng.uniform(self.theta_lo, self.theta_hi))
            self._cache[j] = th
        return th
