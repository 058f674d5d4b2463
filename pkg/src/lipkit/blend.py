"""Partition-of-unity blending of local extensions.

The locally Lipschitz extension pipeline: split the anchor set into pieces
on which the values are Lipschitz, extend each piece with its own exact
constant, and glue the pieces with a partition of unity subordinated to a
cover of the whole space whose trace on the anchors reproduces the pieces.
The blend then agrees with the source at every anchor and is locally
Lipschitz wherever the weights are.

The bounded-range and unbounded variants follow: multiply by a clamp that
is 1 on the anchors and 0 where the blend leaves ``(-M, M)``, or conjugate
by arctan / tan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AdmissibilityError,
    ArgumentError,
    InconsistencyError,
    UncoveredPointError,
)
from .evaluable import ConstantFunction, Evaluable
from .extension import (
    AUTO,
    MIDPOINT,
    ExtensionSpec,
    MWExtension,
    compress,
    decompress,
)
from .metric import AnchoredFunction, Ball, as_points, cross_distances, set_distances
from .partition import (
    BallUnionSet,
    Cover,
    CoverSet,
    PartitionOfUnity,
    SubsetSet,
    build_partition,
)


@dataclass(frozen=True)
class BlendSpec:
    """A partition plus one piece per cover set."""

    partition: PartitionOfUnity
    pieces: tuple[Evaluable, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != self.partition.size:
            raise ArgumentError(
                f"{len(self.pieces)} pieces for a {self.partition.size}-set partition"
            )


class BlendedFunction(Evaluable):
    """``sum_n xi_n(x) * piece_n(x)``, evaluating only the active pieces.

    When every active piece takes the same value at a point, that common
    value is returned exactly rather than through the weighted sum.
    """

    def __init__(self, spec: BlendSpec) -> None:
        self.spec = spec
        self.domain = spec.partition.cover.domain

    @property
    def partition(self) -> PartitionOfUnity:
        return self.spec.partition

    @property
    def pieces(self) -> tuple[Evaluable, ...]:
        return self.spec.pieces

    def batch(self, points) -> np.ndarray:
        pts = as_points(self.domain, points)
        weights = self.spec.partition.xi(pts)
        values = np.zeros_like(weights)
        for k, piece in enumerate(self.spec.pieces):
            active = np.nonzero(weights[:, k] > 0.0)[0]
            if active.size:
                values[active, k] = piece.batch(pts[active])
        out = np.einsum("ij,ij->i", weights, values)
        # Exact agreement when all active pieces coincide.
        masked = np.where(weights > 0.0, values, np.nan)
        lo = np.nanmin(masked, axis=1)
        hi = np.nanmax(masked, axis=1)
        agree = lo == hi
        out[agree] = lo[agree]
        return out


def blend_eval(spec: BlendSpec, point) -> float:
    """Blend value at one covered point."""
    return BlendedFunction(spec)(point)


def _as_anchor_subsets(subdomain_cover, source: AnchoredFunction) -> list[tuple[int, ...]]:
    """Normalise a cover of the anchor set to positions into ``source.anchors``."""
    if isinstance(subdomain_cover, Cover):
        subsets = []
        for s in subdomain_cover.sets:
            if not isinstance(s, SubsetSet):
                raise ArgumentError("a cover of the anchor set must consist of subset sets")
            subsets.append(s.indices)
    else:
        subsets = [tuple(int(i) for i in idx) for idx in subdomain_cover]
    seen: set[int] = set()
    for idx in subsets:
        for i in idx:
            if not 0 <= i < source.n:
                raise ArgumentError(f"anchor position {i} out of range 0..{source.n - 1}")
            seen.add(i)
    if seen != set(range(source.n)):
        missing = sorted(set(range(source.n)) - seen)[0]
        raise UncoveredPointError(source.anchors[missing])
    return subsets


def inflate_anchor_cover(
    source: AnchoredFunction, subsets: Sequence[Sequence[int]]
) -> Cover:
    """Grow each anchor subset into an open set whose trace on the anchors is the subset.

    On a continuum, each anchor of a subset gets a ball of radius half its
    distance to the anchors outside the subset (an infinite ball when there
    are none), so no outside anchor is captured and every subset anchor lies
    strictly inside its own ball.  On an explicit domain every subset of
    points is open, so the non-anchor points are adjoined to every nonempty
    piece instead, which keeps the traces exact and covers the whole space.
    """
    sets: list[CoverSet] = []
    if source.domain.is_explicit:
        anchor_idx = [int(a) for a in source.anchors]
        complement = sorted(set(range(source.domain.n_points)) - set(anchor_idx))
        for idx in subsets:
            if not idx:
                sets.append(SubsetSet(()))
                continue
            members = sorted({anchor_idx[i] for i in idx} | set(complement))
            sets.append(SubsetSet(tuple(members)))
        return Cover(source.domain, tuple(sets))
    for idx in subsets:
        idx = list(idx)
        if not idx:
            sets.append(BallUnionSet(()))
            continue
        rest = sorted(set(range(source.n)) - set(idx))
        balls = []
        for i in idx:
            if rest:
                r = float(
                    cross_distances(
                        source.domain, source.anchors[[i]], source.anchors[rest]
                    ).min()
                ) / 2.0
            else:
                r = math.inf
            balls.append(Ball(source.anchors[i], r))
        sets.append(BallUnionSet(tuple(balls)))
    return Cover(source.domain, tuple(sets), samples=source.anchors)


def _check_trace(full_cover: Cover, source: AnchoredFunction,
                 subsets: Sequence[Sequence[int]]) -> None:
    """Each full-cover set must contain exactly its subset's anchors."""
    for k, s in enumerate(full_cover.sets):
        inside = s.member_mask(full_cover.domain, source.anchors)
        expected = np.zeros(source.n, dtype=bool)
        expected[list(subsets[k])] = True
        if not np.array_equal(inside, expected):
            bad = int(np.nonzero(inside != expected)[0][0])
            raise ArgumentError(
                f"full cover set {k + 1} disagrees with its anchor subset at anchor {bad}"
            )


def extend_locally_lipschitz(
    source: AnchoredFunction,
    subdomain_cover,
    full_cover: Cover | None = None,
    piece_mode: str = MIDPOINT,
    piece_lam=AUTO,
) -> BlendedFunction:
    """Blend per-piece extensions through a partition subordinated to ``full_cover``.

    ``subdomain_cover`` lists anchor positions per piece (or is a subset-set
    cover); each nonempty piece is extended with ``piece_lam``, by default
    its exact pairwise constant.  When ``full_cover`` is omitted the anchor
    subsets are inflated into ball unions.  The result agrees with the
    source values at every anchor.
    """
    subsets = _as_anchor_subsets(subdomain_cover, source)
    if full_cover is None:
        full_cover = inflate_anchor_cover(source, subsets)
    else:
        if full_cover.size != len(subsets):
            raise ArgumentError("full cover and anchor cover must have equal length")
        _check_trace(full_cover, source, subsets)

    pieces: list[Evaluable] = []
    for k, idx in enumerate(subsets):
        if not idx:
            pieces.append(ConstantFunction(0.0, source.domain))
            continue
        piece_source = source.restrict(list(idx))
        try:
            spec = ExtensionSpec(piece_source, piece_mode, piece_lam)
        except AdmissibilityError as exc:
            raise AdmissibilityError(
                f"piece {k + 1} is not admissible: {exc}", exc.witness
            ) from exc
        pieces.append(MWExtension(spec))

    partition = build_partition(full_cover)
    return BlendedFunction(BlendSpec(partition, tuple(pieces)))


class ClampFunction(Evaluable):
    """``m(x) / (m(x) + d(x, A))``: 1 on the anchor set, 0 off the open set.

    ``m`` is the distance to the complement of the open set, assembled from
    optional cover sets (their margin surrogate) and optional explicit
    outside points.  With neither, the open set is the whole space and the
    clamp is constantly 1.
    """

    def __init__(
        self,
        anchors: np.ndarray,
        domain,
        inside_sets: Sequence[CoverSet] = (),
        outside_points: np.ndarray | None = None,
    ) -> None:
        self.domain = domain
        self.anchor_points = as_points(domain, anchors)
        self.inside_sets = tuple(inside_sets)
        self.outside_points = (
            None if outside_points is None or len(outside_points) == 0
            else as_points(domain, outside_points)
        )

    def complement_distance(self, points) -> np.ndarray:
        pts = as_points(self.domain, points)
        if not self.inside_sets and self.outside_points is None:
            return np.full(pts.shape[0], np.inf)
        if self.inside_sets:
            m = np.zeros(pts.shape[0])
            for s in self.inside_sets:
                np.maximum(m, s.complement_distance(self.domain, pts), out=m)
        else:
            m = np.full(pts.shape[0], np.inf)
        if self.outside_points is not None:
            np.minimum(m, set_distances(self.domain, pts, self.outside_points), out=m)
        return m

    def batch(self, points) -> np.ndarray:
        pts = as_points(self.domain, points)
        m = self.complement_distance(pts)
        da = set_distances(self.domain, pts, self.anchor_points)
        out = np.empty(pts.shape[0])
        far = np.isinf(m)
        out[far] = 1.0
        both_zero = (m == 0.0) & (da == 0.0)
        if np.any(both_zero):
            raise InconsistencyError(
                "clamp undefined: point lies in the anchor set and outside the open set"
            )
        rest = ~far
        out[rest] = m[rest] / (m[rest] + da[rest])
        return out


def clamp_function(
    open_set: CoverSet | None,
    anchors: AnchoredFunction | np.ndarray,
    point,
    domain=None,
) -> float:
    """Clamp value at one point; ``open_set=None`` means the whole space."""
    if isinstance(anchors, AnchoredFunction):
        domain = anchors.domain
        anchor_pts = anchors.anchors
    else:
        if domain is None:
            raise ArgumentError("clamp_function needs a domain when given bare anchors")
        anchor_pts = anchors
    sets = () if open_set is None else (open_set,)
    return ClampFunction(anchor_pts, domain, sets)(point)


class GatedProduct(Evaluable):
    """``gate(x) * inner(x)``, skipping ``inner`` where the gate vanishes."""

    def __init__(self, gate: Evaluable, inner: Evaluable) -> None:
        self.gate = gate
        self.inner = inner
        self.domain = inner.domain

    def batch(self, points) -> np.ndarray:
        pts = as_points(self.domain, points)
        g = self.gate.batch(pts)
        out = np.zeros(pts.shape[0])
        live = np.nonzero(g != 0.0)[0]
        if live.size:
            out[live] = g[live] * self.inner.batch(pts[live])
        return out


def extend_range_bounded(
    source: AnchoredFunction,
    subdomain_cover,
    bound: float,
    full_cover: Cover | None = None,
    extra_samples=None,
    piece_mode: str = MIDPOINT,
) -> GatedProduct:
    """Locally Lipschitz extension into ``(-M, M)``.

    Builds the unbounded blend, locates the sampled region where it leaves
    ``(-M, M)`` (including points outside the cover), and multiplies by the
    clamp that is 1 on the anchors and 0 there.
    """
    if not bound > 0:
        raise ArgumentError(f"bound must be positive, got {bound!r}")
    hi = float(np.abs(source.values).max())
    if hi >= bound:
        raise ArgumentError(
            f"bound M = {bound!r} must strictly dominate |values| (max |phi| = {hi!r})"
        )
    blend = extend_locally_lipschitz(source, subdomain_cover, full_cover, piece_mode)
    cover = blend.partition.cover

    samples = [source.anchors]
    if cover.samples is not None:
        samples.append(cover.samples)
    if extra_samples is not None:
        samples.append(as_points(source.domain, extra_samples))
    if source.domain.is_explicit:
        samples.append(np.arange(source.domain.n_points))
    pts = np.concatenate(samples, axis=0)

    margins = cover.margins(pts)
    covered = margins.max(axis=1) > 0.0
    violating = ~covered
    if np.any(covered):
        inside = np.nonzero(covered)[0]
        vals = blend.batch(pts[inside])
        violating[inside[np.abs(vals) >= bound]] = True

    gate = ClampFunction(
        source.anchors,
        source.domain,
        inside_sets=cover.sets,
        outside_points=pts[violating] if np.any(violating) else None,
    )
    return GatedProduct(gate, blend)


class CompressedExtension(Evaluable):
    """Unbounded locally Lipschitz extension via arctan / bounded blend / tan."""

    def __init__(
        self,
        source: AnchoredFunction,
        subdomain_cover,
        full_cover: Cover | None = None,
        extra_samples=None,
        piece_mode: str = MIDPOINT,
    ) -> None:
        squeezed = AnchoredFunction(source.domain, source.anchors, compress(source.values))
        self.inner = extend_range_bounded(
            squeezed, subdomain_cover, math.pi / 2, full_cover, extra_samples, piece_mode
        )
        self.domain = source.domain
        self.source = source

    def batch(self, points) -> np.ndarray:
        return decompress(self.inner.batch(points))


def extend_via_compression(
    source: AnchoredFunction,
    subdomain_cover,
    full_cover: Cover | None = None,
    extra_samples=None,
    piece_mode: str = MIDPOINT,
) -> CompressedExtension:
    """Locally Lipschitz extension of arbitrary real-valued anchor data."""
    return CompressedExtension(source, subdomain_cover, full_cover, extra_samples, piece_mode)
