"""Finite open covers and Lipschitz partitions of unity.

A cover is an ordered finite list of sets, each of which can report, at any
query point, a lower bound on the distance to its complement (the
*membership margin* machinery).  From those margins the partition builder
derives, with ``n`` the 1-based list position:

    eta_n(x)   = min(margin_n(x), 2**-n)          # 1-Lipschitz, positive on O_n
    eta(x)     = sum_n eta_n(x) / 2**n            # 1-Lipschitz, positive on covered x
    gamma_n(x) = max(eta_n(x) - eta(x) / 2, 0)    # locally finitely many nonzero
    xi_n(x)    = gamma_n(x) / sum_k gamma_k(x)

yielding nonnegative functions that sum to one, vanish outside their cover
set, and are locally Lipschitz.  If some set is the whole space the trivial
partition on the first such set is returned instead.

On explicit domains complements are scanned exactly.  On continua, ball
sets use the surrogate ``max(radius - d(x, center), 0)`` (1-Lipschitz,
positive exactly on the open ball) and value-defined sets measure the
distance to the carrier anchors that fall outside, so their guarantees are
sample-level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ArgumentError,
    UncoveredPointError,
    UnsupportedDomainError,
)
from .evaluable import Evaluable
from .metric import (
    AnchoredFunction,
    Ball,
    MetricDomain,
    as_point,
    as_points,
    cross_distances,
    set_distances,
)


def _single(domain: MetricDomain, point) -> np.ndarray:
    """A one-point batch for ``point``."""
    p = as_point(domain, point)
    return as_points(domain, [p] if domain.is_explicit else np.atleast_2d(p))


def _ball_mask(domain: MetricDomain, ball: Ball) -> np.ndarray:
    """Membership mask of an open ball over all points of an explicit domain."""
    center = as_point(domain, ball.center)
    return domain.matrix[center] < ball.radius


def _explicit_mask_margin(domain, points, mask: np.ndarray) -> np.ndarray:
    """Exact ``d(x, complement)`` on an explicit domain from a membership mask."""
    pts = np.asarray(points, dtype=int)
    outside = np.nonzero(~mask)[0]
    if outside.shape[0] == 0:
        return np.full(pts.shape[0], np.inf)
    return set_distances(domain, pts, outside)


def carrier_domain_values(carrier: AnchoredFunction, domain) -> np.ndarray:
    """Carrier values re-ordered over all points of an explicit domain."""
    if carrier.n != domain.n_points or np.any(
        np.sort(carrier.anchors) != np.arange(domain.n_points)
    ):
        raise ArgumentError(
            "value-defined cover sets on an explicit domain need a carrier"
            " anchored at every domain point"
        )
    vals = np.empty(domain.n_points)
    vals[carrier.anchors] = carrier.values
    return vals


class CoverSet:
    """One indexed set of a cover.

    Subclasses implement ``complement_distance`` (a 1-Lipschitz lower bound
    on the distance to the complement, ``inf`` when the complement is known
    to be empty) and ``member_mask`` where membership is decidable.
    """

    def complement_distance(self, domain: MetricDomain, points) -> np.ndarray:
        raise NotImplementedError

    def member_mask(self, domain: MetricDomain, points) -> np.ndarray:
        """Boolean membership at the given points."""
        return self.complement_distance(domain, points) > 0.0

    def is_whole_space(self, domain: MetricDomain) -> bool:
        """True only when the set provably equals the whole domain."""
        return False


@dataclass(frozen=True)
class BallSet(CoverSet):
    """An open ball."""

    ball: Ball

    def complement_distance(self, domain, points) -> np.ndarray:
        pts = as_points(domain, points)
        if domain.is_explicit:
            return _explicit_mask_margin(domain, pts, _ball_mask(domain, self.ball))
        center = np.atleast_2d(np.asarray(self.ball.center, dtype=float))
        d = cross_distances(domain, pts, center)[:, 0]
        if np.isinf(self.ball.radius):
            return np.full(pts.shape[0], np.inf)
        return np.maximum(self.ball.radius - d, 0.0)

    def is_whole_space(self, domain) -> bool:
        if np.isinf(self.ball.radius):
            return True
        if domain.is_explicit:
            return bool(np.all(_ball_mask(domain, self.ball)))
        return False


@dataclass(frozen=True)
class BallUnionSet(CoverSet):
    """A finite union of open balls; may be empty."""

    balls: tuple[Ball, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "balls", tuple(self.balls))

    def complement_distance(self, domain, points) -> np.ndarray:
        pts = as_points(domain, points)
        n = pts.shape[0]
        if not self.balls:
            return np.zeros(n)
        if domain.is_explicit:
            mask = np.zeros(domain.n_points, dtype=bool)
            for b in self.balls:
                mask |= _ball_mask(domain, b)
            return _explicit_mask_margin(domain, pts, mask)
        best = np.zeros(n)
        for b in self.balls:
            if np.isinf(b.radius):
                return np.full(n, np.inf)
            center = np.atleast_2d(np.asarray(b.center, dtype=float))
            d = cross_distances(domain, pts, center)[:, 0]
            np.maximum(best, np.maximum(b.radius - d, 0.0), out=best)
        return best

    def is_whole_space(self, domain) -> bool:
        if any(np.isinf(b.radius) for b in self.balls):
            return True
        if domain.is_explicit and self.balls:
            mask = np.zeros(domain.n_points, dtype=bool)
            for b in self.balls:
                mask |= _ball_mask(domain, b)
            return bool(np.all(mask))
        return False


@dataclass(frozen=True)
class SubsetSet(CoverSet):
    """An explicit subset of an explicit domain, by point index.

    Subsets are the natural encoding of covers of an anchor set; on
    continuum domains they carry anchor positions and have no margins.
    """

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    def _mask(self, domain) -> np.ndarray:
        mask = np.zeros(domain.n_points, dtype=bool)
        mask[list(self.indices)] = True
        return mask

    def complement_distance(self, domain, points) -> np.ndarray:
        if not domain.is_explicit:
            raise UnsupportedDomainError(
                "subset cover sets have no margins on continuum domains"
            )
        return _explicit_mask_margin(domain, as_points(domain, points), self._mask(domain))

    def member_mask(self, domain, points) -> np.ndarray:
        if not domain.is_explicit:
            raise UnsupportedDomainError(
                "subset membership is positional; continuum points cannot be tested"
            )
        return self._mask(domain)[as_points(domain, points)]

    def is_whole_space(self, domain) -> bool:
        return domain.is_explicit and len(set(self.indices)) == domain.n_points


@dataclass(frozen=True)
class CarrierSet(CoverSet):
    """Base for sets defined by a predicate on carrier values.

    On explicit domains the carrier must anchor every domain point and the
    complement is scanned exactly; on continua the complement is represented
    by the carrier anchors where the predicate fails.
    """

    carrier: AnchoredFunction

    def _predicate(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def complement_distance(self, domain, points) -> np.ndarray:
        pts = as_points(domain, points)
        if domain.is_explicit:
            mask = self._predicate(carrier_domain_values(self.carrier, domain))
            return _explicit_mask_margin(domain, pts, mask)
        inside = self._predicate(self.carrier.values)
        outside = self.carrier.anchors[~inside]
        if outside.shape[0] == 0:
            return np.full(pts.shape[0], np.inf)
        return set_distances(domain, pts, outside)

    def member_mask(self, domain, points) -> np.ndarray:
        if domain.is_explicit:
            mask = self._predicate(carrier_domain_values(self.carrier, domain))
            return mask[as_points(domain, points)]
        return super().member_mask(domain, points)

    def is_whole_space(self, domain) -> bool:
        if domain.is_explicit:
            return bool(np.all(self._predicate(carrier_domain_values(self.carrier, domain))))
        return False


@dataclass(frozen=True)
class SublevelSet(CarrierSet):
    """``{x : carrier(x) > threshold}``."""

    threshold: float = 0.0

    def _predicate(self, values) -> np.ndarray:
        return values > self.threshold


@dataclass(frozen=True)
class PreimageSet(CarrierSet):
    """``{x : |carrier(x) - level| < width}``."""

    level: float = 0.0
    width: float = 1.0

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ArgumentError("preimage width must be positive")

    def _predicate(self, values) -> np.ndarray:
        return np.abs(values - self.level) < self.width


@dataclass(frozen=True)
class BandSet(CoverSet):
    """``{x : below(x) < level < above(x)}`` for two functions on shared anchors."""

    below: AnchoredFunction
    above: AnchoredFunction
    level: float = 0.0

    def __post_init__(self) -> None:
        if not np.array_equal(self.below.anchors, self.above.anchors):
            raise ArgumentError("band bounds must be sampled at the same anchors")

    def _inside(self) -> np.ndarray:
        return (self.below.values < self.level) & (self.level < self.above.values)

    def complement_distance(self, domain, points) -> np.ndarray:
        pts = as_points(domain, points)
        if domain.is_explicit:
            lo = carrier_domain_values(self.below, domain)
            hi = carrier_domain_values(self.above, domain)
            mask = (lo < self.level) & (self.level < hi)
            return _explicit_mask_margin(domain, pts, mask)
        outside = self.below.anchors[~self._inside()]
        if outside.shape[0] == 0:
            return np.full(pts.shape[0], np.inf)
        return set_distances(domain, pts, outside)


@dataclass(frozen=True)
class Cover:
    """An ordered finite open cover, validated where its points are known.

    Validation points are, in order of preference: all points of an explicit
    domain, the explicit ``samples``, or the carrier anchors.  Covers over a
    continuum with none of these are validated lazily at evaluation time.
    """

    domain: MetricDomain
    sets: tuple[CoverSet, ...]
    carrier: AnchoredFunction | None = None
    samples: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.sets:
            raise ArgumentError("a cover needs at least one set")
        object.__setattr__(self, "sets", tuple(self.sets))
        if self.samples is not None:
            pts = as_points(self.domain, self.samples)
            pts.setflags(write=False)
            object.__setattr__(self, "samples", pts)
        pts = self.validation_points()
        if pts is not None:
            self.check_covered(pts)

    @property
    def size(self) -> int:
        return len(self.sets)

    def validation_points(self) -> np.ndarray | None:
        if self.domain.is_explicit:
            return np.arange(self.domain.n_points)
        if self.samples is not None:
            return self.samples
        if self.carrier is not None:
            return self.carrier.anchors
        return None

    def check_covered(self, points) -> None:
        pts = as_points(self.domain, points)
        covered = np.zeros(pts.shape[0], dtype=bool)
        for s in self.sets:
            covered |= s.member_mask(self.domain, pts)
            if covered.all():
                return
        bad = int(np.nonzero(~covered)[0][0])
        raise UncoveredPointError(pts[bad])

    def margins(self, points) -> np.ndarray:
        """Capped margins ``eta_n`` at each point, shape ``(n_points, size)``."""
        pts = as_points(self.domain, points)
        out = np.empty((pts.shape[0], self.size))
        for k, s in enumerate(self.sets):
            cap = 2.0 ** -(k + 1)
            out[:, k] = np.minimum(s.complement_distance(self.domain, pts), cap)
        return out


def membership_margin(cover: Cover, n: int, point) -> float:
    """``eta_n`` at one point; ``n`` is the 1-based set position."""
    if not 1 <= n <= cover.size:
        raise ArgumentError(f"set index {n} out of range 1..{cover.size}")
    pts = _single(cover.domain, point)
    raw = cover.sets[n - 1].complement_distance(cover.domain, pts)[0]
    return float(min(raw, 2.0 ** -n))


class PartitionMember(Evaluable):
    """One ``xi_k`` of a partition, as a standalone function."""

    def __init__(self, partition: "PartitionOfUnity", k: int) -> None:
        self.partition = partition
        self.k = k
        self.domain = partition.cover.domain

    def batch(self, points) -> np.ndarray:
        return self.partition.xi(points)[:, self.k]


class PartitionOfUnity:
    """Weights ``xi_k`` subordinated to an ordered cover.

    ``trivial_index`` is set when some cover set is the whole space, in
    which case that single set carries all the weight.
    """

    def __init__(self, cover: Cover) -> None:
        self.cover = cover
        self.trivial_index: int | None = None
        for k, s in enumerate(cover.sets):
            if s.is_whole_space(cover.domain):
                self.trivial_index = k
                break

    @property
    def size(self) -> int:
        return self.cover.size

    @property
    def domain(self) -> MetricDomain:
        return self.cover.domain

    def members(self) -> list[PartitionMember]:
        return [PartitionMember(self, k) for k in range(self.size)]

    def eta_table(self, points) -> np.ndarray:
        return self.cover.margins(points)

    def eta(self, points) -> np.ndarray:
        etas = self.eta_table(points)
        weights = 2.0 ** -(np.arange(self.size) + 1)
        return etas @ weights

    def gamma_table(self, points) -> np.ndarray:
        etas = self.eta_table(points)
        weights = 2.0 ** -(np.arange(self.size) + 1)
        eta = etas @ weights
        return np.maximum(etas - eta[:, None] / 2.0, 0.0)

    def xi(self, points) -> np.ndarray:
        """Weight matrix, shape ``(n_points, size)``; rows sum to one."""
        pts = as_points(self.cover.domain, points)
        if self.trivial_index is not None:
            out = np.zeros((pts.shape[0], self.size))
            out[:, self.trivial_index] = 1.0
            return out
        gammas = self.gamma_table(pts)
        totals = gammas.sum(axis=1)
        dead = totals == 0.0
        if np.any(dead):
            raise UncoveredPointError(pts[int(np.nonzero(dead)[0][0])])
        return gammas / totals[:, None]

    def table(self, points) -> list[tuple[int, int, float, float, float]]:
        """Diagnostic rows ``(point_pos, set_pos, eta_n, gamma_n, xi)``."""
        pts = as_points(self.cover.domain, points)
        etas = self.eta_table(pts)
        gammas = self.gamma_table(pts)
        xis = self.xi(pts)
        rows = []
        for i in range(pts.shape[0]):
            for k in range(self.size):
                rows.append((i, k, float(etas[i, k]), float(gammas[i, k]), float(xis[i, k])))
        return rows


def build_partition(cover: Cover) -> PartitionOfUnity:
    """Construct the partition of unity for a validated cover."""
    pts = cover.validation_points()
    if pts is not None:
        cover.check_covered(pts)
    return PartitionOfUnity(cover)


def least_binary_index(eta: float) -> int:
    """Least ``k >= 1`` with ``2**-k < eta`` (for positive ``eta``)."""
    if not eta > 0.0:
        raise ArgumentError(f"eta must be positive, got {eta!r}")
    k = max(1, int(np.floor(-np.log2(eta))) + 1)
    while 2.0 ** -k >= eta:
        k += 1
    while k > 1 and 2.0 ** -(k - 1) < eta:
        k -= 1
    return k


def vanish_index(partition: PartitionOfUnity, point) -> int:
    """Least ``k`` with ``eta(point) > 2**-k``; all ``gamma_n`` with ``n > k`` vanish there."""
    if partition.trivial_index is not None:
        return partition.trivial_index + 1
    pts = _single(partition.cover.domain, point)
    eta = float(partition.eta(pts)[0])
    if eta <= 0.0:
        raise UncoveredPointError(point)
    return least_binary_index(eta)


def increasing_lipschitz_cover(
    source: AnchoredFunction,
    estimates: Sequence,
    n_max: int | None = None,
) -> list[BallUnionSet]:
    """Increasing ball-union sets on which the anchored values have slope at most ``n``.

    ``estimates`` holds one per-anchor entry, either a
    :class:`~lipkit.extension.PointwiseConstantEstimate` or a
    ``(constant, locality)`` pair.  Level ``n`` collects the balls
    ``Ball(anchor, locality)`` of every anchor whose constant is at most
    ``n``; early levels may be empty.
    """
    if len(estimates) != source.n:
        raise ArgumentError("need one constant estimate per anchor")
    pairs = []
    for e in estimates:
        if hasattr(e, "constant"):
            pairs.append((float(e.constant), float(e.locality)))
        else:
            c, loc = e
            pairs.append((float(c), float(loc)))
    top = max(c for c, _ in pairs)
    levels = n_max if n_max is not None else max(1, int(np.ceil(top)))
    out = []
    for n in range(1, levels + 1):
        balls = tuple(
            Ball(source.anchors[i], pairs[i][1])
            for i in range(source.n)
            if pairs[i][0] <= n
        )
        out.append(BallUnionSet(balls))
    return out
