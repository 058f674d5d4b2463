"""Approximation pipelines built from envelopes and partitions of unity.

* monotone: increasing locally Lipschitz approximants of anchored values on
  an explicit domain, via truncation, per-level envelopes, and blending.
* uniform: a locally Lipschitz function within a constant tolerance of the
  values, as a level blend over preimage windows.
* fine: a variable-tolerance version blending per-scale uniform approximants.
* extend-and-approximate: extend data from a subset while staying inside a
  variable tolerance tube around a target everywhere.
* insertion: a function strictly between two separated functions.
* small-scale: a windowed envelope within epsilon of uniformly continuous
  values, Lipschitz on every small ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .blend import BlendSpec, BlendedFunction, ClampFunction
from .envelope import EnvelopeFunction, EnvelopeSpec
from .errors import ArgumentError, UnsupportedDomainError
from .evaluable import Evaluable
from .extension import AUTO, MIDPOINT, ExtensionSpec, MWExtension
from .metric import AnchoredFunction, as_points, cross_distances
from .partition import (
    BandSet,
    Cover,
    PreimageSet,
    SublevelSet,
    build_partition,
)

ToleranceField = Union[float, AnchoredFunction]

_CHUNK = 512


@dataclass(frozen=True)
class LevelGrid:
    """A finite increasing grid of levels with a window radius ``epsilon``.

    Consecutive gaps must not exceed ``epsilon`` so the preimage windows
    ``|phi - r| < epsilon`` overlap enough to cover the spanned range.
    """

    levels: np.ndarray
    epsilon: float

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size == 0:
            raise ArgumentError("level grid must be a nonempty flat array")
        if not self.epsilon > 0:
            raise ArgumentError("epsilon must be positive")
        gaps = np.diff(levels)
        if np.any(gaps <= 0):
            raise ArgumentError("levels must be strictly increasing")
        if np.any(gaps > self.epsilon * (1.0 + 1e-9)):
            raise ArgumentError("level gaps must not exceed epsilon")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def for_range(cls, lo: float, hi: float, epsilon: float,
                  spacing: float | None = None) -> "LevelGrid":
        """Levels spanning ``[lo - epsilon, hi + epsilon]``; default spacing ``epsilon / 2``."""
        if spacing is None:
            spacing = epsilon / 2.0
        if not 0 < spacing <= epsilon:
            raise ArgumentError("spacing must lie in (0, epsilon]")
        start = lo - epsilon
        count = int(math.ceil((hi + epsilon - start) / spacing)) + 1
        return cls(start + spacing * np.arange(count), epsilon)

    @classmethod
    def for_values(cls, values, epsilon: float, spacing: float | None = None) -> "LevelGrid":
        vals = np.asarray(values, dtype=float)
        return cls.for_range(float(vals.min()), float(vals.max()), epsilon, spacing)


@dataclass(frozen=True)
class SmallScaleSpec:
    """Scales of a small-scale approximation: ``k * delta`` must exceed ``epsilon``.

    Construction validates, on all anchor pairs of ``source`` closer than
    ``2 * delta``, that the values move by less than ``epsilon``.
    """

    source: AnchoredFunction
    delta: float
    k: int
    epsilon: float

    def __post_init__(self) -> None:
        if not (self.delta > 0 and self.epsilon > 0 and self.k > 0):
            raise ArgumentError("delta, epsilon, and k must be positive")
        if not self.k * self.delta > self.epsilon:
            raise ArgumentError(
                f"need k * delta > epsilon, got {self.k} * {self.delta} <= {self.epsilon}"
            )
        witness = modulus_violation(self.source, 2.0 * self.delta, self.epsilon)
        if witness is not None:
            i, j = witness
            raise ArgumentError(
                f"values move by >= epsilon over anchor pair ({i}, {j}) closer than 2*delta"
            )


def modulus_violation(
    source: AnchoredFunction, scale: float, bound: float
) -> tuple[int, int] | None:
    """First anchor pair with ``d < scale`` but ``|dphi| >= bound``, else None."""
    n = source.n
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = cross_distances(source.domain, source.anchors[start:stop], source.anchors)
        dv = np.abs(source.values[start:stop, None] - source.values[None, :])
        bad = (d < scale) & (dv >= bound)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            return (start + int(i), int(j))
    return None


def largest_modulus_scale(source: AnchoredFunction, epsilon: float,
                          iters: int = 40) -> float:
    """Largest delta with ``|dphi| < epsilon`` on all anchor pairs closer than ``2 * delta``.

    Found by bisection on the empirical modulus of the anchor set.
    """
    if not epsilon > 0:
        raise ArgumentError("epsilon must be positive")
    lo, hi = 0.0, 1.0
    while modulus_violation(source, 2.0 * hi, epsilon) is None and hi < 1e12:
        lo, hi = hi, hi * 2.0
    if hi >= 1e12:
        return hi
    for _ in range(iters):
        mid = (lo + hi) / 2.0
        if modulus_violation(source, 2.0 * mid, epsilon) is None:
            lo = mid
        else:
            hi = mid
    return lo


def monotone_approximation(
    source: AnchoredFunction, n_list: Sequence[int]
) -> list[Evaluable]:
    """Increasing locally Lipschitz approximants of anchored values on an explicit domain.

    Level sets ``{phi > -k}`` cover the domain; on each, the values are kept
    and elsewhere truncated to ``-k``.  The rate-``n`` approximant blends the
    lower envelopes of the truncations through the partition of unity of the
    level cover.  The sequence is pointwise nondecreasing in ``n`` and equals
    the values once ``n`` reaches their convergence index.
    """
    if not source.domain.is_explicit:
        raise UnsupportedDomainError("monotone approximation requires an explicit finite domain")
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])) or any(n < 1 for n in ns):
        raise ArgumentError(f"n_list must be strictly increasing positive integers, got {ns}")

    min_phi = float(source.values.min())
    k_top = max(1, int(math.floor(-min_phi)) + 1)
    ks = list(range(1, k_top + 1))
    sets = tuple(SublevelSet(source, threshold=float(-k)) for k in ks)
    partition = build_partition(Cover(source.domain, sets, carrier=source))

    truncated = [
        source.with_values(np.where(source.values > -k, source.values, float(-k)))
        for k in ks
    ]

    out: list[Evaluable] = []
    for n in ns:
        layers = [EnvelopeFunction(EnvelopeSpec(t, float(n))) for t in truncated]
        out.append(BlendedFunction(BlendSpec(partition, tuple(layers))))
    return out


class LevelBlend(Evaluable):
    """``sum_r xi_r(x) * r`` over the active levels of a level cover."""

    def __init__(self, partition, levels: np.ndarray) -> None:
        self.partition = partition
        self.levels = np.asarray(levels, dtype=float)
        self.domain = partition.cover.domain

    def batch(self, points) -> np.ndarray:
        weights = self.partition.xi(as_points(self.domain, points))
        out = weights @ self.levels
        # A single active level is returned exactly.
        active = weights > 0.0
        single = active.sum(axis=1) == 1
        if np.any(single):
            out[single] = self.levels[np.argmax(active[single], axis=1)]
        return out


def uniform_approximation(source: AnchoredFunction, grid: LevelGrid) -> LevelBlend:
    """Level blend within ``grid.epsilon`` of the anchored values at every sample.

    Each grid level contributes the window ``{|phi - r| < epsilon}``; the
    windows must cover every anchor, which holds whenever the grid spans the
    value range with spacing at most ``epsilon``.
    """
    sets = tuple(PreimageSet(source, level=float(r), width=grid.epsilon)
                 for r in grid.levels)
    partition = build_partition(Cover(source.domain, sets, carrier=source))
    return LevelBlend(partition, grid.levels)


def _tolerance_values(tol: ToleranceField, source: AnchoredFunction) -> np.ndarray:
    if isinstance(tol, AnchoredFunction):
        if not np.array_equal(tol.anchors, source.anchors):
            raise ArgumentError("a tolerance field must be sampled at the source anchors")
        if np.any(tol.values <= 0):
            raise ArgumentError("tolerance values must be strictly positive")
        return tol.values
    t = float(tol)
    if not t > 0:
        raise ArgumentError("tolerance must be strictly positive")
    return np.full(source.n, t)


def fine_approximation(source: AnchoredFunction, tol: ToleranceField) -> Evaluable:
    """Approximant within a variable tolerance ``tol(x)`` at every sample.

    Per-scale uniform approximants (tolerance ``1/n``) are blended through
    the partition of the cover ``{tol > 1/n}``; a constant tolerance reduces
    to a single uniform approximation.
    """
    if not isinstance(tol, AnchoredFunction):
        eps = float(tol)
        if not eps > 0:
            raise ArgumentError("tolerance must be strictly positive")
        return uniform_approximation(source, LevelGrid.for_values(source.values, eps))
    tol_values = _tolerance_values(tol, source)
    n_top = int(max(math.floor(1.0 / float(t)) + 1 for t in tol_values))
    sets = tuple(SublevelSet(tol, threshold=1.0 / n) for n in range(1, n_top + 1))
    partition = build_partition(Cover(source.domain, sets, carrier=tol))
    pieces = tuple(
        uniform_approximation(source, LevelGrid.for_values(source.values, 1.0 / n))
        for n in range(1, n_top + 1)
    )
    return BlendedFunction(BlendSpec(partition, pieces))


class TubeBlend(Evaluable):
    """``eta * extension + (1 - eta) * approximant`` for the tube construction."""

    def __init__(self, gate: Evaluable, extension: Evaluable, approximant: Evaluable) -> None:
        self.gate = gate
        self.extension = extension
        self.approximant = approximant
        self.domain = extension.domain

    def batch(self, points) -> np.ndarray:
        pts = as_points(self.domain, points)
        g = self.gate.batch(pts)
        out = np.zeros(pts.shape[0])
        near = np.nonzero(g > 0.0)[0]
        far = np.nonzero(g < 1.0)[0]
        if near.size:
            out[near] += g[near] * self.extension.batch(pts[near])
        if far.size:
            out[far] += (1.0 - g[far]) * self.approximant.batch(pts[far])
        return out


def extend_and_approximate(
    g_on_subset: AnchoredFunction,
    phi: AnchoredFunction,
    tol: ToleranceField,
) -> TubeBlend:
    """Extend ``g`` off its anchors while staying within ``tol`` of ``phi`` at the samples.

    Requires ``|g(a) - phi(a)| < tol(a)`` at every anchor of ``g``.  The
    result agrees with ``g`` on its anchors; elsewhere it interpolates
    between a Lipschitz extension of ``g`` (where that extension stays in
    the tube) and a fine approximant of ``phi``.
    """
    tol_values = _tolerance_values(tol, phi)
    for pos, anchor in enumerate(g_on_subset.anchors):
        idx = phi.index_of(anchor)
        if idx is None:
            raise ArgumentError(
                f"anchor {pos} of the subset data is not a sample of the target"
            )
        if not abs(g_on_subset.values[pos] - phi.values[idx]) < tol_values[idx]:
            raise ArgumentError(
                f"subset value at anchor {pos} is not strictly inside the tolerance tube"
            )

    extension = MWExtension(ExtensionSpec(g_on_subset, MIDPOINT, AUTO))
    approximant = fine_approximation(phi, tol)

    ext_at_samples = extension.batch(phi.anchors)
    violating = np.abs(ext_at_samples - phi.values) >= tol_values
    gate = ClampFunction(
        g_on_subset.anchors,
        phi.domain,
        inside_sets=(),
        outside_points=phi.anchors[violating] if np.any(violating) else None,
    )
    return TubeBlend(gate, extension, approximant)


def insert_between(
    below: AnchoredFunction,
    above: AnchoredFunction,
    grid: LevelGrid,
) -> LevelBlend:
    """A level blend strictly between two functions at every shared sample.

    Requires ``below < above`` everywhere and a grid fine enough that some
    level falls strictly inside every gap.
    """
    if not np.array_equal(below.anchors, above.anchors):
        raise ArgumentError("both functions must be sampled at the same anchors")
    if not np.all(below.values < above.values):
        bad = int(np.argmax(~(below.values < above.values)))
        raise ArgumentError(f"need below < above at every sample; fails at sample {bad}")
    sets = tuple(BandSet(below, above, level=float(r)) for r in grid.levels)
    partition = build_partition(Cover(below.domain, sets, samples=below.anchors))
    return LevelBlend(partition, grid.levels)


class WindowedEnvelope(Evaluable):
    """Windowed lower envelope ``min_{d(y, x) < window} [phi(y) + k d(y, x)]``."""

    def __init__(self, source: AnchoredFunction, k: float, window: float) -> None:
        self.inner = EnvelopeFunction(EnvelopeSpec(source, float(k), window=float(window)))
        self.domain = source.domain
        self.k = float(k)
        self.window = float(window)

    def batch(self, points) -> np.ndarray:
        return self.inner.batch(points)


def small_scale_approximation(source: AnchoredFunction, spec: SmallScaleSpec) -> WindowedEnvelope:
    """Windowed envelope within ``epsilon`` below the values, Lipschitz at scale ``delta``.

    Evaluates over the ``delta`` window; under the spec's validated modulus
    this agrees with the ``2 * delta`` window evaluation (compare with
    :func:`window_agreement`).
    """
    if spec.source is not source and not (
        np.array_equal(spec.source.anchors, source.anchors)
        and np.array_equal(spec.source.values, source.values)
    ):
        raise ArgumentError("spec was validated for a different source")
    return WindowedEnvelope(source, float(spec.k), spec.delta)


def window_agreement(source: AnchoredFunction, spec: SmallScaleSpec, points,
                     narrow_values: np.ndarray | None = None) -> float:
    """Largest absolute gap between the ``delta``- and ``2*delta``-window evaluations.

    Pass ``narrow_values`` to reuse an existing ``delta``-window evaluation
    at the same points.
    """
    if narrow_values is None:
        narrow_values = WindowedEnvelope(source, float(spec.k), spec.delta).batch(points)
    wide = WindowedEnvelope(source, float(spec.k), 2.0 * spec.delta)
    return float(np.abs(narrow_values - wide.batch(points)).max())
