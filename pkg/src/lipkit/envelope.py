"""Lower and upper Pasch-Hausdorff envelopes.

The lower envelope of anchored values ``phi`` at rate ``kappa`` is

    f_kappa(p) = min_a [phi(a) + kappa * d(a, p)],

the greatest kappa-Lipschitz function lying below ``phi`` on the anchors.
The upper envelope uses ``max`` and ``-kappa`` and equals the negation of
the lower envelope of ``-phi`` exactly.  An optional window restricts the
scan to anchors strictly closer than the window radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, EmptyWindowError, UnsupportedDomainError
from .evaluable import Evaluable
from .metric import (
    AnchoredFunction,
    BOUNDED,
    EuclideanDomain,
    as_points,
    cross_distances,
    min_pairwise_distance,
)

LOWER = "lower"
UPPER = "upper"

_SCAN_CHUNK = 512


def affine_anchor_scan(
    source: AnchoredFunction,
    slopes: np.ndarray,
    points,
    *,
    reduce: str,
    window: float | None = None,
    chunk: int = _SCAN_CHUNK,
) -> tuple[np.ndarray, np.ndarray]:
    """Reduce ``values[a] + slopes[a] * d(a, p)`` over anchors, per query point.

    ``reduce`` is ``"min"`` or ``"max"``.  With a window, only anchors with
    ``d(a, p) < window`` participate; a query with no such anchor raises
    :class:`EmptyWindowError`.  Returns ``(values, arg_indices)`` where the
    reported index is the lowest anchor index attaining the reduced value.
    """
    pts = as_points(source.domain, points)
    n = pts.shape[0]
    out = np.empty(n)
    args = np.empty(n, dtype=int)
    fill = np.inf if reduce == "min" else -np.inf
    pick = np.argmin if reduce == "min" else np.argmax
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d = cross_distances(source.domain, pts[start:stop], source.anchors)
        outside = None
        if window is not None:
            outside = d >= window
            dead = outside.all(axis=1)
            if np.any(dead):
                bad = start + int(np.nonzero(dead)[0][0])
                raise EmptyWindowError(pts[bad], window)
        # The distance block is consumed in place.
        terms = d
        terms *= slopes[None, :]
        terms += source.values[None, :]
        if outside is not None:
            terms[outside] = fill
        idx = pick(terms, axis=1)
        args[start:stop] = idx
        out[start:stop] = terms[np.arange(stop - start), idx]
    return out, args


@dataclass(frozen=True)
class EnvelopeSpec:
    """Parameters of one envelope: source values, rate, side, optional window."""

    source: AnchoredFunction
    kappa: float
    side: str = LOWER
    window: float | None = None

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise ArgumentError(f"kappa must be positive, got {self.kappa!r}")
        if self.side not in (LOWER, UPPER):
            raise ArgumentError(f"side must be 'lower' or 'upper', got {self.side!r}")
        if self.window is not None and not self.window > 0:
            raise ArgumentError(f"window must be positive, got {self.window!r}")


class EnvelopeFunction(Evaluable):
    """Evaluator for one envelope spec; the anchor scan is the contract."""

    def __init__(self, spec: EnvelopeSpec) -> None:
        self.spec = spec
        self.domain = spec.source.domain
        sign = 1.0 if spec.side == LOWER else -1.0
        self._slopes = np.full(spec.source.n, sign * spec.kappa)
        self._reduce = "min" if spec.side == LOWER else "max"

    def batch(self, points) -> np.ndarray:
        vals, _ = affine_anchor_scan(
            self.spec.source, self._slopes, points,
            reduce=self._reduce, window=self.spec.window,
        )
        return vals

    def batch_with_args(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Values plus the (lowest) anchor index attaining each one."""
        return affine_anchor_scan(
            self.spec.source, self._slopes, points,
            reduce=self._reduce, window=self.spec.window,
        )


def envelope_eval(spec: EnvelopeSpec, point) -> float:
    """Envelope value at a single point."""
    return EnvelopeFunction(spec)(point)


def envelope_sequence(source: AnchoredFunction, kappas) -> list[EnvelopeFunction]:
    """Lower envelopes at strictly increasing rates; pointwise nondecreasing."""
    ks = [float(k) for k in kappas]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ArgumentError(f"kappas must be strictly increasing, got {ks}")
    if any(k <= 0 for k in ks):
        raise ArgumentError("kappas must be positive")
    return [EnvelopeFunction(EnvelopeSpec(source, k)) for k in ks]


def convergence_index(source: AnchoredFunction) -> float:
    """Least rate beyond which the lower envelope matches the values at every anchor.

    Only meaningful on explicit finite domains, where it equals the value
    spread divided by the smallest positive anchor distance.
    """
    if not source.domain.is_explicit:
        raise UnsupportedDomainError(
            "convergence_index requires an explicit finite domain"
        )
    if source.n < 2:
        return 0.0
    spread = float(source.values.max() - source.values.min())
    if spread == 0.0:
        return 0.0
    d_min = min_pairwise_distance(source.domain, source.anchors)
    return spread / d_min


def divergence_probe(radius_schedule, kappa: float = 1.0) -> list[float]:
    """Envelope values at the origin for the identity on the bounded real line.

    For each radius ``r`` the identity is sampled at ``{0, -r, +r}`` and the
    lower envelope at rate ``kappa`` is evaluated at 0.  Because the bounded
    metric keeps every distance below 1, the value at step ``r`` is at most
    ``-r + kappa`` and the sequence is unbounded below: no Lipschitz function
    can stay under an unbounded-below target in a bounded metric.
    """
    line = EuclideanDomain(1, transform=BOUNDED)
    out = []
    for r in radius_schedule:
        r = float(r)
        if r < 0:
            raise ArgumentError(f"radii must be nonnegative, got {r!r}")
        if r == 0.0:
            coords = np.array([0.0])
        else:
            coords = np.array([0.0, -r, r])
        probe = AnchoredFunction(line, coords, coords.ravel())
        out.append(envelope_eval(EnvelopeSpec(probe, kappa), np.array([0.0])))
    return out
