"""McShane-Whitney extensions with constant or per-anchor Lipschitz constants.

Given anchored values ``phi`` with admissible constants, the two extremal
extensions are

    ext_minimal(p) = max_a [phi(a) - lambda_a * d(a, p)]
    ext_maximal(p) = min_a [phi(a) + lambda_a * d(a, p)],

every admissible extension lies between them, and both agree with ``phi``
on the anchors.  The bounded-range variant divides their sum by
``2 + d(p, A)`` to stay strictly inside ``(-M, M)``, and the arctan/tan
pipeline lifts that variant to arbitrary real-valued data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import affine_anchor_scan
from .errors import AdmissibilityError, ArgumentError, RangeError
from .evaluable import Evaluable
from .metric import (
    COMPARE_TOL,
    AnchoredFunction,
    as_points,
    cross_distances,
    set_distances,
)

MINIMAL = "minimal"
MAXIMAL = "maximal"
MIDPOINT = "midpoint"
BOUNDED_RANGE = "bounded_range"
_MODES = (MINIMAL, MAXIMAL, MIDPOINT, BOUNDED_RANGE)

AUTO = "auto"
PER_ANCHOR = "per_anchor"

_CHUNK = 512


def _pair_scan(source: AnchoredFunction):
    """Yield (row_offset, distance_block, value_diff_block) over anchor row chunks."""
    n = source.n
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = cross_distances(source.domain, source.anchors[start:stop], source.anchors)
        dv = np.abs(source.values[start:stop, None] - source.values[None, :])
        yield start, d, dv


def exact_pairwise_constant(source: AnchoredFunction) -> float:
    """Smallest constant-lambda admissible for the anchors: ``max |dphi| / d``."""
    best = 0.0
    for start, d, dv in _pair_scan(source):
        rows = np.arange(d.shape[0])
        d = d.copy()
        d[rows, rows + start] = np.inf
        best = max(best, float((dv / d).max(initial=0.0)))
    return best


def estimate_anchor_constants(source: AnchoredFunction) -> np.ndarray:
    """Per-anchor constants ``K_a = max_{b != a} |phi(a) - phi(b)| / d(a, b)``.

    These are the smallest constants making the per-anchor extension
    admissible.  A single anchor gets the vacuous constant 0.
    """
    if source.n == 1:
        return np.zeros(1)
    out = np.empty(source.n)
    for start, d, dv in _pair_scan(source):
        rows = np.arange(d.shape[0])
        d = d.copy()
        d[rows, rows + start] = np.inf
        out[start:start + d.shape[0]] = (dv / d).max(axis=1)
    return out


def check_admissible(source: AnchoredFunction, lambdas: np.ndarray) -> None:
    """Require ``|phi(a) - phi(b)| <= min(lambda_a, lambda_b) * d(a, b)`` on all pairs."""
    worst = 0.0
    witness = None
    for start, d, dv in _pair_scan(source):
        bound = np.minimum(lambdas[start:start + d.shape[0], None], lambdas[None, :]) * d
        excess = dv - bound
        rows = np.arange(d.shape[0])
        excess[rows, rows + start] = -np.inf
        i, j = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[i, j] > worst:
            worst = float(excess[i, j])
            witness = (start + int(i), int(j))
    if witness is not None and worst > COMPARE_TOL * (1.0 + float(np.abs(source.values).max())):
        a, b = witness
        raise AdmissibilityError(
            "anchor slope exceeds the requested Lipschitz constants: "
            f"|phi({a}) - phi({b})| = {abs(source.values[a] - source.values[b])!r} "
            f"> min-constant * d over anchor pair ({a}, {b})",
            witness,
        )


def resolve_lambdas(source: AnchoredFunction, lam) -> tuple[np.ndarray, str]:
    """Turn a lambda policy into a validated per-anchor array.

    Accepts a positive number (constant), ``"auto"`` (exact pairwise
    constant), ``"per_anchor"`` (source constants, or their estimate when
    absent), or an explicit array.  Returns ``(lambdas, kind)`` with kind
    in {"constant", "per_anchor"}.
    """
    if isinstance(lam, str):
        if lam == AUTO:
            return np.full(source.n, exact_pairwise_constant(source)), "constant"
        if lam == PER_ANCHOR:
            consts = source.constants
            if consts is None:
                consts = estimate_anchor_constants(source)
            check_admissible(source, consts)
            return np.asarray(consts, dtype=float), "per_anchor"
        raise ArgumentError(f"unknown lambda policy {lam!r}")
    arr = np.asarray(lam, dtype=float)
    if arr.ndim == 0:
        if arr < 0:
            raise ArgumentError(f"lambda must be nonnegative, got {float(arr)!r}")
        lambdas = np.full(source.n, float(arr))
        check_admissible(source, lambdas)
        return lambdas, "constant"
    if arr.shape != (source.n,):
        raise ArgumentError(f"lambda array must have one entry per anchor")
    if np.any(arr < 0):
        raise ArgumentError("per-anchor lambdas must be nonnegative")
    check_admissible(source, arr)
    return arr, "per_anchor"


@dataclass(frozen=True)
class ExtensionSpec:
    """An extension problem: source data, mode, lambda policy, optional bound."""

    source: AnchoredFunction
    mode: str = MIDPOINT
    lam: object = AUTO
    bound: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ArgumentError(f"unknown extension mode {self.mode!r}")
        lambdas, kind = resolve_lambdas(self.source, self.lam)
        lambdas.setflags(write=False)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "lambda_kind", kind)
        if self.mode == BOUNDED_RANGE and self.bound is None:
            raise ArgumentError("bounded_range mode requires a bound M")
        if self.bound is not None:
            if not self.bound > 0:
                raise ArgumentError(f"bound must be positive, got {self.bound!r}")
            hi = float(np.abs(self.source.values).max())
            if hi >= self.bound:
                raise ArgumentError(
                    f"bound M = {self.bound!r} must strictly dominate |values| "
                    f"(max |phi| = {hi!r})"
                )


class MWExtension(Evaluable):
    """Evaluator for one extension spec."""

    def __init__(self, spec: ExtensionSpec) -> None:
        self.spec = spec
        self.domain = spec.source.domain

    def minimal(self, points) -> np.ndarray:
        """Smallest-extension values: ``max_a [phi(a) - lambda_a d(a, p)]``."""
        vals, _ = affine_anchor_scan(
            self.spec.source, -self.spec.lambdas, points, reduce="max"
        )
        return vals

    def maximal(self, points) -> np.ndarray:
        """Largest-extension values: ``min_a [phi(a) + lambda_a d(a, p)]``."""
        vals, _ = affine_anchor_scan(
            self.spec.source, self.spec.lambdas, points, reduce="min"
        )
        return vals

    def batch(self, points) -> np.ndarray:
        pts = as_points(self.domain, points)
        mode = self.spec.mode
        if mode == MINIMAL:
            return self.minimal(pts)
        if mode == MAXIMAL:
            return self.maximal(pts)
        lo = self.minimal(pts)
        hi = self.maximal(pts)
        if mode == MIDPOINT:
            return (lo + hi) / 2.0
        d = set_distances(self.domain, pts, self.spec.source.anchors)
        return (lo + hi) / (2.0 + d)


def mw_minimal(spec: ExtensionSpec, point) -> float:
    """Smallest admissible extension at ``point``."""
    return MWExtension(ExtensionSpec(spec.source, MINIMAL, spec.lam))(point)


def mw_maximal(spec: ExtensionSpec, point) -> float:
    """Largest admissible extension at ``point``."""
    return MWExtension(ExtensionSpec(spec.source, MAXIMAL, spec.lam))(point)


def bounded_range_extension(spec: ExtensionSpec, point) -> float:
    """Extension into ``(-M, M)``: ``(ext_min + ext_max) / (2 + d(p, A))``."""
    if spec.bound is None:
        raise ArgumentError("bounded_range_extension requires a spec with a bound")
    spec = ExtensionSpec(spec.source, BOUNDED_RANGE, spec.lam, spec.bound)
    return MWExtension(spec)(point)


@dataclass(frozen=True)
class PointwiseConstantEstimate:
    """One-center constant built from a local slope and an oscillation bound.

    ``constant = max(local_slope, oscillation / locality)`` bounds the slope
    from the center to every other anchor, near and far alike.
    """

    local_slope: float
    locality: float
    oscillation: float

    def __post_init__(self) -> None:
        if not self.locality > 0:
            raise ArgumentError("locality radius must be positive")

    @property
    def constant(self) -> float:
        return max(self.local_slope, self.oscillation / self.locality)


def estimate_pointwise_constants(
    source: AnchoredFunction, locality: float
) -> list[PointwiseConstantEstimate]:
    """Per-anchor one-center estimates at a common locality radius."""
    if not locality > 0:
        raise ArgumentError("locality radius must be positive")
    osc = float(source.values.max() - source.values.min())
    out = []
    for start, d, dv in _pair_scan(source):
        rows = np.arange(d.shape[0])
        d = d.copy()
        d[rows, rows + start] = np.inf
        ratios = np.where(d < locality, dv / d, 0.0)
        for r in range(d.shape[0]):
            out.append(PointwiseConstantEstimate(float(ratios[r].max(initial=0.0)), locality, osc))
    return out


def compress(values) -> np.ndarray:
    """Map reals into ``(-pi/2, pi/2)`` by arctan; 1-Lipschitz."""
    return np.arctan(np.asarray(values, dtype=float))


def decompress(values) -> np.ndarray:
    """Inverse of :func:`compress`; inputs must be strictly inside ``(-pi/2, pi/2)``."""
    arr = np.asarray(values, dtype=float)
    if np.any(np.abs(arr) >= math.pi / 2):
        bad = arr[np.abs(arr) >= math.pi / 2].flat[0]
        raise RangeError(f"decompress input {bad!r} outside (-pi/2, pi/2)")
    return np.tan(arr)


class UnboundedExtension(Evaluable):
    """Extension of arbitrary real data via the compress / bounded-range / decompress pipeline."""

    def __init__(self, source: AnchoredFunction, lam=PER_ANCHOR) -> None:
        squeezed = AnchoredFunction(source.domain, source.anchors, compress(source.values))
        self.inner = MWExtension(
            ExtensionSpec(squeezed, BOUNDED_RANGE, lam, bound=math.pi / 2)
        )
        self.domain = source.domain
        self.source = source

    def batch(self, points) -> np.ndarray:
        return decompress(self.inner.batch(points))


def extend_unbounded(source: AnchoredFunction, point, lam=PER_ANCHOR) -> float:
    """Pipeline value at one point; agrees with the source at its anchors."""
    return UnboundedExtension(source, lam)(point)
