"""Metric domains, anchor data, and distance computations.

Two kinds of domain are supported: a finite explicit metric space given by a
validated distance matrix, and a Euclidean continuum of fixed dimension.
Either kind may additionally rescale its base distance through the bounded
transform ``t -> t / (1 + t)``, which preserves the metric axioms and keeps
every distance below 1.

Points of an explicit domain are integer indices; points of a Euclidean
domain are coordinate vectors.  All other modules obtain distances
exclusively through the functions here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    ArgumentError,
    DomainMismatchError,
    MetricViolationError,
)

IDENTITY = "identity"
BOUNDED = "bounded"
_TRANSFORMS = (IDENTITY, BOUNDED)

#: Tolerance for exact-agreement checks (matrix validation, anchor agreement).
EXACT_TOL = 1e-12
#: Tolerance for ordinary floating-point comparisons (Lipschitz bounds etc.).
COMPARE_TOL = 1e-9

#: Default chunk size for pairwise scans that avoid materialising n x n arrays.
CHUNK = 1024


def _apply_transform(base: np.ndarray, transform: str) -> np.ndarray:
    if transform == IDENTITY:
        return base
    if transform == BOUNDED:
        return base / (1.0 + base)
    raise ArgumentError(f"unknown metric transform {transform!r}")


@dataclass(frozen=True)
class Violation:
    """One failed metric axiom, with the indices that witness it."""

    kind: str
    indices: tuple[int, ...]
    amount: float = 0.0

    def __str__(self) -> str:
        return f"{self.kind} at {self.indices} (amount {self.amount:g})"


def validate_metric(matrix, tol: float = EXACT_TOL) -> list[Violation]:
    """Check a square matrix against the metric axioms.

    Returns an empty list iff the matrix is symmetric, has zero diagonal,
    nonnegative entries, no zero distance between distinct points, and
    satisfies the triangle inequality for all index triples within ``tol``.
    Violations are reported as ``(i, j, k)`` triples meaning
    ``d(i, k) > d(i, j) + d(j, k)``.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"distance matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    out: list[Violation] = []

    bad = np.argwhere(~np.isfinite(m))
    for i, j in bad[:10]:
        out.append(Violation("non-finite entry", (int(i), int(j))))
    if len(bad):
        return out

    for i in np.nonzero(np.abs(np.diag(m)) > tol)[0][:10]:
        out.append(Violation("nonzero diagonal", (int(i),), float(m[i, i])))
    neg = np.argwhere(m < -tol)
    for i, j in neg[:10]:
        out.append(Violation("negative distance", (int(i), int(j)), float(m[i, j])))
    asym = np.argwhere(np.abs(m - m.T) > tol)
    for i, j in asym[:10]:
        if i < j:
            out.append(Violation("asymmetry", (int(i), int(j)), float(abs(m[i, j] - m[j, i]))))
    offdiag_zero = np.argwhere((m <= tol) & ~np.eye(n, dtype=bool))
    for i, j in offdiag_zero[:10]:
        if i < j:
            out.append(Violation("zero distance between distinct points", (int(i), int(j))))
    if out:
        return out

    # Triangle scan, one intermediate index at a time: d(i,k) <= d(i,j) + d(j,k).
    for j in range(n):
        excess = m - (m[:, j][:, None] + m[j, :][None, :])
        viol = np.argwhere(excess > tol)
        for i, k in viol:
            out.append(
                Violation("triangle inequality", (int(i), int(j), int(k)), float(excess[i, k]))
            )
            if len(out) >= 100:
                return out
    return out


@dataclass(frozen=True)
class EuclideanDomain:
    """``R^dim`` with the Euclidean metric, optionally bounded."""

    dim: int
    transform: str = IDENTITY

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ArgumentError(f"dimension must be >= 1, got {self.dim}")
        if self.transform not in _TRANSFORMS:
            raise ArgumentError(f"unknown metric transform {self.transform!r}")

    @property
    def is_explicit(self) -> bool:
        return False


@dataclass(frozen=True)
class ExplicitDomain:
    """A finite metric space given by an explicit distance matrix.

    The matrix is validated on construction; any violated axiom raises
    :class:`MetricViolationError` carrying the witnesses.
    """

    matrix: np.ndarray
    labels: tuple[str, ...] = ()
    transform: str = IDENTITY

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        violations = validate_metric(m)
        if violations:
            raise MetricViolationError(violations)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        labels = tuple(self.labels) or tuple(f"p{i}" for i in range(m.shape[0]))
        if len(labels) != m.shape[0]:
            raise ArgumentError(
                f"{len(labels)} labels for a {m.shape[0]}-point space"
            )
        object.__setattr__(self, "labels", labels)
        if self.transform not in _TRANSFORMS:
            raise ArgumentError(f"unknown metric transform {self.transform!r}")

    @property
    def n_points(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_explicit(self) -> bool:
        return True

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainMismatchError(f"unknown point label {label!r}") from None


MetricDomain = Union[EuclideanDomain, ExplicitDomain]


def as_points(domain: MetricDomain, points) -> np.ndarray:
    """Canonicalise a sequence of points for ``domain``.

    Explicit domains take 1-d integer index arrays; Euclidean domains take
    ``(n, dim)`` coordinate arrays (a flat array is accepted when dim is 1).
    """
    if domain.is_explicit:
        arr = np.asarray(points)
        if arr.ndim != 1:
            raise DomainMismatchError(
                f"explicit-domain points must be a flat index sequence, got shape {arr.shape}"
            )
        if not np.issubdtype(arr.dtype, np.integer):
            cast = arr.astype(int)
            if np.any(cast != arr):
                raise DomainMismatchError("explicit-domain points must be integer indices")
            arr = cast
        if arr.size and (arr.min() < 0 or arr.max() >= domain.n_points):
            bad = arr[(arr < 0) | (arr >= domain.n_points)][0]
            raise DomainMismatchError(
                f"index {int(bad)} out of range for a {domain.n_points}-point space"
            )
        return arr
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        if domain.dim == 1:
            arr = arr[:, None]
        else:
            raise DomainMismatchError(
                f"points for a {domain.dim}-d domain must have shape (n, {domain.dim})"
            )
    if arr.ndim != 2 or arr.shape[1] != domain.dim:
        raise DomainMismatchError(
            f"points for a {domain.dim}-d domain must have shape (n, {domain.dim}),"
            f" got {arr.shape}"
        )
    return arr


def as_point(domain: MetricDomain, point) -> np.ndarray | int:
    """Canonicalise a single point (an index, or a length-``dim`` vector)."""
    if domain.is_explicit:
        return int(as_points(domain, [point])[0])
    arr = np.asarray(point, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return as_points(domain, arr[None, :])[0]


def cross_distances(domain: MetricDomain, points, others) -> np.ndarray:
    """Distance matrix between two point sequences, shape ``(len(points), len(others))``."""
    p = as_points(domain, points)
    q = as_points(domain, others)
    if domain.is_explicit:
        base = domain.matrix[np.ix_(p, q)]
    elif domain.dim == 1:
        base = np.abs(p[:, 0][:, None] - q[:, 0][None, :])
    else:
        diff = p[:, None, :] - q[None, :, :]
        base = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return _apply_transform(base, domain.transform)


def pairwise_distances(domain: MetricDomain, points) -> np.ndarray:
    """Full pairwise distance matrix of one point sequence."""
    return cross_distances(domain, points, points)


def distance(domain: MetricDomain, p, q) -> float:
    """Distance between two points of ``domain``."""
    return float(cross_distances(domain, [p] if domain.is_explicit else [as_point(domain, p)],
                                 [q] if domain.is_explicit else [as_point(domain, q)])[0, 0])


def distance_to_set(domain: MetricDomain, p, points) -> float:
    """``min_{s in points} d(p, s)``; 1-Lipschitz in ``p``."""
    pts = as_points(domain, points)
    if pts.shape[0] == 0:
        raise ArgumentError("distance_to_set requires a nonempty point set")
    single = [p] if domain.is_explicit else [as_point(domain, p)]
    return float(cross_distances(domain, single, pts).min())


def set_distances(domain: MetricDomain, queries, points) -> np.ndarray:
    """Vector of distances from each query to the nearest of ``points``."""
    pts = as_points(domain, points)
    if pts.shape[0] == 0:
        raise ArgumentError("set_distances requires a nonempty point set")
    return cross_distances(domain, queries, pts).min(axis=1)


def min_pairwise_distance(domain: MetricDomain, points, chunk: int = CHUNK) -> float:
    """Smallest distance between two distinct points, scanned in chunks."""
    pts = as_points(domain, points)
    n = pts.shape[0]
    if n < 2:
        raise ArgumentError("need at least two points")
    best = np.inf
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = cross_distances(domain, pts[start:stop], pts)
        rows = np.arange(stop - start)
        block[rows, rows + start] = np.inf
        best = min(best, float(block.min()))
    return best


def _duplicate_witness(domain: MetricDomain, pts: np.ndarray) -> tuple[int, int] | None:
    """Indices of a zero-distance pair, or None.  Cheap for Euclidean data."""
    n = pts.shape[0]
    if n < 2:
        return None
    if domain.is_explicit:
        # Domain validation already rejects zero off-diagonal distances,
        # so duplicates can only be repeated indices.
        order = np.argsort(pts, kind="stable")
        eq = pts[order][1:] == pts[order][:-1]
        if np.any(eq):
            k = int(np.nonzero(eq)[0][0])
            i, j = int(order[k]), int(order[k + 1])
            return (min(i, j), max(i, j))
        return None
    # Zero Euclidean (or bounded) distance means identical coordinates.
    order = np.lexsort(pts.T[::-1])
    eq = np.all(pts[order][1:] == pts[order][:-1], axis=1)
    if np.any(eq):
        k = int(np.nonzero(eq)[0][0])
        i, j = int(order[k]), int(order[k + 1])
        return (min(i, j), max(i, j))
    return None


@dataclass(frozen=True)
class AnchoredFunction:
    """Finitely many anchor points with real values: the data every construction extends.

    ``constants``, when present, are nonnegative per-anchor Lipschitz
    constants used by the variable-constant extension formulas.
    """

    domain: MetricDomain
    anchors: np.ndarray
    values: np.ndarray
    constants: np.ndarray | None = None

    def __post_init__(self) -> None:
        anchors = as_points(self.domain, self.anchors)
        values = np.asarray(self.values, dtype=float)
        if anchors.shape[0] == 0:
            raise ArgumentError("anchor set must be nonempty")
        if values.ndim != 1 or values.shape[0] != anchors.shape[0]:
            raise ArgumentError(
                f"{values.shape} values for {anchors.shape[0]} anchors"
            )
        if not np.all(np.isfinite(values)):
            raise ArgumentError("anchor values must be finite")
        dup = _duplicate_witness(self.domain, anchors)
        if dup is not None:
            raise ArgumentError(f"duplicate anchors at indices {dup}")
        anchors.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "values", values)
        if self.constants is not None:
            consts = np.asarray(self.constants, dtype=float)
            if consts.shape != values.shape:
                raise ArgumentError("constants must match anchors in length")
            if not np.all(np.isfinite(consts)) or np.any(consts < 0):
                raise ArgumentError("per-anchor constants must be finite and nonnegative")
            consts.setflags(write=False)
            object.__setattr__(self, "constants", consts)

    @property
    def n(self) -> int:
        return self.anchors.shape[0]

    def restrict(self, indices: Sequence[int]) -> "AnchoredFunction":
        """Sub-function on a subset of anchors (positions into the anchor list)."""
        idx = np.asarray(indices, dtype=int)
        if idx.size == 0:
            raise ArgumentError("cannot restrict to an empty anchor subset")
        return AnchoredFunction(
            self.domain,
            self.anchors[idx],
            self.values[idx],
            None if self.constants is None else self.constants[idx],
        )

    def with_values(self, values) -> "AnchoredFunction":
        return AnchoredFunction(self.domain, self.anchors, values, self.constants)

    def index_of(self, point) -> int | None:
        """Position of ``point`` in the anchor list (exact match), or None."""
        if self.domain.is_explicit:
            hits = np.nonzero(self.anchors == as_point(self.domain, point))[0]
        else:
            p = as_point(self.domain, point)
            hits = np.nonzero(np.all(self.anchors == p[None, :], axis=1))[0]
        return int(hits[0]) if hits.size else None

    def anchor_distances(self, queries) -> np.ndarray:
        """Distances from each query to each anchor, shape ``(n_queries, n)``."""
        return cross_distances(self.domain, queries, self.anchors)


@dataclass(frozen=True)
class Ball:
    """Open ball: all points strictly closer than ``radius`` to ``center``."""

    center: object
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ArgumentError(f"ball radius must be positive, got {self.radius!r}")
