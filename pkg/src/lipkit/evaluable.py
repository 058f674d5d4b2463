"""Base class for functions evaluable at arbitrary domain points.

Constructions in this package (envelopes, extensions, blends, partition
members) all produce :class:`Evaluable` objects: immutable, pure, and safe
for concurrent evaluation.  ``batch`` is the primitive; scalar calls wrap it.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .metric import MetricDomain, as_point, as_points


class Evaluable(ABC):
    """A real-valued function with vectorised evaluation over domain points."""

    domain: MetricDomain | None = None

    @abstractmethod
    def batch(self, points) -> np.ndarray:
        """Values at a sequence of points, in input order."""

    def __call__(self, point) -> float:
        if self.domain is None:
            return float(self.batch([point])[0])
        p = as_point(self.domain, point)
        return float(self.batch([p])[0])


class ConstantFunction(Evaluable):
    """The constant function ``value`` on any domain."""

    def __init__(self, value: float, domain: MetricDomain | None = None) -> None:
        self.value = float(value)
        self.domain = domain

    def batch(self, points) -> np.ndarray:
        if self.domain is not None:
            points = as_points(self.domain, points)
        n = np.asarray(points).shape[0]
        return np.full(n, self.value)


class CallableFunction(Evaluable):
    """Wrap a plain scalar callable; ``vectorized`` callables get batches directly."""

    def __init__(self, fn, domain: MetricDomain | None = None, vectorized: bool = False) -> None:
        self.fn = fn
        self.domain = domain
        self.vectorized = vectorized

    def batch(self, points) -> np.ndarray:
        if self.domain is not None:
            points = as_points(self.domain, points)
        if self.vectorized:
            return np.asarray(self.fn(points), dtype=float)
        return np.array([float(self.fn(p)) for p in points], dtype=float)
