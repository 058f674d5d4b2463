import numpy as np
import pytest

from lipkit import AnchoredFunction, EuclideanDomain, ExplicitDomain


@pytest.fixture
def line():
    return EuclideanDomain(1)


@pytest.fixture
def plane():
    return EuclideanDomain(2)


@pytest.fixture
def line3():
    # Three points on a line: distances |i - j|.
    return ExplicitDomain([[0, 1, 2], [1, 0, 1], [2, 1, 0]])


@pytest.fixture
def spiky(line):
    # The recurring 0/5/1 fixture: steep between the first two anchors.
    return AnchoredFunction(line, [0.0, 1.0, 2.0], [0.0, 5.0, 1.0])


@pytest.fixture
def spiky3(line3):
    return AnchoredFunction(line3, [0, 1, 2], [0.0, 5.0, 1.0])


def random_explicit_domain(rng, n, dim=2):
    """A random finite metric space: pairwise distances of random points."""
    pts = rng.random((n, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    return ExplicitDomain(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)))
