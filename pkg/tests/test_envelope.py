import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipkit import (
    AnchoredFunction,
    ArgumentError,
    EmptyWindowError,
    EnvelopeFunction,
    EnvelopeSpec,
    EuclideanDomain,
    ExplicitDomain,
    UnsupportedDomainError,
    convergence_index,
    divergence_probe,
    envelope_eval,
    envelope_sequence,
)
from lipkit.metric import cross_distances


def brute_lower(source, kappa, p):
    # Independent oracle: python-loop scan of the defining formula.
    d = cross_distances(source.domain, [p] if source.domain.is_explicit else [np.atleast_1d(p)],
                        source.anchors)[0]
    return min(v + kappa * di for v, di in zip(source.values, d))


def test_lower_examples(spiky):
    spec = EnvelopeSpec(spiky, 1.0)
    assert envelope_eval(spec, 1.0) == brute_lower(spiky, 1.0, 1.0) == 1.0
    assert envelope_eval(spec, 2.0) == brute_lower(spiky, 1.0, 2.0) == 1.0


def test_constant_values_are_fixed_points(line3):
    const = AnchoredFunction(line3, [0, 1, 2], [3.5, 3.5, 3.5])
    for kappa in (0.5, 1.0, 7.0):
        f = EnvelopeFunction(EnvelopeSpec(const, kappa))
        assert np.array_equal(f.batch([0, 1, 2]), const.values)


def test_upper_example(spiky):
    spec = EnvelopeSpec(spiky, 1.0, side="upper")
    assert envelope_eval(spec, 0.0) == 4.0


def test_upper_is_negated_lower_exactly(spiky):
    neg = spiky.with_values(-spiky.values)
    queries = np.linspace(-3.0, 4.0, 41)
    up = EnvelopeFunction(EnvelopeSpec(spiky, 1.0, side="upper")).batch(queries)
    low_of_neg = EnvelopeFunction(EnvelopeSpec(neg, 1.0)).batch(queries)
    assert np.array_equal(up, -low_of_neg)


def test_sequence_examples(spiky):
    seq = envelope_sequence(spiky, [1.0, 2.0, 5.0])
    assert [f(1.0) for f in seq] == [1.0, 2.0, 5.0]
    assert [f(0.0) for f in seq] == [0.0, 0.0, 0.0]


def test_sequence_rejects_nonmonotone(spiky):
    with pytest.raises(ArgumentError):
        envelope_sequence(spiky, [2.0, 1.0])


def test_sequence_is_pointwise_monotone(spiky):
    queries = np.linspace(-2, 4, 31)
    seq = envelope_sequence(spiky, [0.5, 1.0, 3.0, 10.0])
    vals = np.stack([f.batch(queries) for f in seq])
    assert np.all(np.diff(vals, axis=0) >= 0)
    # Minorant: every member sits below the values at the anchors.
    for f in seq:
        assert np.all(f.batch(spiky.anchors) <= spiky.values + 1e-12)


def test_kappa_lipschitz_bound(spiky):
    rng = np.random.default_rng(3)
    ps = rng.uniform(-5, 5, 200)
    qs = rng.uniform(-5, 5, 200)
    for kappa in (0.5, 2.0):
        f = EnvelopeFunction(EnvelopeSpec(spiky, kappa))
        fp, fq = f.batch(ps), f.batch(qs)
        assert np.all(np.abs(fp - fq) <= kappa * np.abs(ps - qs) + 1e-9)


def test_greatest_minorant(spiky):
    # Competitors: envelopes of shifted-down values are kappa-Lipschitz minorants.
    kappa = 2.0
    f = EnvelopeFunction(EnvelopeSpec(spiky, kappa))
    queries = np.linspace(-3, 5, 50)
    fv = f.batch(queries)
    for c in (0.1, 1.0, 10.0):
        g = EnvelopeFunction(EnvelopeSpec(spiky.with_values(spiky.values - c), kappa))
        assert np.all(g.batch(queries) <= fv + 1e-9)


def test_convergence_index_examples(spiky3, line3):
    assert convergence_index(spiky3) == 5.0
    env5 = EnvelopeFunction(EnvelopeSpec(spiky3, 5.0))
    assert np.array_equal(env5.batch([0, 1, 2]), spiky3.values)

    const = AnchoredFunction(line3, [0, 1, 2], [2.0, 2.0, 2.0])
    assert convergence_index(const) == 0.0

    two = AnchoredFunction(ExplicitDomain([[0, 2], [2, 0]]), [0, 1], [0.0, 1.0])
    assert convergence_index(two) == 0.5
    env = EnvelopeFunction(EnvelopeSpec(two, 0.5))
    assert np.array_equal(env.batch([0, 1]), two.values)


def test_convergence_index_needs_explicit(spiky):
    with pytest.raises(UnsupportedDomainError):
        convergence_index(spiky)


def test_divergence_probe():
    radii = [0.0, 10.0, 100.0, 1000.0]
    vals = divergence_probe(radii)
    assert vals[0] == 0.0
    for r, v in zip(radii[1:], vals[1:]):
        assert v <= -r + 1.0
    assert all(b < a for a, b in zip(vals[1:], vals[2:]))


def test_windowed_envelope(spiky):
    spec = EnvelopeSpec(spiky, 1.0, window=0.6)
    # Window around 1.0 sees only the anchor at 1.0.
    assert envelope_eval(spec, 1.0) == 5.0
    with pytest.raises(EmptyWindowError) as exc:
        envelope_eval(spec, 10.0)
    assert exc.value.window == 0.6


def test_argmin_reporting(spiky):
    f = EnvelopeFunction(EnvelopeSpec(spiky, 1.0))
    vals, args = f.batch_with_args([0.0, 1.0, 2.0])
    # Ties resolve to the lowest anchor index.
    assert list(args) == [0, 0, 2]
    assert list(vals) == [0.0, 1.0, 1.0]


def test_spec_validation(spiky):
    with pytest.raises(ArgumentError):
        EnvelopeSpec(spiky, -1.0)
    with pytest.raises(ArgumentError):
        EnvelopeSpec(spiky, 1.0, side="sideways")
    with pytest.raises(ArgumentError):
        EnvelopeSpec(spiky, 1.0, window=0.0)


@settings(max_examples=200)
@given(
    values=st.lists(st.floats(min_value=-50, max_value=50), min_size=2, max_size=6),
    kappa=st.floats(min_value=0.1, max_value=20),
    p=st.floats(min_value=-10, max_value=10),
    q=st.floats(min_value=-10, max_value=10),
)
def test_envelope_properties_random(values, kappa, p, q):
    line = EuclideanDomain(1)
    anchors = np.arange(len(values), dtype=float)
    src = AnchoredFunction(line, anchors, values)
    f = EnvelopeFunction(EnvelopeSpec(src, kappa))
    fp, fq = f(p), f(q)
    assert abs(fp - fq) <= kappa * abs(p - q) + 1e-9
    assert np.all(f.batch(anchors) <= src.values + 1e-12)
