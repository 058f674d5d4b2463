import json

import numpy as np
import pytest

from lipkit import (
    AnchoredFunction,
    ArgumentError,
    CallableFunction,
    ExtensionSpec,
    MWExtension,
    build_report,
    check_extension,
    check_sandwich,
    check_small_scale,
    check_uniform_continuity,
    empirical_lip,
    pointwise_modulus,
)


def test_empirical_lip_fixture(spiky3):
    r = empirical_lip(spiky3)
    assert r.value == 5.0
    assert r.witness == (0, 1)
    assert not r.subsampled


def test_empirical_lip_constant(line):
    const = AnchoredFunction(line, [0.0, 1.0, 2.0], [2.0, 2.0, 2.0])
    assert empirical_lip(const).value == 0.0


def test_empirical_lip_linear(line):
    f = CallableFunction(lambda pts: 3.0 * np.asarray(pts)[:, 0], domain=line,
                         vectorized=True)
    r = empirical_lip(f, samples=np.linspace(0, 1, 17))
    assert r.value == pytest.approx(3.0, abs=1e-12)


def test_empirical_lip_needs_two_samples(line):
    one = AnchoredFunction(line, [0.0], [1.0])
    with pytest.raises(ArgumentError):
        empirical_lip(one)


def test_empirical_lip_budget_subsampling_is_deterministic(plane):
    rng = np.random.default_rng(1)
    src = AnchoredFunction(plane, rng.random((300, 2)), rng.random(300))
    a = empirical_lip(src, pair_budget=1000, seed=9)
    b = empirical_lip(src, pair_budget=1000, seed=9)
    assert a == b
    assert a.subsampled and a.pairs_scanned == 1000
    full = empirical_lip(src, pair_budget=None)
    assert full.value >= a.value  # subsample can only miss the extremal pair


def test_empirical_lip_of_extension_bounded_by_lambda(line):
    rng = np.random.default_rng(2)
    src = AnchoredFunction(line, rng.uniform(-3, 3, 15), rng.uniform(-1, 1, 15))
    spec = ExtensionSpec(src, "maximal", "auto")
    lam = float(spec.lambdas[0])
    ext = MWExtension(spec)
    r = empirical_lip(ext, samples=np.linspace(-5, 5, 120))
    assert r.value <= lam + 1e-9


def test_pointwise_modulus_fixture(spiky3):
    assert pointwise_modulus(spiky3, 1, 1.5) == 5.0
    # Isolated at small scale: nothing inside the punctured ball.
    assert pointwise_modulus(spiky3, 1, 0.5) == 0.0


def test_pointwise_modulus_identity(line):
    f = CallableFunction(lambda pts: np.asarray(pts)[:, 0], domain=line, vectorized=True)
    xs = np.linspace(-1, 1, 21)
    assert pointwise_modulus(f, 0.3, 0.7, samples=xs) == pytest.approx(1.0, abs=1e-9)


def test_pointwise_modulus_monotone_in_radius(spiky3):
    radii = [0.5, 1.0, 1.5, 2.5]
    vals = [pointwise_modulus(spiky3, 2, t) for t in radii]
    assert vals == sorted(vals)


def test_check_small_scale_lipschitz_passes(line):
    xs = np.linspace(0, 5, 100)
    src = AnchoredFunction(line, xs, 0.7 * xs)
    for delta, bound in [(0.5, 1.0), (2.0, 0.7)]:
        assert check_small_scale(src, delta=delta, bound=bound).passed


def test_check_small_scale_square_fails_near_the_top(line):
    xs = np.linspace(0, 10, 201)
    src = AnchoredFunction(line, xs, xs ** 2)
    v = check_small_scale(src, delta=1.0, bound=1.0)
    assert not v.passed
    # Worst witness first: the steepest close pair sits near x = 10.
    i, j = v.witnesses[0]
    assert xs[i] > 8.5 and xs[j] > 8.5


def test_check_small_scale_step_function(line):
    xs = np.array([0.0, 0.25, 1.0, 1.25])
    steps = AnchoredFunction(line, xs, np.array([0.0, 0.0, 1.0, 1.0]))
    assert check_small_scale(steps, delta=0.5, bound=0.0).passed


def test_check_small_scale_vacuous_pass(line):
    xs = np.array([0.0, 1.0, 2.0])
    src = AnchoredFunction(line, xs, np.array([0.0, 5.0, 0.0]))
    v = check_small_scale(src, delta=0.5, bound=0.0)
    assert v.passed and "0 pair(s)" in v.detail


def test_check_extension(line):
    src = AnchoredFunction(line, [0.0, 3.0], [0.0, 3.0])
    ext = MWExtension(ExtensionSpec(src, "maximal", 1.0))
    assert check_extension(ext, src).passed
    shifted = CallableFunction(lambda pts: ext.batch(pts) + 1.0, domain=line,
                               vectorized=True)
    v = check_extension(shifted, src)
    assert not v.passed and len(v.witnesses) == 2


def test_check_sandwich(line):
    src = AnchoredFunction(line, [0.0, 3.0], [0.0, 3.0])
    lo = MWExtension(ExtensionSpec(src, "minimal", 1.0))
    hi = MWExtension(ExtensionSpec(src, "maximal", 1.0))
    xs = np.linspace(-3, 6, 37)
    lo_v, hi_v = lo.batch(xs), hi.batch(xs)
    assert check_sandwich(lo_v, (lo_v + hi_v) / 2, hi_v, xs).passed
    assert not check_sandwich(hi_v + 0.5, (lo_v + hi_v) / 2, lo_v - 0.5, xs).passed
    same = np.ones(5)
    assert check_sandwich(same, same, same, None).passed


def test_check_uniform_continuity(line):
    xs = np.linspace(0, 1, 50)
    src = AnchoredFunction(line, xs, np.sin(xs))
    assert check_uniform_continuity(src, scale=0.1, bound=0.2).passed
    jump = AnchoredFunction(line, xs, (xs > 0.5).astype(float))
    assert not check_uniform_continuity(jump, scale=0.1, bound=0.5).passed


def test_report_roundtrip(spiky3):
    rep = build_report(spiky3, radius=1.5, small_scale=(1.5, 5.0))
    payload = json.loads(rep.dumps())
    assert payload["global_constant"] == 5.0
    assert payload["witness"] == [0, 1]
    assert payload["verdicts"]["small_scale"]["status"] == "pass"
    assert len(payload["pointwise"]) == 3


def test_report_reproducible(plane):
    rng = np.random.default_rng(3)
    src = AnchoredFunction(plane, rng.random((50, 2)), rng.random(50))
    a = build_report(src, radius=0.5, pair_budget=200, seed=5)
    b = build_report(src, radius=0.5, pair_budget=200, seed=5)
    assert a.dumps() == b.dumps()


def test_threads_env_does_not_change_results(spiky3, monkeypatch):
    base = empirical_lip(spiky3)
    monkeypatch.setenv("LIPKIT_THREADS", "3")
    assert empirical_lip(spiky3) == base
    monkeypatch.setenv("LIPKIT_THREADS", "1")
    assert empirical_lip(spiky3) == base


def test_all_coincident_samples_rejected(line):
    f = CallableFunction(lambda pts: np.zeros(len(pts)), domain=line, vectorized=True)
    with pytest.raises(ArgumentError, match="coincide"):
        empirical_lip(f, samples=np.zeros(5))


def test_check_extension_on_blended_pipeline(line):
    from lipkit import extend_locally_lipschitz

    src = AnchoredFunction(line, [0.0, 1.0, 3.0], [0.0, 5.0, 1.0])
    blend = extend_locally_lipschitz(src, [(0, 1), (1, 2)])
    assert check_extension(blend, src).passed


def test_witness_reproduces_reported_ratio(plane):
    rng = np.random.default_rng(17)
    src = AnchoredFunction(plane, rng.random((60, 2)), rng.random(60))
    r = empirical_lip(src)
    i, j = r.witness
    from lipkit import distance

    d = distance(plane, src.anchors[i], src.anchors[j])
    assert abs(src.values[i] - src.values[j]) / d == r.value


def test_pointwise_bounded_by_global(plane):
    rng = np.random.default_rng(19)
    src = AnchoredFunction(plane, rng.random((40, 2)), rng.random(40))
    top = empirical_lip(src).value
    for i in range(0, 40, 7):
        assert pointwise_modulus(src, src.anchors[i], 0.3) <= top + 1e-15


def test_inconclusive_on_empty_samples(line):
    f = CallableFunction(lambda pts: np.zeros(len(pts)), domain=line, vectorized=True)
    empty = np.empty((0, 1))
    assert check_small_scale(f, samples=empty, delta=1.0, bound=1.0).status == "inconclusive"
    assert check_uniform_continuity(f, samples=empty, scale=1.0, bound=1.0).status == "inconclusive"
    assert check_sandwich(np.empty(0), np.empty(0), np.empty(0), None).status == "inconclusive"
