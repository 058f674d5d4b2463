"""Acceptance suite: one test per criterion, each printing its pass/fail line.

Tolerances are pinned in the assertions; timed criteria measure wall-clock
around the computational core.
"""

import time

import numpy as np
import pytest

import lipkit as lk
from cli_fixture_commands import GOLDEN, GOLDEN_COMMANDS
from conftest import random_explicit_domain
from lipkit.cli import main as cli_main


def report(num: int, name: str, ok: bool, extra: str = "") -> None:
    tail = f" ({extra})" if extra else ""
    print(f"criterion {num:2d} [{name}]: {'PASS' if ok else 'FAIL'}{tail}")


def test_criterion_1_mw_suite():
    rng = np.random.default_rng(101)
    plane = lk.EuclideanDomain(2)
    anchors = rng.random((50, 2))
    values = rng.uniform(-1.0, 1.0, 50)
    src = lk.AnchoredFunction(plane, anchors, values)

    t0 = time.perf_counter()
    spec = lk.ExtensionSpec(src, lam="auto")
    lam = float(spec.lambdas[0])
    ext = lk.MWExtension(spec)

    ps = rng.random((1000, 2))
    qs = rng.random((1000, 2))
    d = np.sqrt(np.einsum("ij,ij->i", ps - qs, ps - qs))
    lo_p, lo_q = ext.minimal(ps), ext.minimal(qs)
    hi_p, hi_q = ext.maximal(ps), ext.maximal(qs)
    lip_ok = bool(
        np.all(np.abs(lo_p - lo_q) <= lam * d + 1e-9)
        and np.all(np.abs(hi_p - hi_q) <= lam * d + 1e-9)
    )

    agree_ok = bool(
        np.max(np.abs(ext.minimal(anchors) - values)) <= 1e-12
        and np.max(np.abs(ext.maximal(anchors) - values)) <= 1e-12
    )

    queries = rng.random((500, 2))
    lo = ext.minimal(queries)
    hi = ext.maximal(queries)
    sandwich_ok = True
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        mid = t * lo + (1.0 - t) * hi
        sandwich_ok &= bool(np.all(lo - 1e-9 <= mid) and np.all(mid <= hi + 1e-9))
    elapsed = time.perf_counter() - t0

    ok = lip_ok and agree_ok and sandwich_ok and elapsed < 2.0
    report(1, "mw-suite", ok, f"lambda={lam:.3g}, {elapsed:.2f}s")
    assert lip_ok, "Lipschitz bound violated on a sampled query pair"
    assert agree_ok, "extension does not reproduce anchor values within 1e-12"
    assert sandwich_ok, "a convex blend escaped the extremal envelope"
    assert elapsed < 2.0, f"runtime {elapsed:.2f}s exceeds 2s"


def test_criterion_2_envelope_suite():
    rng = np.random.default_rng(202)
    dom = random_explicit_domain(rng, 100)
    src = lk.AnchoredFunction(dom, np.arange(100), rng.uniform(-1.0, 1.0, 100))
    pts = np.arange(100)

    t0 = time.perf_counter()
    kappas = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]
    seq = lk.envelope_sequence(src, kappas)
    table = np.stack([f.batch(pts) for f in seq])
    monotone_ok = bool(np.all(np.diff(table, axis=0) >= 0.0))

    n_star = lk.convergence_index(src)
    fixed = lk.EnvelopeFunction(lk.EnvelopeSpec(src, n_star)).batch(pts)
    fixed_ok = bool(np.max(np.abs(fixed - src.values)) <= 1e-12)

    upper = lk.EnvelopeFunction(lk.EnvelopeSpec(src, 2.0, side="upper")).batch(pts)
    neg_lower = lk.EnvelopeFunction(
        lk.EnvelopeSpec(src.with_values(-src.values), 2.0)).batch(pts)
    duality_ok = bool(np.array_equal(upper, -neg_lower))

    f2 = lk.EnvelopeFunction(lk.EnvelopeSpec(src, 2.0)).batch(pts)
    minorant_ok = True
    for c in np.linspace(0.01, 2.0, 100):
        g = lk.EnvelopeFunction(lk.EnvelopeSpec(src.with_values(src.values - c), 2.0))
        minorant_ok &= bool(np.all(g.batch(pts) <= f2 + 1e-9))
    elapsed = time.perf_counter() - t0

    ok = monotone_ok and fixed_ok and duality_ok and minorant_ok and elapsed < 1.0
    report(2, "envelope-suite", ok, f"N*={n_star:.3g}, {elapsed:.2f}s")
    assert monotone_ok, "envelope not monotone in the rate"
    assert fixed_ok, "envelope at the convergence index does not reproduce the values"
    assert duality_ok, "upper envelope is not exactly the negated lower of the negation"
    assert minorant_ok, "a generated minorant escaped the envelope"
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s exceeds 1s"


def test_criterion_3_divergence_probe():
    radii = [10.0 ** e for e in range(1, 7)]
    vals = lk.divergence_probe(radii, kappa=1.0)
    below_ok = all(v < -(r - 1.0) for r, v in zip(radii, vals))
    decreasing_ok = all(b < a for a, b in zip(vals, vals[1:]))
    ok = below_ok and decreasing_ok
    report(3, "divergence-probe", ok, f"last={vals[-1]:.4g}")
    assert below_ok, "envelope value failed to fall below -(r - 1)"
    assert decreasing_ok, "probe values are not strictly decreasing"


def test_criterion_4_partition_suite():
    plane = lk.EuclideanDomain(2)
    rng = np.random.default_rng(404)
    samples = rng.random((200, 2))
    all_ok = True
    for trial in range(10):
        centers = rng.random((10, 2))
        radii = rng.uniform(0.55, 0.9, 10)
        cover = lk.Cover(plane,
                         tuple(lk.BallSet(lk.Ball(c, r)) for c, r in zip(centers, radii)),
                         samples=samples)
        part = lk.build_partition(cover)
        xi = part.xi(samples)
        margins = cover.margins(samples)
        gammas = part.gamma_table(samples)
        all_ok &= bool(np.max(np.abs(xi.sum(axis=1) - 1.0)) <= 1e-12)
        all_ok &= bool(np.all(xi >= 0.0) and np.all(xi <= 1.0))
        all_ok &= bool(np.all(margins[xi > 0.0] > 0.0))
        for i in range(samples.shape[0]):
            k = lk.vanish_index(part, samples[i])
            all_ok &= bool(np.all(gammas[i, k:] == 0.0))

    line3 = lk.ExplicitDomain([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    worked = lk.build_partition(
        lk.Cover(line3, (lk.SubsetSet((0, 1)), lk.SubsetSet((1, 2)))))
    xi = worked.xi([0, 1, 2])
    worked_ok = bool(
        np.max(np.abs(xi[:, 0] - [1.0, 11.0 / 14.0, 0.0])) <= 1e-12
        and np.max(np.abs(xi[:, 1] - [0.0, 3.0 / 14.0, 1.0])) <= 1e-12
    )
    ok = all_ok and worked_ok
    report(4, "partition-suite", ok)
    assert all_ok, "a random ball cover violated a partition invariant"
    assert worked_ok, "worked three-point weights drifted beyond 1e-12"


def test_criterion_5_monotone_approximation():
    line3 = lk.ExplicitDomain([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    spiky = lk.AnchoredFunction(line3, [0, 1, 2], [0.0, 5.0, 1.0])
    f1, f2, f5 = lk.monotone_approximation(spiky, [1, 2, 5])
    fixture_ok = (
        np.array_equal(f1.batch([0, 1, 2]), [0.0, 1.0, 1.0])
        and np.array_equal(f2.batch([0, 1, 2]), [0.0, 2.0, 1.0])
        and np.array_equal(f5.batch([0, 1, 2]), spiky.values)
    )

    rng = np.random.default_rng(505)
    dom = random_explicit_domain(rng, 100)
    src = lk.AnchoredFunction(dom, np.arange(100), rng.uniform(-3.0, 3.0, 100))
    n_star = int(np.ceil(lk.convergence_index(src)))
    ns = list(range(1, n_star + 1))
    fs = lk.monotone_approximation(src, ns)
    table = np.stack([f.batch(np.arange(100)) for f in fs])
    monotone_ok = bool(np.all(np.diff(table, axis=0) >= 0.0))
    reaches_ok = bool(np.array_equal(table[-1], src.values))

    ok = fixture_ok and monotone_ok and reaches_ok
    report(5, "monotone-approximation", ok, f"ceil(N*)={n_star}")
    assert fixture_ok, "fixture sequence differs from (0,1,1), (0,2,1), values"
    assert monotone_ok, "sequence is not pointwise nondecreasing"
    assert reaches_ok, "sequence does not reach the values at ceil(N*)"


def test_criterion_6_uniform_and_fine():
    line = lk.EuclideanDomain(1)
    xs = np.linspace(0.0, 4.0, 400)
    src = lk.AnchoredFunction(line, xs, np.sin(5.0 * xs) + xs)

    eps = 0.05
    f_uniform = lk.uniform_approximation(src, lk.LevelGrid.for_values(src.values, eps))
    uni_err = float(np.max(np.abs(f_uniform.batch(xs) - src.values)))
    uniform_ok = uni_err < eps

    tol = lk.AnchoredFunction(line, xs, 0.05 + 0.05 * xs)
    f_fine = lk.fine_approximation(src, tol)
    fine_gap = float(np.max(np.abs(f_fine.batch(xs) - src.values) - tol.values))
    fine_ok = fine_gap < 0.0

    lip = lk.empirical_lip(f_uniform, samples=xs)
    lip_ok = bool(np.isfinite(lip.value))

    ok = uniform_ok and fine_ok and lip_ok
    report(6, "uniform-fine", ok,
           f"max|f-phi|={uni_err:.4f}, lip(f)={lip.value:.3g}")
    assert uniform_ok, f"uniform error {uni_err} not strictly below {eps}"
    assert fine_ok, f"fine approximation leaves the tube by {fine_gap}"
    assert lip_ok, "empirical Lipschitz constant is not finite"


def test_criterion_7_insertion():
    plane = lk.EuclideanDomain(2)
    rng = np.random.default_rng(707)
    samples = rng.random((200, 2))
    lo = rng.uniform(-1.0, 1.0, 200)
    hi = lo + 0.2 + rng.uniform(0.0, 1.0, 200)
    below = lk.AnchoredFunction(plane, samples, lo)
    above = lk.AnchoredFunction(plane, samples, hi)
    grid = lk.LevelGrid.for_range(float(lo.min()), float(hi.max()), 0.05, 0.05)
    vals = lk.insert_between(below, above, grid).batch(samples)
    strict_ok = bool(np.all(vals > lo) and np.all(vals < hi))
    report(7, "insertion", strict_ok)
    assert strict_ok, "inserted function is not strictly between the bounds"


@pytest.fixture(scope="module")
def small_scale_run():
    line = lk.EuclideanDomain(1)
    xs = np.linspace(0.0, 100.0, 10_000)
    src = lk.AnchoredFunction(line, xs, np.sqrt(xs))
    eps, delta, k = 0.1, 0.005, 21
    t0 = time.perf_counter()
    spec = lk.SmallScaleSpec(src, delta, k, eps)
    f = lk.small_scale_approximation(src, spec)
    values = f.batch(xs)
    agreement = lk.window_agreement(src, spec, xs, narrow_values=values)
    k_check = lk.check_small_scale(
        lk.AnchoredFunction(line, xs, values), delta=delta, bound=float(k))
    elapsed = time.perf_counter() - t0
    return src, spec, values, agreement, k_check, elapsed


def test_criterion_8_small_scale(small_scale_run):
    src, spec, values, agreement, k_check, elapsed = small_scale_run
    two_sided_ok = bool(
        np.all(values <= src.values) and np.all(values >= src.values - spec.epsilon)
    )
    window_ok = agreement <= 1e-12
    k_ok = k_check.passed
    time_ok = elapsed < 10.0
    ok = two_sided_ok and window_ok and k_ok and time_ok
    report(8, "small-scale", ok, f"{elapsed:.2f}s, window gap {agreement:.2g}")
    assert two_sided_ok, "windowed envelope leaves [phi - eps, phi]"
    assert k_ok, "small-scale Lipschitz check failed"
    assert window_ok, "delta and 2*delta window evaluations disagree"
    assert time_ok, f"runtime {elapsed:.2f}s exceeds 10s"


def test_criterion_9_uniform_continuity_necessity(small_scale_run):
    src, spec, values, _, _, _ = small_scale_run
    eps_prime = 0.5
    sup_gap = float(np.max(np.abs(values - src.values)))
    premise_ok = eps_prime > 3.0 * sup_gap
    scale = min(eps_prime / (3.0 * spec.k), spec.delta)
    verdict = lk.check_uniform_continuity(src, scale=scale, bound=eps_prime)
    ok = premise_ok and verdict.passed
    report(9, "uniform-continuity-necessity", ok,
           f"scale={scale:.3g}, {verdict.detail}")
    assert premise_ok, "eps' does not dominate three times the approximation gap"
    assert verdict.passed, "modulus at the derived scale exceeds eps'"


def test_criterion_10_cli_determinism(tmp_path):
    ok = True
    for name, build in sorted(GOLDEN_COMMANDS.items()):
        a = tmp_path / f"a_{name}"
        b = tmp_path / f"b_{name}"
        ok &= cli_main([str(x) for x in build(a)]) == 0
        ok &= cli_main([str(x) for x in build(b)]) == 0
        ok &= a.read_bytes() == b.read_bytes()
        ok &= a.read_bytes() == (GOLDEN / name).read_bytes()
    report(10, "cli-determinism", ok)
    assert ok, "a fixture command is not byte-deterministic against its golden"
