"""Empirical measurement of Lipschitz-type moduli and sampled verdicts.

All checks here are evidence over finite samples, never proofs: slopes
measured over sampled pairs bound the true constants from below, and a
passing verdict means no sampled witness contradicts the claim.  Verdicts
are ``pass``, ``fail`` (with witnesses), or ``inconclusive`` (nothing in
scope).  Scans are deterministic: pairs are visited in index order and the
first extremal pair is reported; beyond the pair budget, pairs are
subsampled with a recorded seed.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .evaluable import Evaluable
from .metric import AnchoredFunction, MetricDomain, as_points, cross_distances

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

DEFAULT_PAIR_BUDGET = 1_000_000
_CHUNK = 512


def worker_count() -> int:
    """Parallel workers for pair scans, capped by ``LIPKIT_THREADS``."""
    cap = os.environ.get("LIPKIT_THREADS")
    if cap is not None:
        try:
            return max(1, int(cap))
        except ValueError:
            raise ArgumentError(f"LIPKIT_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


@dataclass(frozen=True)
class Verdict:
    """Outcome of one sampled check."""

    status: str
    witnesses: tuple = ()
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witnesses": [list(np.asarray(w).tolist() if hasattr(w, "__len__") else [w])
                          for w in self.witnesses],
            "detail": self.detail,
        }


def _resolve(f, samples, domain: MetricDomain | None):
    """Normalise (function, samples) into (domain, points, values)."""
    if isinstance(f, AnchoredFunction):
        if samples is None:
            return f.domain, f.anchors, f.values
        pts = as_points(f.domain, samples)
        idx = [f.index_of(p) for p in pts]
        if any(i is None for i in idx):
            raise ArgumentError("anchored data can only be sampled at its own anchors")
        return f.domain, pts, f.values[np.asarray(idx, dtype=int)]
    if isinstance(f, Evaluable):
        dom = f.domain if f.domain is not None else domain
        if dom is None:
            raise ArgumentError("an evaluable without a domain needs one passed explicitly")
        if samples is None:
            raise ArgumentError("evaluable functions need explicit sample points")
        pts = as_points(dom, samples)
        return dom, pts, f.batch(pts)
    raise ArgumentError(f"cannot measure object of type {type(f).__name__}")


@dataclass(frozen=True)
class EmpiricalLip:
    """Largest sampled slope with its witness pair (positions into the samples)."""

    value: float
    witness: tuple[int, int]
    pairs_scanned: int
    subsampled: bool
    seed: int

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "witness": [int(self.witness[0]), int(self.witness[1])],
            "pairs_scanned": self.pairs_scanned,
            "subsampled": self.subsampled,
            "seed": self.seed,
        }


def _chunk_best(domain, pts, vals, start, stop):
    """Best (ratio, i, j) over pairs with start <= i < stop and j > i."""
    d = cross_distances(domain, pts[start:stop], pts)
    dv = np.abs(vals[start:stop, None] - vals[None, :])
    cols = np.arange(pts.shape[0])[None, :]
    rows = np.arange(start, stop)[:, None]
    valid = (cols > rows) & (d > 0.0)
    ratios = np.where(valid, dv / np.where(d > 0.0, d, np.inf), -np.inf)
    flat = np.argmax(ratios)
    i, j = np.unravel_index(flat, ratios.shape)
    n_valid = int(valid.sum())
    return float(ratios[i, j]), (start + int(i), int(j)), n_valid


def empirical_lip(
    f,
    samples=None,
    domain: MetricDomain | None = None,
    pair_budget: int | None = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
) -> EmpiricalLip:
    """Largest slope ``|f(p) - f(q)| / d(p, q)`` over sampled pairs.

    Coincident samples are skipped; if every pair coincides the scan cannot
    measure anything and raises.  The result is a lower bound on the true
    Lipschitz constant.
    """
    dom, pts, vals = _resolve(f, samples, domain)
    n = pts.shape[0]
    if n < 2:
        raise ArgumentError("need at least two samples")
    total_pairs = n * (n - 1) // 2

    if pair_budget is not None and total_pairs > pair_budget:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=pair_budget)
        j = (i + 1 + rng.integers(0, n - 1, size=pair_budget)) % n
        d = np.empty(pair_budget)
        dv = np.empty(pair_budget)
        for start in range(0, pair_budget, 1 << 16):
            stop = min(start + (1 << 16), pair_budget)
            ii, jj = i[start:stop], j[start:stop]
            if dom.is_explicit:
                d[start:stop] = dom.matrix[pts[ii], pts[jj]]
            else:
                diff = pts[ii] - pts[jj]
                d[start:stop] = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            if dom.transform == "bounded":
                d[start:stop] = d[start:stop] / (1.0 + d[start:stop])
            dv[start:stop] = np.abs(vals[ii] - vals[jj])
        live = d > 0.0
        if not np.any(live):
            raise ArgumentError("all sampled pairs coincide; slopes are undefined")
        ratios = np.where(live, dv / np.where(live, d, np.inf), -np.inf)
        best = int(np.argmax(ratios))
        wi, wj = int(i[best]), int(j[best])
        return EmpiricalLip(float(ratios[best]), (min(wi, wj), max(wi, wj)),
                            pair_budget, True, seed)

    chunks = [(s, min(s + _CHUNK, n)) for s in range(0, n, _CHUNK)]
    workers = worker_count()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _chunk_best(dom, pts, vals, *c), chunks))
    else:
        results = [_chunk_best(dom, pts, vals, *c) for c in chunks]
    best_ratio, witness, scanned = -np.inf, None, 0
    for ratio, pair, n_valid in results:
        scanned += n_valid
        if ratio > best_ratio:
            best_ratio, witness = ratio, pair
    if scanned == 0 or witness is None or best_ratio == -np.inf:
        raise ArgumentError("all sampled pairs coincide; slopes are undefined")
    return EmpiricalLip(float(best_ratio), witness, scanned, False, seed)


def pointwise_modulus(f, point, radius: float, samples=None,
                      domain: MetricDomain | None = None) -> float:
    """Largest slope from ``point`` to samples strictly inside its ``radius``-ball.

    Returns 0 when no sample punctures the ball (the isolated-point
    convention).
    """
    if not radius > 0:
        raise ArgumentError("radius must be positive")
    dom, pts, vals = _resolve(f, samples, domain)
    if isinstance(f, AnchoredFunction):
        center_pts = as_points(dom, [point] if dom.is_explicit else np.atleast_2d(np.asarray(point, dtype=float)))
        idx = f.index_of(center_pts[0])
        if idx is None:
            raise ArgumentError("pointwise modulus of anchored data needs an anchor as center")
        center_val = f.values[idx]
        center = center_pts
    else:
        center = as_points(dom, [point] if dom.is_explicit else np.atleast_2d(np.asarray(point, dtype=float)))
        center_val = float(f.batch(center)[0])
    d = cross_distances(dom, center, pts)[0]
    inside = (d > 0.0) & (d < radius)
    if not np.any(inside):
        return 0.0
    return float((np.abs(vals[inside] - center_val) / d[inside]).max())


def check_small_scale(
    f,
    samples=None,
    delta: float = 1.0,
    bound: float = 1.0,
    domain: MetricDomain | None = None,
    tol: float = 1e-9,
    max_witnesses: int = 10,
) -> Verdict:
    """Pass iff every sampled pair closer than ``delta`` has slope at most ``bound``.

    A pair fails when ``|f(p) - f(q)| > bound * d(p, q) + tol``.  Pairs at
    distance zero are out of scope.  With no pair closer than ``delta`` the
    claim holds vacuously, which still passes.
    """
    if not (delta > 0 and bound >= 0):
        raise ArgumentError("delta must be positive and the bound nonnegative")
    dom, pts, vals = _resolve(f, samples, domain)
    n = pts.shape[0]
    if n == 0:
        return Verdict(INCONCLUSIVE, (), "no samples in scope")
    witnesses: list[tuple[int, int]] = []
    worst_excess, worst_pair = 0.0, None
    in_scope = 0
    n_bad = 0
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = cross_distances(dom, pts[start:stop], pts)
        dv = np.abs(vals[start:stop, None] - vals[None, :])
        cols = np.arange(n)[None, :]
        rows = np.arange(start, stop)[:, None]
        scope = (cols > rows) & (d > 0.0) & (d < delta)
        in_scope += int(scope.sum())
        excess = np.where(scope, dv - (bound * d + tol), -np.inf)
        bad = excess > 0.0
        n_bad += int(bad.sum())
        if np.any(bad):
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            if excess[i, j] > worst_excess:
                worst_excess, worst_pair = float(excess[i, j]), (start + int(i), int(j))
            if len(witnesses) < max_witnesses:
                for i, j in np.argwhere(bad)[: max_witnesses - len(witnesses)]:
                    witnesses.append((start + int(i), int(j)))
    if worst_pair is not None:
        ordered = [worst_pair] + [w for w in witnesses if w != worst_pair]
        return Verdict(FAIL, tuple(ordered[:max_witnesses]),
                       f"{n_bad} sampled pair(s) exceed the bound; "
                       f"worst excess {worst_excess!r}")
    return Verdict(PASS, (), f"{in_scope} pair(s) in scope")


def check_extension(ext: Evaluable, source: AnchoredFunction, tol: float = 1e-12) -> Verdict:
    """Pass iff ``ext`` reproduces the source values at every anchor within ``tol``."""
    vals = ext.batch(source.anchors)
    gaps = np.abs(vals - source.values)
    bad = np.nonzero(gaps > tol)[0]
    if bad.size:
        return Verdict(FAIL, tuple(int(b) for b in bad[:10]),
                       f"max anchor gap {float(gaps.max())!r}")
    return Verdict(PASS, (), f"max anchor gap {float(gaps.max())!r}")


def check_sandwich(lo, mid, hi, samples, domain: MetricDomain | None = None,
                   tol: float = 1e-9) -> Verdict:
    """Pass iff ``lo <= mid <= hi`` pointwise at the samples, within ``tol``."""
    def values(f):
        if isinstance(f, np.ndarray):
            return f
        _, _, v = _resolve(f, samples, domain)
        return v

    v_lo, v_mid, v_hi = values(lo), values(mid), values(hi)
    if v_mid.shape[0] == 0:
        return Verdict(INCONCLUSIVE, (), "no samples in scope")
    bad = np.nonzero((v_mid < v_lo - tol) | (v_mid > v_hi + tol))[0]
    if bad.size:
        return Verdict(FAIL, tuple(int(b) for b in bad[:10]), "ordering violated")
    return Verdict(PASS, (), "ordering holds at all samples")


def check_uniform_continuity(f, samples=None, scale: float = 1.0,
                             bound: float = 1.0,
                             domain: MetricDomain | None = None) -> Verdict:
    """Pass iff values move by at most ``bound`` over sampled pairs closer than ``scale``."""
    if not scale > 0:
        raise ArgumentError("scale must be positive")
    dom, pts, vals = _resolve(f, samples, domain)
    n = pts.shape[0]
    if n == 0:
        return Verdict(INCONCLUSIVE, (), "no samples in scope")
    worst = 0.0
    witness: tuple[int, int] | None = None
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = cross_distances(dom, pts[start:stop], pts)
        dv = np.abs(vals[start:stop, None] - vals[None, :])
        cols = np.arange(n)[None, :]
        rows = np.arange(start, stop)[:, None]
        scope = (cols > rows) & (d < scale)
        moved = np.where(scope, dv, -np.inf)
        i, j = np.unravel_index(np.argmax(moved), moved.shape)
        if moved[i, j] > worst:
            worst = float(moved[i, j])
            witness = (start + int(i), int(j))
    if worst > bound:
        return Verdict(FAIL, (witness,), f"oscillation {worst!r} at scale {scale!r}")
    return Verdict(PASS, (), f"oscillation {worst!r} at scale {scale!r}")


def blend_modulus_report(blend, samples) -> dict:
    """Measured moduli of a partition blend and its parts over one sample patch.

    Reports (never asserts) the blend's sampled modulus next to a composite
    bound built from the active weights and pieces:
    ``max_part_modulus * (1 + active_pieces) * (1 + max_piece_value)``.
    """
    pts = as_points(blend.domain, samples)
    weights = blend.partition.xi(pts)
    active = np.nonzero(weights.max(axis=0) > 0.0)[0]
    moduli = [empirical_lip(blend, pts).value]
    piece_peak = 0.0
    for k in active:
        moduli.append(empirical_lip(blend.pieces[k], pts).value)
        piece_peak = max(piece_peak, float(np.abs(blend.pieces[k].batch(pts)).max()))
        member = blend.partition.members()[k]
        moduli.append(empirical_lip(member, pts).value)
    part_modulus = max(moduli[1:], default=0.0)
    return {
        "blend_modulus": moduli[0],
        "part_modulus": part_modulus,
        "active_pieces": int(active.size),
        "max_piece_value": piece_peak,
        "composite_bound": part_modulus * (1 + int(active.size)) * (1.0 + piece_peak),
    }


@dataclass
class LipschitzReport:
    """Aggregated empirical measurements for one function over one sample set."""

    global_constant: float
    witness: tuple[int, int]
    pointwise: list[dict] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    seed: int = 0
    subsampled: bool = False

    def to_json(self) -> dict:
        return {
            "global_constant": self.global_constant,
            "witness": [int(self.witness[0]), int(self.witness[1])],
            "pointwise": self.pointwise,
            "verdicts": {k: v.to_json() if isinstance(v, Verdict) else v
                         for k, v in self.verdicts.items()},
            "seed": self.seed,
            "subsampled": self.subsampled,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def build_report(
    f,
    samples=None,
    domain: MetricDomain | None = None,
    radius: float | None = None,
    small_scale: tuple[float, float] | None = None,
    pair_budget: int | None = DEFAULT_PAIR_BUDGET,
    seed: int = 0,
) -> LipschitzReport:
    """Measure a function end to end: global slope, per-sample moduli, verdicts."""
    lip = empirical_lip(f, samples, domain, pair_budget, seed)
    dom, pts, vals = _resolve(f, samples, domain)
    report = LipschitzReport(lip.value, lip.witness, seed=seed, subsampled=lip.subsampled)
    if radius is not None:
        for i in range(pts.shape[0]):
            value = pointwise_modulus(
                f, pts[i], radius,
                samples if samples is not None else None,
                domain,
            )
            report.pointwise.append({"sample": i, "radius": radius, "modulus": value})
    if small_scale is not None:
        delta, bound = small_scale
        report.verdicts["small_scale"] = check_small_scale(
            f, samples, delta, bound, domain
        )
    return report
