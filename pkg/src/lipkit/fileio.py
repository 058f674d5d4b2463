"""File formats: anchor/query CSVs, explicit-domain JSON, cover JSON, outputs.

Euclidean anchor CSVs carry a header ``x1,...,xd,value[,lambda]``; on
explicit domains the coordinate columns are replaced by a single ``label``
column naming the domain point.  Query CSVs carry ``x1,...,xd`` or
``label`` accordingly.  All floats are written in shortest round-trip
decimal form so outputs are byte-stable across runs and platforms.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ArgumentError
from .metric import AnchoredFunction, Ball, EuclideanDomain, ExplicitDomain, MetricDomain
from .partition import BallSet, Cover, CoverSet, PreimageSet, SublevelSet, SubsetSet


def fmt(x) -> str:
    """Shortest round-trip decimal for a float; empty string for None."""
    if x is None:
        return ""
    return repr(float(x))


def read_domain_json(path) -> ExplicitDomain:
    """Load ``{"labels": [...], "matrix": [[...]], "transform"?: ...}``."""
    data = json.loads(Path(path).read_text())
    if "matrix" not in data:
        raise ArgumentError(f"domain file {path} has no 'matrix' entry")
    return ExplicitDomain(
        np.asarray(data["matrix"], dtype=float),
        tuple(data.get("labels", ())),
        data.get("transform", "identity"),
    )


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ArgumentError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def read_anchor_csv(path, domain: MetricDomain | None = None) -> AnchoredFunction:
    """Load anchors with values and optional per-anchor constants.

    Without an explicit ``domain`` the coordinate columns fix a Euclidean
    domain of matching dimension.
    """
    header, rows = _read_rows(path)
    has_lambda = header and header[-1] == "lambda"
    value_col = len(header) - (2 if has_lambda else 1)
    if value_col < 0 or header[value_col] != "value":
        raise ArgumentError(f"{path}: expected a 'value' column before any 'lambda' column")

    if header[0] == "label":
        if domain is None or not domain.is_explicit:
            raise ArgumentError(f"{path} uses point labels and needs an explicit domain")
        anchors = [domain.index_of(r[0].strip()) for r in rows]
    else:
        dim = value_col
        if [h for h in header[:dim]] != [f"x{i + 1}" for i in range(dim)]:
            raise ArgumentError(f"{path}: coordinate columns must be x1..x{dim}")
        if domain is None:
            domain = EuclideanDomain(dim)
        anchors = [[float(c) for c in r[:dim]] for r in rows]
    values = [float(r[value_col]) for r in rows]
    constants = [float(r[value_col + 1]) for r in rows] if has_lambda else None
    return AnchoredFunction(domain, np.asarray(anchors), values, constants)


def read_query_csv(path, domain: MetricDomain) -> np.ndarray:
    """Load query points for a known domain; a header-only file means no queries."""
    header, rows = _read_rows(path)
    if header[0] == "label":
        if not domain.is_explicit:
            raise ArgumentError(f"{path} uses point labels and needs an explicit domain")
        return np.asarray([domain.index_of(r[0].strip()) for r in rows], dtype=int)
    if not rows:
        return np.empty((0, len(header)))
    return np.asarray([[float(c) for c in r] for r in rows], dtype=float)


def read_subset_cover_json(path) -> list[tuple[int, ...]]:
    """Load a cover consisting purely of subset sets, as raw index tuples."""
    data = json.loads(Path(path).read_text())
    subsets = []
    for entry in data.get("sets", []):
        if entry.get("type") != "subset":
            raise ArgumentError(
                "a cover of the anchor set must consist of subset sets only"
            )
        subsets.append(tuple(int(i) for i in entry["indices"]))
    if not subsets:
        raise ArgumentError(f"cover file {path} defines no sets")
    return subsets


def read_cover_json(path, domain: MetricDomain,
                    carrier: AnchoredFunction | None = None) -> Cover:
    """Load a cover description.

    Set entries: ``{"type": "ball", "center": ..., "radius": r}``,
    ``{"type": "subset", "indices": [...]}``,
    ``{"type": "sublevel", "threshold": t}``, and
    ``{"type": "preimage", "level": r, "width": e}``; the last two require a
    carrier.
    """
    data = json.loads(Path(path).read_text())
    sets: list[CoverSet] = []
    for entry in data.get("sets", []):
        kind = entry.get("type")
        if kind == "ball":
            center = entry["center"]
            if domain.is_explicit and not isinstance(center, int):
                center = domain.index_of(str(center)) if isinstance(center, str) else int(center[0])
            sets.append(BallSet(Ball(center, float(entry["radius"]))))
        elif kind == "subset":
            sets.append(SubsetSet(tuple(int(i) for i in entry["indices"])))
        elif kind == "sublevel":
            if carrier is None:
                raise ArgumentError("sublevel cover sets need carrier values (--anchors)")
            sets.append(SublevelSet(carrier, threshold=float(entry["threshold"])))
        elif kind == "preimage":
            if carrier is None:
                raise ArgumentError("preimage cover sets need carrier values (--anchors)")
            sets.append(PreimageSet(carrier, level=float(entry["level"]),
                                    width=float(entry["width"])))
        else:
            raise ArgumentError(f"unknown cover set type {kind!r}")
    if not sets:
        raise ArgumentError(f"cover file {path} defines no sets")
    return Cover(domain, tuple(sets), carrier=carrier)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Write rows with deterministic float formatting and LF line endings."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                cell if isinstance(cell, str) else
                (str(cell) if isinstance(cell, (int, np.integer)) else fmt(cell))
                for cell in row
            ])


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def plot_rows(x_values, series_to_values) -> list[list]:
    """Long-format ``x,series,value`` rows sorted by (series, x)."""
    rows = []
    for name in sorted(series_to_values):
        values = series_to_values[name]
        for x, v in sorted(zip(x_values, values), key=lambda t: t[0]):
            rows.append([x, name, v])
    return rows
