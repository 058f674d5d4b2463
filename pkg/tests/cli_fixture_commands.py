"""Fixture CLI invocations shared by the CLI tests and the acceptance suite."""

from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "golden"

GOLDEN_COMMANDS = {
    "extend_pair.csv": lambda out: (
        "extend", "--anchors", FIXTURES / "anchors_pair.csv",
        "--queries", FIXTURES / "query_one.csv",
        "--lambda", "auto", "--out", out),
    "envelope_triple.csv": lambda out: (
        "envelope", "--anchors", FIXTURES / "anchors_triple.csv",
        "--queries", FIXTURES / "queries_triple.csv",
        "--kappa", "1", "--out", out),
    "pou_line3.csv": lambda out: (
        "pou", "--domain", FIXTURES / "domain_line3.json",
        "--cover", FIXTURES / "cover_line3.json", "--out", out),
    "approx_monotone_line3.csv": lambda out: (
        "approx", "monotone", "--domain", FIXTURES / "domain_line3.json",
        "--anchors", FIXTURES / "anchors_line3.csv", "--n", "5", "--out", out),
}
