"""Check records, deterministic report serialisation, interval statistics.

Reports are plain dicts rendered with sorted keys so that two runs with the
same seed produce byte-identical output; wall-clock time lives under the
single top-level ``timing`` key, which comparisons are expected to drop (see
:func:`strip_timing`).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Any, Iterable, Sequence


@dataclass(frozen=True)
class Check:
    """One named pass/fail measurement inside a report."""

    name: str
    passed: bool
    measured: float | None = None
    threshold: float | None = None
    detail: str = ""

    def row(self) -> dict:
        return asdict(self)


def build_report(command: str, checks: Sequence[Check], *, config: dict | None = None,
                 data: dict | None = None, elapsed: float | None = None) -> dict:
    """Assemble the canonical report structure for one CLI command."""
    report: dict[str, Any] = {
        "command": command,
        "status": "pass" if all(c.passed for c in checks) else "fail",
        "checks": [c.row() for c in checks],
    }
    if config is not None:
        report["config"] = config
    if data is not None:
        report["data"] = data
    if elapsed is not None:
        report["timing"] = {"seconds": float(elapsed)}
    return report


def render_json(report: dict) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def strip_timing(report: dict) -> dict:
    """Copy of the report without the ``timing`` key, for byte comparisons."""
    return {k: v for k, v in report.items() if k != "timing"}


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion at ``z`` sigma."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside 0..{trials}")
    n = float(trials)
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (phat + z2 / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n))
    return (max(0.0, centre - half), min(1.0, centre + half))


SWEEP_FIELDS = ("alpha", "analytic", "empirical", "trials", "seed")


def render_sweep_csv(rows: Iterable[dict]) -> str:
    """CSV for sweep results with the fixed column order ``SWEEP_FIELDS``."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in SWEEP_FIELDS})
    return buf.getvalue()
