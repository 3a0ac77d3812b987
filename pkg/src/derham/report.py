"""Verification reports: per-check verdicts, environment stamp and emitters."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["Check", "Report", "digest", "environment_stamp", "emit", "load_report"]

PASS, FAIL, SKIP = "pass", "fail", "skip"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist") and callable(v.tolist):      # numpy arrays and scalars
        return _jsonable(v.tolist())
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def digest(inputs: dict) -> str:
    """Short stable hash of a check's inputs."""
    blob = json.dumps(_jsonable(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def environment_stamp() -> dict:
    import numpy
    import scipy
    try:
        import gmpy2
        gm = gmpy2.version()
    except ImportError:
        gm = None
    return {"python": platform.python_version(), "numpy": numpy.__version__,
            "scipy": scipy.__version__, "gmpy2": gm, "platform": sys.platform}


@dataclass
class Check:
    name: str
    anchor: str                      # result the check exercises, or "plumbing"
    inputs: dict
    measured: object
    threshold: object
    verdict: str                     # pass | fail | skip
    reason: str = ""
    inputs_digest: str = ""

    def __post_init__(self):
        if self.verdict not in (PASS, FAIL, SKIP):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if not self.anchor:
            raise ValueError("every check needs an anchor string or 'plumbing'")
        self.inputs = _jsonable(self.inputs)
        self.measured = _jsonable(self.measured)
        self.threshold = _jsonable(self.threshold)
        if not self.inputs_digest:
            self.inputs_digest = digest(self.inputs)

    @classmethod
    def compare(cls, name: str, anchor: str, inputs: dict, measured: float, threshold: float,
                *, above: bool = False) -> "Check":
        """Pass when measured <= threshold (or > threshold with ``above``)."""
        ok = measured > threshold if above else measured <= threshold
        return cls(name, anchor, inputs, measured, threshold, PASS if ok else FAIL)

    @classmethod
    def exact(cls, name: str, anchor: str, inputs: dict, ok: bool, measured=None) -> "Check":
        return cls(name, anchor, inputs, ok if measured is None else measured, "exact",
                   PASS if ok else FAIL)

    @classmethod
    def skipped(cls, name: str, anchor: str, inputs: dict, reason: str) -> "Check":
        return cls(name, anchor, inputs, None, None, SKIP, reason)


@dataclass
class Report:
    suite_id: str
    checks: list = field(default_factory=list)
    environment: dict = field(default_factory=environment_stamp)
    series: dict = field(default_factory=dict)     # name -> {"columns": [...], "rows": [...]}
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                                                  time.gmtime()))

    @property
    def passed(self) -> bool:
        return all(c.verdict != FAIL for c in self.checks)

    @property
    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, SKIP: 0}
        for c in self.checks:
            out[c.verdict] += 1
        return out

    def add(self, *checks: Check) -> None:
        self.checks.extend(checks)

    def add_series(self, name: str, columns: list, rows: list) -> None:
        self.series[name] = {"columns": list(columns), "rows": _jsonable([list(r) for r in rows])}

    def to_dict(self) -> dict:
        return {
            "suite_id": self.suite_id,
            "timestamp": self.timestamp,
            "environment": self.environment,
            "passed": self.passed,
            "counts": self.counts,
            "checks": [asdict(c) for c in self.checks],
            "series": self.series,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Report":
        checks = [Check(**c) for c in doc.get("checks", [])]
        return cls(doc["suite_id"], checks, doc.get("environment", {}), doc.get("series", {}),
                   doc.get("timestamp", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "anchor", "inputs_digest", "measured", "threshold", "verdict", "reason"])
        for c in self.checks:
            w.writerow([c.name, c.anchor, c.inputs_digest, json.dumps(c.measured),
                        json.dumps(c.threshold), c.verdict, c.reason])
        return buf.getvalue()

    def summary_lines(self) -> list:
        return [f"{c.verdict.upper():4} {c.name}: measured={c.measured} threshold={c.threshold}"
                + (f" ({c.reason})" if c.reason else "") for c in self.checks]


def _series_csv(series: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(series["columns"])
    w.writerows(series["rows"])
    return buf.getvalue()


def emit(report: Report, fmt: str, out_dir: str | Path) -> list:
    """Write the report as json, csv or plot-data files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = report.suite_id.replace("/", "_")
    if fmt == "json":
        paths = [out / f"{stem}.json"]
        paths[0].write_text(report.to_json())
    elif fmt == "csv":
        paths = [out / f"{stem}.csv"]
        paths[0].write_text(report.to_csv())
    elif fmt == "plot-data":
        paths = []
        for name, s in sorted(report.series.items()):
            p = out / f"{stem}.{name}.csv"
            p.write_text(_series_csv(s))
            paths.append(p)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return paths


def load_report(path: str | Path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text()))
