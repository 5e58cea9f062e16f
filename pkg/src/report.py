"""
Verification report: one record per check, a summary per suite, the config echo and the
sign conventions. The JSON form is canonical (sorted keys, fixed float format), so the same
config and seed give byte-identical reports; wall times go to a separate file.
"""
import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
STATUSES = ("pass", "fail", "n/a", "error")
CSV_COLUMNS = ("suite", "name", "status", "residual", "tolerance", "anchor", "inputs_digest", "message")


def _number(value):
    """Floats as fixed 12-digit scientific strings; non-finite values spelled out."""
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(f"{value:.12e}")


def _normalize(obj):
    if hasattr(obj, "tolist"):
        return _normalize(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, complex):
        return {"real": _number(obj.real), "imag": _number(obj.imag)}
    try:
        return _number(obj)
    except (TypeError, ValueError):
        return str(obj)


def canonical_json(payload):
    return json.dumps(_normalize(payload), sort_keys=True, indent=2, ensure_ascii=False)


def inputs_digest(inputs):
    return hashlib.sha256(canonical_json(inputs).encode("utf-8")).hexdigest()[:16]


class CheckRecord(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    suite: str
    name: str
    anchor: str
    inputs_digest: str
    residual: Optional[float] = None
    tolerance: float
    status: str = Field(pattern="^(pass|fail|n/a|error)$")
    message: str = ""
    details: dict = Field(default_factory=dict)

    @property
    def passed(self):
        return self.status in ("pass", "n/a")


def summarize(records):
    summary = {}
    for record in records:
        entry = summary.setdefault(record.suite, {status: 0 for status in STATUSES})
        entry[record.status] += 1
    for entry in summary.values():
        entry["total"] = sum(entry[s] for s in STATUSES)
    return summary


def build_report(records, config_echo, conventions):
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config_echo,
        "conventions": conventions,
        "checks": [record.model_dump() for record in records],
        "summary": summarize(records),
        "passed": all(record.passed for record in records),
    }


def write_report(report, timings, out_dir, fmt="json"):
    """Write report.json (always), timings.json and, for fmt == "csv", checks.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "report.json", out_dir / "timings.json"]
    paths[0].write_text(canonical_json(report) + "\n", encoding="utf-8")
    paths[1].write_text(json.dumps(timings, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if fmt == "csv":
        path = out_dir / "checks.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, extrasaction="ignore")
            writer.writeheader()
            for check in report["checks"]:
                row = dict(check)
                row["residual"] = "" if check["residual"] is None else repr(_number(check["residual"]))
                writer.writerow(row)
        paths.append(path)
    logger.info("report written to %s", out_dir)
    return paths
