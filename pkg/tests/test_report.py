import json

import numpy as np
import pytest
from pydantic import ValidationError

from report import CSV_COLUMNS, CheckRecord, _number, build_report, canonical_json, inputs_digest, summarize, write_report


def _record(status="pass", suite="identities", name="dd_zero", residual=1e-14):
    return CheckRecord(
        suite=suite,
        name=name,
        anchor="d d = 0",
        inputs_digest=inputs_digest({"seed": 0}),
        residual=residual,
        tolerance=1e-12,
        status=status,
    )


def test_canonical_json_sorts_and_normalizes():
    a = canonical_json({"b": np.float64(0.1), "a": np.arange(3)})
    b = canonical_json({"a": [0, 1, 2], "b": 0.1})
    assert a == b
    assert a.index('"a"') < a.index('"b"')


def test_number_spells_out_non_finite():
    assert _number(float("nan")) == "nan"
    assert _number(float("inf")) == "inf"
    assert _number(-np.inf) == "-inf"
    assert _number(None) is None
    assert _number(1 / 3) == float("3.333333333333e-01")


def test_complex_values_split():
    assert json.loads(canonical_json({"z": 1 + 2j})) == {"z": {"real": 1.0, "imag": 2.0}}


def test_inputs_digest_is_stable():
    digest = inputs_digest({"seed": 3, "N": 8})
    assert len(digest) == 16
    assert int(digest, 16) >= 0
    assert digest == inputs_digest({"N": 8, "seed": 3})
    assert digest != inputs_digest({"N": 8, "seed": 4})


def test_record_status_is_validated():
    with pytest.raises(ValidationError):
        _record(status="ok")
    assert _record(status="n/a").passed
    assert not _record(status="error").passed


def test_summarize_counts_per_suite():
    records = [_record(), _record(status="fail", name="adjointness"), _record(suite="green", status="n/a")]
    summary = summarize(records)
    assert summary["identities"] == {"pass": 1, "fail": 1, "n/a": 0, "error": 0, "total": 2}
    assert summary["green"]["n/a"] == 1


def test_build_report_layout():
    report = build_report([_record()], {"lattice": {"d": 1}}, {"weyl_phase_sign": "+"})
    assert sorted(report) == ["checks", "config", "conventions", "passed", "schema_version", "summary"]
    assert report["passed"] is True
    assert build_report([_record(status="fail")], {}, {})["passed"] is False


def test_write_report_json_and_csv(tmp_path):
    report = build_report([_record(), _record(name="adjointness", residual=None, status="error")], {}, {})
    paths = write_report(report, {"identities.dd_zero": 0.01}, tmp_path / "out", fmt="csv")
    assert [p.name for p in paths] == ["report.json", "timings.json", "checks.csv"]
    loaded = json.loads(paths[0].read_text())
    assert loaded["checks"][0]["residual"] == 1e-14
    lines = paths[2].read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    assert lines[2].split(",")[3] == ""


def test_write_report_json_only(tmp_path):
    paths = write_report(build_report([_record()], {}, {}), {}, tmp_path)
    assert not (tmp_path / "checks.csv").exists()
    assert len(paths) == 2
