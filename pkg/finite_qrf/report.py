import json
import math
from typing import Any, Dict, List, NamedTuple, Optional

import pandas as pd

from finite_qrf.names import report_format_json, report_format_text, status_pass


class CheckResult(NamedTuple):
    name: str
    kind: str
    status: str
    residual: Optional[float]
    runtime: float = 0.0
    message: Optional[str] = None


class Report:
    """
    The outcome of running a scenario: one result per declared check, in declaration order.
    """

    def __init__(self, checks: Optional[List[CheckResult]] = None, version: Optional[str] = None,
                 digest: Optional[str] = None, scenario: Optional[str] = None, include_timings: bool = False):
        self.checks = list(checks or [])
        self.version = version
        self.digest = digest
        self.scenario = scenario
        self.include_timings = include_timings

    @property
    def passed(self) -> int:
        return sum(result.status == status_pass for result in self.checks)

    @property
    def failed(self) -> int:
        """
        Failures including precondition errors.
        """
        return len(self.checks) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> Dict[str, Any]:
        checks = []
        for result in self.checks:
            entry = {"name": result.name, "kind": result.kind, "status": result.status,
                     "residual": _finite_or_none(result.residual)}
            if self.include_timings:
                entry["runtime"] = result.runtime
            if result.message is not None:
                entry["message"] = result.message
            checks.append(entry)
        data: Dict[str, Any] = {"checks": checks, "summary": {"pass": self.passed, "fail": self.failed}}
        if self.scenario is not None:
            data["scenario"] = self.scenario
        if self.version is not None:
            data["version"] = self.version
        if self.digest is not None:
            data["digest"] = self.digest
        return data

    def to_frame(self) -> pd.DataFrame:
        columns = ["name", "kind", "status", "residual"] + (["runtime"] if self.include_timings else [])
        rows = [{column: getattr(result, column) for column in columns} for result in self.checks]
        return pd.DataFrame(rows, columns=columns)


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def emit_report(report: Report, format: str = report_format_json) -> bytes:
    """
    Serializes a report as canonical JSON (sorted keys, shortest round-trip floats) or as a text table.
    """
    if format == report_format_json:
        return json.dumps(report.to_dict(), sort_keys=True, separators=(", ", ": "), allow_nan=False).encode("utf-8")
    if format == report_format_text:
        frame = report.to_frame()
        header = f"scenario: {report.scenario}\n" if report.scenario is not None else ""
        table = frame.to_string(index=False) if len(frame) else "(no checks)"
        return f"{header}{table}\npass: {report.passed}  fail: {report.failed}\n".encode("utf-8")
    raise ValueError(f"Unknown report format {format!r}, expected {report_format_json} or {report_format_text}.")


def emit_reports(reports: List[Report], format: str = report_format_json) -> bytes:
    """
    Serializes the reports of several scenarios, e.g. of the bundled corpus, in one document.
    """
    if format == report_format_json:
        data = {"reports": [report.to_dict() for report in reports],
                "summary": {"pass": sum(r.passed for r in reports), "fail": sum(r.failed for r in reports)}}
        return json.dumps(data, sort_keys=True, separators=(", ", ": "), allow_nan=False).encode("utf-8")
    return b"\n".join(emit_report(report, format) for report in reports)
