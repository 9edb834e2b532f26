"""Data models for suite runs: check verdicts and suite reports"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from sinaispectra.domain.config import ExperimentConfig
from sinaispectra.domain.formatters.table_formatter import TableFormatter


class VerdictStatus(Enum):
    """Outcome of one declared check"""

    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"


@dataclass(frozen=True)
class CheckVerdict:
    """Verdict of one named check.

    Attributes:
        name: Check name, unique within a suite report
        status: pass, fail or skip
        reason: Why the check failed or was skipped
        value: Headline number the verdict was decided on
    """

    name: str
    status: VerdictStatus
    reason: Optional[str] = None
    value: Optional[float] = None

    def __post_init__(self):
        if self.status is VerdictStatus.SKIP and not self.reason:
            raise ValueError(f"Skipped check '{self.name}' needs a reason")

    @classmethod
    def decide(
        cls, name: str, ok: bool, reason: Optional[str] = None, value: Optional[float] = None
    ) -> "CheckVerdict":
        """Pass when ok, otherwise fail with `reason`."""
        if ok:
            return cls(name=name, status=VerdictStatus.PASS, value=value)
        return cls(name=name, status=VerdictStatus.FAIL, reason=reason, value=value)

    @classmethod
    def skip(cls, name: str, reason: str) -> "CheckVerdict":
        return cls(name=name, status=VerdictStatus.SKIP, reason=reason)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "reason": self.reason,
            "value": self.value,
        }


@dataclass
class SuiteReport:
    """Result of one suite run.

    Attributes:
        suite: Suite name
        config: The exact configuration the suite ran with
        declared: Names of the checks the suite promised to decide
        verdicts: One verdict per declared check
        instances: Per-instance raw numbers, one dict per row of the CSV output
        details: Suite-level raw numbers
        wall_clock_seconds: Run time, kept out of the report body
    """

    suite: str
    config: ExperimentConfig
    declared: List[str] = field(default_factory=list)
    verdicts: List[CheckVerdict] = field(default_factory=list)
    instances: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    wall_clock_seconds: float = 0.0

    def declare(self, *names: str) -> None:
        self.declared.extend(names)

    def add(self, verdict: CheckVerdict) -> None:
        if verdict.name not in self.declared:
            raise ValueError(f"Check '{verdict.name}' was not declared for suite {self.suite}")
        if any(v.name == verdict.name for v in self.verdicts):
            raise ValueError(f"Check '{verdict.name}' already has a verdict")
        self.verdicts.append(verdict)

    @property
    def complete(self) -> bool:
        """Every declared check has exactly one verdict."""
        return sorted(v.name for v in self.verdicts) == sorted(self.declared)

    @property
    def missing(self) -> List[str]:
        decided = {v.name for v in self.verdicts}
        return [name for name in self.declared if name not in decided]

    @property
    def passed(self) -> bool:
        """All non-skipped checks passed and none went undecided."""
        return self.complete and all(v.status is not VerdictStatus.FAIL for v in self.verdicts)

    def counts(self) -> Dict[str, int]:
        return {
            status.value: sum(1 for v in self.verdicts if v.status is status)
            for status in VerdictStatus
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "config": self.config.to_dict(),
            "declared": list(self.declared),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "counts": self.counts(),
            "passed": self.passed,
            "instances": list(self.instances),
            "details": dict(self.details),
        }

    def format_table(self) -> str:
        """Box-drawn verdict table for the terminal."""
        table = TableFormatter(["Check", "Status", "Value", "Reason"],
                               align=["left", "center", "right", "left"])
        for verdict in self.verdicts:
            value = "" if verdict.value is None else f"{verdict.value:.4g}"
            table.add_row([verdict.name, verdict.status.value, value, verdict.reason or ""])
        return table.format()


@dataclass(frozen=True)
class Diagnostic:
    """One finding of a dry-run parameter check.

    Attributes:
        check: Screen that produced it (config, solver_floor, span, slope_count)
        level: "ok" or "warning"
        message: Human-readable finding
    """

    check: str
    level: str
    message: str

    @property
    def is_warning(self) -> bool:
        return self.level == "warning"
