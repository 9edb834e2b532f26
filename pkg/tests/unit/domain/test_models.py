"""Tests for check verdicts, suite reports and diagnostics"""

import pytest

from sinaispectra.domain.models import CheckVerdict, Diagnostic, SuiteReport, VerdictStatus
from tests.builders import ConfigBuilder


@pytest.fixture
def report():
    suite_report = SuiteReport(suite="structural", config=ConfigBuilder().build())
    suite_report.declare("parity", "oscillation")
    return suite_report


class TestCheckVerdict:
    """Tests for CheckVerdict"""

    def test_decide_passes_when_ok(self):
        """Should pass without a reason"""
        # Act
        verdict = CheckVerdict.decide("parity", True, reason="unused", value=1e-12)

        # Assert
        assert verdict.status is VerdictStatus.PASS
        assert verdict.reason is None
        assert verdict.value == 1e-12

    def test_decide_fails_with_reason(self):
        """Should fail carrying the reason"""
        # Act
        verdict = CheckVerdict.decide("parity", False, reason="residual 1e-3")

        # Assert
        assert verdict.status is VerdictStatus.FAIL
        assert verdict.reason == "residual 1e-3"

    def test_skip_needs_reason(self):
        """Should refuse a skipped verdict without a reason"""
        with pytest.raises(ValueError, match="needs a reason"):
            CheckVerdict(name="parity", status=VerdictStatus.SKIP)

    def test_to_dict(self):
        """Should serialize the status as its string value"""
        assert CheckVerdict.skip("parity", "no interval").to_dict() == {
            "name": "parity", "status": "skip", "reason": "no interval", "value": None,
        }


class TestSuiteReport:
    """Tests for SuiteReport bookkeeping"""

    def test_passes_when_every_check_decided(self, report):
        """Should pass once every declared check passed or was skipped"""
        # Act
        report.add(CheckVerdict.decide("parity", True))
        report.add(CheckVerdict.skip("oscillation", "holes"))

        # Assert
        assert report.complete
        assert report.passed
        assert report.counts() == {"pass": 1, "fail": 0, "skip": 1}

    def test_missing_verdict_fails(self, report):
        """Should not pass while a declared check is undecided"""
        # Act
        report.add(CheckVerdict.decide("parity", True))

        # Assert
        assert not report.passed
        assert report.missing == ["oscillation"]

    def test_failure_fails_report(self, report):
        """Should fail when any check failed"""
        # Act
        report.add(CheckVerdict.decide("parity", False, reason="bad"))
        report.add(CheckVerdict.decide("oscillation", True))

        # Assert
        assert not report.passed

    def test_undeclared_check_raises(self, report):
        """Should refuse a verdict for an undeclared check"""
        with pytest.raises(ValueError, match="was not declared"):
            report.add(CheckVerdict.decide("spacing", True))

    def test_duplicate_verdict_raises(self, report):
        """Should refuse a second verdict for the same check"""
        report.add(CheckVerdict.decide("parity", True))
        with pytest.raises(ValueError, match="already has a verdict"):
            report.add(CheckVerdict.decide("parity", False, reason="again"))

    def test_to_dict_and_table(self, report):
        """Should serialize verdicts and render them as a table"""
        # Arrange
        report.add(CheckVerdict.decide("parity", True, value=2.5e-13))
        report.add(CheckVerdict.decide("oscillation", False, reason="2 sign changes"))

        # Act
        data = report.to_dict()
        table = report.format_table()

        # Assert
        assert data["suite"] == "structural"
        assert data["passed"] is False
        assert data["config"]["suite"] == "thm1"
        assert "parity" in table and "2.5e-13" in table
        assert "2 sign changes" in table


class TestDiagnostic:
    """Tests for Diagnostic"""

    def test_warning_level(self):
        """Should report warnings by level"""
        assert Diagnostic("span", "warning", "too short").is_warning
        assert not Diagnostic("config", "ok", "ok").is_warning
