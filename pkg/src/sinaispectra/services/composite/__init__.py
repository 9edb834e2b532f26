"""Composite services: suite orchestration"""

from sinaispectra.services.composite.suite_service import SuiteService

__all__ = ["SuiteService"]
