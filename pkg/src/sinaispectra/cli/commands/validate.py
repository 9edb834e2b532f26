"""CLI command for dry-run parameter checks.

Orchestrates the suite service's screens without running a suite. Findings
are diagnostics only: warnings never change the exit code.
"""

from sinaispectra.domain.config import ExperimentConfig
from sinaispectra.infrastructure.console.output import ConsoleHelper
from sinaispectra.services.composite.suite_service import SuiteService


def cmd_validate(console: ConsoleHelper, config: ExperimentConfig) -> int:
    """Print solver-floor, span and slope-count screens for a validated config.

    Args:
        console: Console helper for outputs and annotations
        config: Validated experiment configuration

    Returns:
        Exit code (always 0; configuration errors are reported by the caller)
    """
    print(f"=== sinai-spectra: validate {config.suite} ===")
    findings = SuiteService(config).diagnostics()
    for finding in findings:
        if finding.is_warning:
            console.set_warning(f"{finding.check}: {finding.message}")
        else:
            print(finding.message)
    warnings = sum(1 for f in findings if f.is_warning)
    console.write_output("warnings", str(warnings))
    return 0
