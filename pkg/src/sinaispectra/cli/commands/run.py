"""CLI command for running a verification suite.

Orchestrates Service Layer classes to run one suite and write its reports.
This command instantiates services and coordinates their operations but
does not implement numerical logic directly.
"""

from pathlib import Path

from sinaispectra.domain.config import ExperimentConfig
from sinaispectra.domain.exceptions import SinaiSpectraError
from sinaispectra.domain.models import VerdictStatus
from sinaispectra.infrastructure.console.output import ConsoleHelper
from sinaispectra.infrastructure.reports.writer import write_report
from sinaispectra.services.composite.suite_service import SuiteService


def cmd_run(console: ConsoleHelper, config: ExperimentConfig) -> int:
    """Orchestrate a suite run using Service Layer classes.

    Args:
        console: Console helper for outputs and annotations
        config: Validated experiment configuration

    Returns:
        Exit code (0 when every decided check passed, 1 otherwise)
    """
    try:
        print(f"=== sinai-spectra: {config.suite} ===")
        print(f"Law: {config.disorder_law.describe()}")
        print(f"Seeds: {len(config.seeds)}, jobs: {config.jobs}")

        report = SuiteService(config).run()
        paths = write_report(report, Path(config.output_dir))

        print(f"\n=== {config.suite} complete ===")
        print(report.format_table())
        counts = report.counts()
        print(
            f"\npass: {counts['pass']}, fail: {counts['fail']}, skip: {counts['skip']}"
            f" ({report.wall_clock_seconds:.1f}s)"
        )

        console.write_output("report", str(paths["json"]))
        console.write_output("instances", str(paths["csv"]))
        console.write_output("passed", "true" if report.passed else "false")

        if not report.passed:
            failed = [v.name for v in report.verdicts if v.status is VerdictStatus.FAIL]
            console.set_error(f"Failed checks: {', '.join(failed)}")
            return 1
        return 0

    except SinaiSpectraError as e:
        console.set_error(f"Suite {config.suite} stopped: {str(e)}")
        return 1
    except Exception as e:
        console.set_error(f"Unexpected error in suite {config.suite}: {str(e)}")
        import traceback
        traceback.print_exc()
        return 1
