"""Tests for the validate command"""

from unittest.mock import MagicMock

import pytest

from sinaispectra.__main__ import main
from sinaispectra.cli.commands.validate import cmd_validate
from sinaispectra.infrastructure.console.output import ConsoleHelper
from tests.builders import ConfigBuilder


class TestCmdValidate:
    """Test validate command handler"""

    def test_clean_configuration(self, capsys):
        """Should print ok and report zero warnings"""
        # Arrange
        console = MagicMock(spec=ConsoleHelper)

        # Act
        exit_code = cmd_validate(console, ConfigBuilder().build())

        # Assert
        assert exit_code == 0
        console.write_output.assert_called_once_with("warnings", "0")
        console.set_warning.assert_not_called()
        assert "ok" in capsys.readouterr().out

    def test_warnings_keep_exit_code_zero(self):
        """Should annotate each warning without failing"""
        # Arrange
        console = MagicMock(spec=ConsoleHelper)
        config = ConfigBuilder().with_field("N", (4096,)).build()

        # Act
        exit_code = cmd_validate(console, config)

        # Assert
        assert exit_code == 0
        console.write_output.assert_called_once_with("warnings", "1")
        assert console.set_warning.call_args.args[0].startswith("solver_floor:")


class TestMainValidate:
    """Test the validate subcommand through main"""

    def test_config_file(self, tmp_path, capsys):
        """Should read the suite and parameters from a config file"""
        # Arrange
        config_file = tmp_path / "run.yml"
        config_file.write_text("suite: np-stats\nh: 1.0\nspan: 1.0\npaths: 4\nseeds: 2\n")

        # Act
        exit_code = main(["validate", "--config", str(config_file)])

        # Assert
        assert exit_code == 0
        captured = capsys.readouterr()
        assert "warnings=2" in captured.out
        assert "::warning::span:" in captured.err

    def test_empty_seeds_returns_two(self, capsys):
        """Should reject an empty seed list before running any screen"""
        # Act
        exit_code = main(["validate", "thm1", "--seeds", ""])

        # Assert
        assert exit_code == 2
        assert "At least one seed" in capsys.readouterr().err

    def test_unknown_suite_is_an_argument_error(self):
        """Should let argparse reject an unknown suite"""
        with pytest.raises(SystemExit) as exc_info:
            main(["validate", "nope"])
        assert exc_info.value.code == 2
