"""Builder for creating test experiment configurations"""

from typing import Any, Dict

from sinaispectra.domain.config import ExperimentConfig


class ConfigBuilder:
    """Fluent interface for creating ExperimentConfig instances

    Defaults are small enough for a suite to finish in a few seconds.

    Example:
        config = ConfigBuilder()
            .for_suite("structural")
            .with_seeds(3)
            .build()
    """

    def __init__(self):
        """Initialize builder with small default values"""
        self._fields: Dict[str, Any] = {
            "suite": "thm1",
            "N": (16,),
            "n": (50.0,),
            "seeds": (0, 1),
            "trials": 200,
            "paths": 4,
            "span": 20.0,
        }

    def for_suite(self, suite: str) -> "ConfigBuilder":
        self._fields["suite"] = suite
        return self

    def with_seeds(self, count: int) -> "ConfigBuilder":
        """Use seeds 0 .. count - 1

        Returns:
            Self for method chaining
        """
        self._fields["seeds"] = tuple(range(count))
        return self

    def with_output_dir(self, path) -> "ConfigBuilder":
        self._fields["output_dir"] = str(path)
        return self

    def with_field(self, key: str, value: Any) -> "ConfigBuilder":
        """Set any ExperimentConfig field

        Args:
            key: Field name
            value: Field value, already in its parsed type

        Returns:
            Self for method chaining
        """
        self._fields[key] = value
        return self

    def build(self) -> ExperimentConfig:
        return ExperimentConfig(**self._fields)
