"""Experiment configuration loading and validation

Configuration comes from three layers, lowest precedence first: the defaults
below, a config file (plain key=value lines or a YAML mapping) and
command-line overrides. `SINAI_SPECTRA_JOBS` supplies the default worker
count when neither the file nor the command line sets one.
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from sinaispectra.domain.constants import (
    DEFAULT_MC_TRIALS,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SCREEN_BETA,
    DEFAULT_SCREEN_DELTA,
    DEFAULT_SCREEN_DELTA_PRIME,
    DEFAULT_WINDOW_CONSTANT,
    JOBS_ENV_VAR,
    SUITES,
)
from sinaispectra.domain.environment import DisorderLaw
from sinaispectra.domain.exceptions import ConfigurationError

# Keys accepted in config files besides the ExperimentConfig field names
KEY_ALIASES = {
    "out": "output_dir",
    "output": "output_dir",
    "delta_prime": "screen_delta_prime",
    "beta": "screen_beta",
    "c1": "window_constant",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one suite run.

    Attributes:
        suite: Suite name, one of SUITES
        law: Disorder law in "kind:parameter" form
        N: Lattice scales for the spectral suites
        n: Time scales for the walk suites
        seeds: Seeds, one instance per seed
        trials: Monte Carlo trials per estimate
        paths: Brownian paths per batch
        span: Half-width of the Brownian window (paths cover [-span, span])
        jobs: Worker count available to the suite
    """

    suite: str = "thm1"
    law: str = "symmetric_uniform:0.1"
    N: Tuple[int, ...] = (100,)
    n: Tuple[float, ...] = (1e4,)
    h: float = 0.3
    delta: float = 0.3
    sigma: float = 1.0
    seeds: Tuple[int, ...] = tuple(range(10))
    trials: int = DEFAULT_MC_TRIALS
    paths: int = 200
    span: float = 60.0
    jobs: int = 1
    output_dir: str = DEFAULT_OUTPUT_DIR
    screen_delta: float = DEFAULT_SCREEN_DELTA
    screen_delta_prime: float = DEFAULT_SCREEN_DELTA_PRIME
    screen_beta: float = DEFAULT_SCREEN_BETA
    window_constant: float = DEFAULT_WINDOW_CONSTANT

    @property
    def disorder_law(self) -> DisorderLaw:
        return DisorderLaw.from_spec(self.law)

    def validate(self) -> "ExperimentConfig":
        """Check ranges and return self.

        Raises:
            ConfigurationError: On an unknown suite or law, empty seeds or out-of-range values
        """
        if self.suite not in SUITES:
            raise ConfigurationError(
                f"Unknown suite '{self.suite}'. Available suites: {', '.join(SUITES)}"
            )
        DisorderLaw.from_spec(self.law)
        if not self.seeds:
            raise ConfigurationError("At least one seed is required")
        for name in ("h", "delta", "sigma", "span"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.N or any(value < 2 for value in self.N):
            raise ConfigurationError(f"N values must be at least 2, got {list(self.N)}")
        if not self.n or any(value <= 1 for value in self.n):
            raise ConfigurationError(f"n values must exceed 1, got {list(self.n)}")
        for name in ("trials", "paths", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 0 < self.screen_delta < 1 or self.screen_delta_prime <= 0 or self.screen_beta <= 0:
            raise ConfigurationError(
                "Screening thresholds must satisfy 0 < delta < 1, delta' > 0 and beta > 0"
            )
        return self

    def with_overrides(self, overrides: Mapping[str, Any]) -> "ExperimentConfig":
        """Copy with the non-None entries of `overrides` applied and parsed."""
        updates = _coerce({k: v for k, v in overrides.items() if v is not None}, "overrides")
        return replace(self, **updates)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("N", "n", "seeds"):
            data[key] = list(data[key])
        return data


def parse_seeds(value: Any) -> Tuple[int, ...]:
    """Seeds from "0-49", "1,5,9", a count such as 50, or a list.

    Raises:
        ConfigurationError: If the value cannot be read as seeds
    """
    if isinstance(value, (list, tuple)):
        try:
            return tuple(int(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"Invalid seed list: {value}")
    if isinstance(value, int):
        return tuple(range(value))
    text = str(value).strip()
    try:
        if "," in text:
            return tuple(int(part) for part in text.split(",") if part.strip())
        if "-" in text.lstrip("-"):
            first, last = text.split("-", 1)
            lo, hi = int(first), int(last)
            if hi < lo:
                raise ConfigurationError(f"Empty seed range '{text}'")
            return tuple(range(lo, hi + 1))
        return tuple(range(int(text))) if text else ()
    except ValueError:
        raise ConfigurationError(f"Invalid seeds '{text}'")


def load_config(file_path: str) -> ExperimentConfig:
    """Load a configuration file on top of the defaults

    Args:
        file_path: Path to a key=value file or a YAML file (.yml or .yaml)

    Returns:
        ExperimentConfig (not yet validated)

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    if not os.path.exists(file_path):
        raise ConfigurationError(f"Config file not found: {file_path}")
    with open(file_path, "r") as f:
        content = f.read()
    return load_config_from_string(
        content, file_path, yaml_format=file_path.endswith((".yml", ".yaml"))
    )


def load_config_from_string(
    content: str, source_name: str = "config", yaml_format: Optional[bool] = None
) -> ExperimentConfig:
    """Parse configuration content on top of the defaults

    Args:
        content: key=value lines or YAML mapping
        source_name: Name of the source (for error messages)
        yaml_format: Force YAML (True) or key=value (False); guessed when None

    Returns:
        ExperimentConfig (not yet validated)

    Raises:
        ConfigurationError: If content is malformed or names unknown keys
    """
    if yaml_format is None:
        yaml_format = _looks_like_yaml(content)
    if yaml_format:
        try:
            raw = yaml.safe_load(content) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {source_name}: {str(e)}")
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{source_name} must contain a mapping of keys to values")
    else:
        raw = _parse_key_values(content, source_name)
    return replace(ExperimentConfig(), **_coerce(raw, source_name))


def jobs_from_environment(default: int = 1) -> int:
    """Worker count from SINAI_SPECTRA_JOBS, or `default` when unset."""
    value = os.environ.get(JOBS_ENV_VAR, "").strip()
    if not value:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{JOBS_ENV_VAR} must be an integer, got '{value}'")


def _looks_like_yaml(content: str) -> bool:
    lines = [line.split("#", 1)[0].strip() for line in content.splitlines()]
    return any(line and "=" not in line for line in lines)


def _parse_key_values(content: str, source_name: str) -> Dict[str, str]:
    values = {}
    for number, line in enumerate(content.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"{source_name}:{number}: expected key=value, got '{line}'")
        values[key.strip()] = value.strip()
    return values


def _coerce(raw: Mapping[str, Any], source_name: str) -> Dict[str, Any]:
    """Map raw keys to ExperimentConfig fields and parse their values."""
    known = {f.name for f in fields(ExperimentConfig)}
    result: Dict[str, Any] = {}
    for key, value in raw.items():
        name = KEY_ALIASES.get(str(key).lower(), str(key))
        if name not in known:
            raise ConfigurationError(f"Unknown key '{key}' in {source_name}")
        try:
            result[name] = _parse_value(name, value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"Invalid value for '{key}' in {source_name}: {value!r}")
    return result


def _parse_value(name: str, value: Any) -> Any:
    if name == "seeds":
        return parse_seeds(value)
    if name == "N":
        return tuple(int(v) for v in _as_list(value))
    if name == "n":
        return tuple(float(v) for v in _as_list(value))
    if name in ("trials", "paths", "jobs"):
        return int(value)
    if name in ("suite", "law", "output_dir"):
        return str(value)
    return float(value)


def _as_list(value: Any) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [part for part in str(value).split(",") if part.strip()]
