"""Environment, potential and path files

Environment files start with a `kappa=<real>` header followed by one
`x,omega` line per site; potential files hold `x,V` lines and path files
`t,value` lines. Values are written with repr precision so that reading a
written file gives back identical floats. Blank lines and `#` comments are
ignored when reading.
"""

import json
from pathlib import Path as FilePath
from typing import Iterator, List, Tuple

import numpy as np

from sinaispectra.domain.environment import Environment, Potential
from sinaispectra.domain.exceptions import FileFormatError, SinaiSpectraError
from sinaispectra.domain.extrema import GoodPathCertificate
from sinaispectra.domain.path import Path


def write_environment(env: Environment, path: FilePath) -> None:
    """Write an environment file

    Args:
        env: Environment to write
        path: Destination file
    """
    lines = [f"kappa={env.kappa!r}"]
    lines += [f"{x},{float(w)!r}" for x, w in zip(env.sites, env.omega)]
    path.write_text("\n".join(lines) + "\n")


def read_environment(path: FilePath) -> Environment:
    """Read an environment file

    Args:
        path: File written by write_environment

    Returns:
        Environment on the consecutive sites listed in the file

    Raises:
        FileFormatError: If the header, a row or the site sequence is malformed
    """
    lines = list(_content_lines(path))
    if not lines:
        raise FileFormatError(f"{path}: empty environment file")
    number, header = lines[0]
    key, sep, value = header.partition("=")
    if key.strip() != "kappa" or not sep:
        raise FileFormatError(f"{path}:{number}: expected 'kappa=<real>' header, got '{header}'")
    kappa = _real(value, path, number)
    sites, omega = _columns(path, lines[1:])
    try:
        return Environment(x_lo=sites[0], omega=omega, kappa=kappa)
    except SinaiSpectraError as e:
        raise FileFormatError(f"{path}: {e}")


def write_potential(potential: Potential, path: FilePath) -> None:
    lines = [f"{x},{float(v)!r}" for x, v in zip(potential.sites, potential.values)]
    path.write_text("\n".join(lines) + "\n")


def read_potential(path: FilePath) -> Potential:
    """Read a potential file

    Raises:
        FileFormatError: If a row or the site sequence is malformed
    """
    sites, values = _columns(path, list(_content_lines(path)))
    try:
        return Potential(x_lo=sites[0], values=values)
    except (SinaiSpectraError, ValueError) as e:
        raise FileFormatError(f"{path}: {e}")


def write_path(path_data: Path, path: FilePath) -> None:
    lines = [
        f"{float(t)!r},{float(v)!r}"
        for t, v in zip(path_data.abscissae, path_data.ordinates)
    ]
    path.write_text("\n".join(lines) + "\n")


def read_path(path: FilePath) -> Path:
    """Read a path file

    Raises:
        FileFormatError: If a row is malformed or abscissae do not increase
    """
    points = []
    for number, line in _content_lines(path):
        parts = line.split(",")
        if len(parts) != 2:
            raise FileFormatError(f"{path}:{number}: expected 't,value', got '{line}'")
        points.append((_real(parts[0], path, number), _real(parts[1], path, number)))
    try:
        return Path.from_points(points)
    except ValueError as e:
        raise FileFormatError(f"{path}: {e}")


def write_certificate(certificate: GoodPathCertificate, path: FilePath) -> None:
    """Write a good-path certificate as JSON with sorted keys."""
    data = {
        key: value
        for key, value in certificate.to_dict().items()
        if key in ("h", "delta", "labeling", "depths", "saddles", "verdict", "margin")
    }
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# Private helpers

def _content_lines(path: FilePath) -> Iterator[Tuple[int, str]]:
    if not path.is_file():
        raise FileFormatError(f"File not found: {path}")
    for number, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def _real(text: str, path: FilePath, number: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FileFormatError(f"{path}:{number}: '{text.strip()}' is not a number")
    if not np.isfinite(value):
        raise FileFormatError(f"{path}:{number}: non-finite value '{text.strip()}'")
    return value


def _columns(path: FilePath, lines: List[Tuple[int, str]]) -> Tuple[List[int], np.ndarray]:
    """Parse `x,value` rows over consecutive integer sites."""
    if not lines:
        raise FileFormatError(f"{path}: no data rows")
    sites, values = [], []
    for number, line in lines:
        parts = line.split(",")
        if len(parts) != 2:
            raise FileFormatError(f"{path}:{number}: expected 'x,value', got '{line}'")
        try:
            site = int(parts[0])
        except ValueError:
            raise FileFormatError(f"{path}:{number}: site '{parts[0].strip()}' is not an integer")
        if sites and site != sites[-1] + 1:
            raise FileFormatError(f"{path}:{number}: site {site} does not follow {sites[-1]}")
        sites.append(site)
        values.append(_real(parts[1], path, number))
    return sites, np.array(values)
