"""Value types for Dirichlet spectra and the metastability reports built on them"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np

from sinaispectra.domain.extrema import GoodPathCertificate

ReportStatus = Literal["ok", "unresolvable"]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Full eigendecomposition of L(D) in L2(mu).

    Attributes:
        sites: Sites of D in increasing order
        eigenvalues: Ascending eigenvalues
        eigenvectors: Columns psi_j, mu-orthonormal, signed by anchor or largest component
        residuals: ||(L - lambda_j) psi_j||_mu for each pair
        log_mu: log mu on `sites`
    """

    sites: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    log_mu: np.ndarray

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    def vector(self, index: int) -> np.ndarray:
        """psi_{index + 1} as a function on `sites`."""
        return self.eigenvectors[:, index]

    def symmetric_vector(self, index: int) -> np.ndarray:
        """mu^(1/2) psi, the Euclidean-normalized eigenvector of H."""
        return np.exp(0.5 * self.log_mu) * self.eigenvectors[:, index]


@dataclass(frozen=True)
class CountResult:
    """Number of eigenvalues strictly below lam.

    `on_boundary` is set when an eigenvalue lies within the boundary
    tolerance of lam, so that the count may be off by one.
    """

    lam: float
    count: int
    on_boundary: bool = False


@dataclass(frozen=True, eq=False)
class PrincipalPair:
    """Smallest Dirichlet eigenvalue and its positive, mu-normalized eigenvector."""

    lam: float
    sites: np.ndarray
    vector: np.ndarray


@dataclass(frozen=True)
class StructuralReport:
    """Oscillation, parity and nesting checks on one spectrum.

    Attributes:
        interval: Whether the domain was an interval (oscillation and parity apply)
        sign_changes: Sign changes of each eigenvector, in eigenvalue order
        parity_residual: max |lambda_i + lambda_{n+1-i} - 2|
        pairing_residual: max over i of 1 - |<S v_i, v_{n+1-i}>| with S = diag((-1)^x)
        notices: Checks skipped, with the reason
    """

    interval: bool
    sign_changes: Tuple[int, ...] = ()
    parity_residual: Optional[float] = None
    pairing_residual: Optional[float] = None
    notices: Tuple[str, ...] = ()

    @property
    def oscillation_ok(self) -> bool:
        return all(count == index for index, count in enumerate(self.sign_changes))

    def parity_ok(self, tolerance: float = 1e-10) -> bool:
        return self.parity_residual is None or self.parity_residual <= tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["sign_changes"] = list(self.sign_changes)
        data["notices"] = list(self.notices)
        data["oscillation_ok"] = self.oscillation_ok
        data["parity_ok"] = self.parity_ok()
        return data


@dataclass(frozen=True)
class MetastabilityReport:
    """Exact small eigenvalues of L(I_N) against their capacity predictions.

    List fields are indexed by k - 1 for the labeled minima x_1..x_q.
    `lambda_bar` holds the nested principal eigenvalues lambda-bar_0..lambda-bar_q,
    the last of which is the threshold lambda*.
    """

    N: int
    h: float
    delta: float
    certificate: GoodPathCertificate
    minima_sites: Tuple[int, ...]
    lambda_exact: Tuple[float, ...]
    lambda_pred: Tuple[float, ...]
    rel_err: Tuple[float, ...]
    vec_dist: Tuple[float, ...]
    lambda_bar: Tuple[float, ...]
    lambda_star: float
    count_below_star: int
    next_eigenvalue: float
    bracket_lower: Tuple[float, ...]
    bracket_upper: Tuple[float, ...]
    brackets_ok: bool
    splitting_ratios: Tuple[float, ...]
    splitting_bound: float
    splitting_ok: bool
    nested_brackets_ok: bool
    rate_gaps: Tuple[float, ...]
    rate_gaps_ok: bool
    rate_eigenfunction_distance: Tuple[float, ...]
    inflation: Tuple[float, ...]
    correction_bound: float
    residuals: Tuple[float, ...]
    constants: Dict[str, float] = field(default_factory=dict)
    status: ReportStatus = "ok"

    @property
    def q(self) -> int:
        return len(self.minima_sites)

    @property
    def resolvable(self) -> bool:
        return self.status == "ok"

    @property
    def counting_ok(self) -> bool:
        return self.count_below_star == self.q

    def max_rel_err(self) -> float:
        return max(self.rel_err) if self.rel_err else 0.0

    def max_vec_dist(self) -> float:
        return max(self.vec_dist) if self.vec_dist else 0.0

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for key, value in asdict(self).items():
            data[key] = list(value) if isinstance(value, tuple) else value
        data["certificate"] = self.certificate.to_dict()
        data["q"] = self.q
        data["counting_ok"] = self.counting_ok
        return data


@dataclass(frozen=True, eq=False)
class CapacityMatrix:
    """Normalized capacity matrix E^_k(lambda) = K - lambda (I + A) - lambda B.

    Rows and columns follow the labeled minima in increasing site order.
    """

    k: int
    lam: float
    sites: Tuple[int, ...]
    K: np.ndarray
    A: np.ndarray
    B: np.ndarray
    checks: Dict[str, Any] = field(default_factory=dict)

    @property
    def matrix(self) -> np.ndarray:
        return self.K - self.lam * (np.eye(self.k) + self.A) - self.lam * self.B

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def K_tridiagonal(self) -> bool:
        far = np.abs(np.subtract.outer(np.arange(self.k), np.arange(self.k))) > 1
        return bool(np.all(self.K[far] == 0.0))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "lambda": self.lam,
            "sites": list(self.sites),
            "K": self.K.tolist(),
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "determinant": self.determinant,
            "K_tridiagonal": self.K_tridiagonal,
            "checks": dict(self.checks),
        }


@dataclass(frozen=True)
class RootLocation:
    """Zeros of det E^_k below lambda-bar_k compared with the exact eigenvalues."""

    k: int
    roots: Tuple[float, ...]
    eigenvalues: Tuple[float, ...]
    rel_errors: Tuple[float, ...]
    scan_upper: float
    flagged: bool = False
    reason: Optional[str] = None

    @property
    def matched(self) -> bool:
        return not self.flagged and len(self.roots) == self.k

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key in ("roots", "eigenvalues", "rel_errors"):
            data[key] = list(data[key])
        data["matched"] = self.matched
        return data


def as_floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class NestingCheck:
    """Principal eigenvalues of a domain D and of D with `removed` sites punched out.

    Attributes:
        outer: Principal eigenvalue of L(D)
        inner: Principal eigenvalue of L(D minus removed)
        removed: Number of removed sites
        count: Eigenvalues of L(D) in [0, inner]
    """

    outer: float
    inner: float
    removed: int
    count: int

    @property
    def monotone(self) -> bool:
        return self.inner > self.outer

    @property
    def interlacing(self) -> bool:
        return self.count <= self.removed

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["monotone"] = self.monotone
        data["interlacing"] = self.interlacing
        return data
