"""Explicit kappa-dependent constants for the order-of-magnitude brackets.

The asymptotic statements only assert that some constants c(kappa), c'(kappa)
exist. These are concrete, conservative choices derived from the Lipschitz
bound c = ln((1 - kappa)/kappa) of the potential:

- a single exit-time estimate gives lambda >= kappa / (4 N^2) exp(-depth); the
  lower bracket halves it again and charges one Lipschitz step;
- the Rayleigh quotient of the equilibrium potential gives
  lambda <= 2 exp(c) exp(-depth); the upper bracket adds one more unit.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict


@dataclass(frozen=True)
class KappaConstants:
    """Bracket constants for one ellipticity margin.

    Attributes:
        kappa: Ellipticity margin
        lipschitz: c = |ln(kappa/(1 - kappa))|
        bracket_lower: c_low in c_low N^-2 exp(-sqrt(N) d) <= lambda
        bracket_upper: c_up in lambda <= c_up exp(-sqrt(N) d)
    """

    kappa: float
    lipschitz: float
    bracket_lower: float
    bracket_upper: float

    @classmethod
    def for_kappa(cls, kappa: float) -> "KappaConstants":
        if not 0.0 < kappa < 0.5:
            raise ValueError(f"kappa must lie in (0, 1/2), got {kappa}")
        c = abs(math.log(kappa / (1.0 - kappa)))
        return cls(
            kappa=kappa,
            lipschitz=c,
            bracket_lower=kappa * math.exp(-c) / 8.0,
            bracket_upper=2.0 * (1.0 + math.exp(c)),
        )

    @property
    def splitting(self) -> float:
        """Constant in lambda_k / lambda_{k+1} <= C N^2 exp(-delta sqrt(N))."""
        return self.bracket_upper / self.bracket_lower

    def lower(self, N: int, scaled_depth: float) -> float:
        return self.bracket_lower * N ** -2 * math.exp(-math.sqrt(N) * scaled_depth)

    def upper(self, N: int, scaled_depth: float) -> float:
        return self.bracket_upper * math.exp(-math.sqrt(N) * scaled_depth)

    def splitting_bound(self, N: int, delta: float) -> float:
        return self.splitting * N ** 2 * math.exp(-delta * math.sqrt(N))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["splitting"] = self.splitting
        return data
