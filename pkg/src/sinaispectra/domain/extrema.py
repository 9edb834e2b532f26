"""Value types for h-extrema, good-path certificates and RG transcripts"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple

Verdict = Literal["accepted", "rejected"]


@dataclass(frozen=True)
class ExtremaSet:
    """Representatives of the h-minima and h-maxima of a path.

    Attributes:
        h: Extremum height
        minima: Ordered abscissae of the h-minima representatives
        maxima: Ordered abscissae of the h-maxima representatives
        min_values: Path values at `minima`
        max_values: Path values at `maxima`
        left_boundary_max: First maximum qualifies only through the left-boundary clause
        right_boundary_max: Last maximum qualifies only through the right-boundary clause
    """

    h: float
    minima: Tuple[float, ...] = ()
    maxima: Tuple[float, ...] = ()
    min_values: Tuple[float, ...] = ()
    max_values: Tuple[float, ...] = ()
    left_boundary_max: bool = False
    right_boundary_max: bool = False

    @property
    def q(self) -> int:
        return len(self.minima)

    def interior_maxima(self) -> Tuple[float, ...]:
        """Maxima that are h-maxima of any extension of the path."""
        maxima = list(self.maxima)
        if self.right_boundary_max and maxima:
            maxima.pop()
        if self.left_boundary_max and maxima:
            maxima.pop(0)
        return tuple(maxima)

    def alternating(self) -> List[Tuple[float, float, str]]:
        """Merged (abscissa, value, kind) list in increasing abscissa."""
        merged = [(t, v, "max") for t, v in zip(self.maxima, self.max_values)]
        merged += [(t, v, "min") for t, v in zip(self.minima, self.min_values)]
        return sorted(merged)

    def is_alternating(self) -> bool:
        kinds = [kind for _, _, kind in self.alternating()]
        if not kinds:
            return True
        if any(a == b for a, b in zip(kinds, kinds[1:])):
            return False
        if self.minima:
            return kinds[0] == "max" and kinds[-1] == "max"
        return len(kinds) <= 1


@dataclass(frozen=True)
class GoodPathCertificate:
    """Greedy metastable labeling of the h-minima and its acceptance verdict.

    The labeling is filled in even when the verdict is a rejection, so that
    callers can inspect why a path failed.
    """

    h: float
    delta: float
    labeling: Tuple[float, ...]
    depths: Tuple[float, ...]
    saddles: Tuple[float, ...]
    saddle_values: Tuple[float, ...]
    verdict: Verdict
    reason: Optional[str] = None
    margin: Optional[float] = None

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    @property
    def q(self) -> int:
        return len(self.labeling)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["labeling"] = list(self.labeling)
        data["depths"] = list(self.depths)
        data["saddles"] = list(self.saddles)
        data["saddle_values"] = list(self.saddle_values)
        return data


@dataclass(frozen=True)
class RgStage:
    """One decimation: the removed bond, the decimated minimum y and its variation T."""

    bond: Tuple[float, float]
    y: float
    T: float
    surviving: Tuple[float, ...]


@dataclass(frozen=True)
class RgTranscript:
    h: float
    stages: Tuple[RgStage, ...] = ()

    @property
    def q(self) -> int:
        return len(self.stages)

    @property
    def decimated_minima(self) -> Tuple[float, ...]:
        return tuple(stage.y for stage in self.stages)

    @property
    def variations(self) -> Tuple[float, ...]:
        return tuple(stage.T for stage in self.stages)


@dataclass(frozen=True)
class RgEquivalenceReport:
    """Comparison of the greedy labeling with the RG decimation order."""

    q: int
    equivalent: bool
    mismatches: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        return {"q": self.q, "equivalent": self.equivalent, "mismatches": list(self.mismatches)}
