"""Pattern vocabulary and the verdict record shared by the predictors and the oracle."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Pattern(str, Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    INC_THEN_DEC = "IncThenDec"
    DEC_THEN_INC = "DecThenInc"
    CONSTANT = "Constant"
    INCONCLUSIVE = "Inconclusive"
    OTHER = "Other"

    def __str__(self):
        return self.value

    @property
    def unimodal(self):
        return self in (Pattern.INC_THEN_DEC, Pattern.DEC_THEN_INC)

    @property
    def monotone(self):
        return self in (Pattern.INCREASING, Pattern.DECREASING)

    def flipped(self):
        return _FLIP.get(self, self)


_FLIP = {
    Pattern.INCREASING: Pattern.DECREASING,
    Pattern.DECREASING: Pattern.INCREASING,
    Pattern.INC_THEN_DEC: Pattern.DEC_THEN_INC,
    Pattern.DEC_THEN_INC: Pattern.INC_THEN_DEC,
}

# (first phase, second phase) of each unimodal pattern
PHASES = {
    Pattern.INC_THEN_DEC: (Pattern.INCREASING, Pattern.DECREASING),
    Pattern.DEC_THEN_INC: (Pattern.DECREASING, Pattern.INCREASING),
}


def jsonable(v):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if hasattr(v, "to_dict"):
        return jsonable(v.to_dict())
    return v


@dataclass
class MonotonicityVerdict:
    """Predicted shape of a ratio on ``domain``.

    ``turning_point`` is set exactly for the two unimodal patterns.
    ``provenance`` names the decision rule that fired, or ``"numeric-only"``.
    """

    pattern: Pattern
    provenance: str
    turning_point: float = None
    endpoint_diagnostics: list = field(default_factory=list)
    domain: tuple = (0.0, math.inf)
    notes: list = field(default_factory=list)
    shape: object = None

    def __post_init__(self):
        self.pattern = Pattern(self.pattern)
        if self.pattern.unimodal and self.turning_point is None:
            raise ValueError("a unimodal verdict needs a turning point")
        if not self.pattern.unimodal and self.turning_point is not None:
            raise ValueError("only unimodal verdicts carry a turning point")
        if not self.provenance:
            raise ValueError("provenance must be named")

    def to_dict(self):
        return jsonable({
            "pattern": self.pattern,
            "turning_point": self.turning_point,
            "provenance": self.provenance,
            "domain": list(self.domain),
            "endpoint_diagnostics": [e.to_dict() for e in self.endpoint_diagnostics],
            "shape": self.shape.to_dict() if self.shape is not None else None,
            "notes": list(self.notes),
        })

    def restricted(self, lo, hi):
        """The verdict's pattern on the subinterval ``[lo, hi]``."""
        if not self.pattern.unimodal:
            return self.pattern
        first, second = PHASES[self.pattern]
        if self.turning_point <= lo:
            return second
        if self.turning_point >= hi:
            return first
        return self.pattern
