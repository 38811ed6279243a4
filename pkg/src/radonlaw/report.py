"""Serializable pass/fail reports shared by the checks."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


def _clean(v):
    """Make ``v`` JSON friendly: numpy scalars/arrays to Python, inf/nan to strings."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


@dataclass
class CheckReport:
    """Outcome of one check.

    ``margin`` is signed: nonnegative means the check holds with that much room
    (in the check's own units), negative is the size of the worst violation.
    """

    name: str
    passed: bool
    margin: float
    tolerance: float
    evidence: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.passed)

    def to_dict(self):
        return _clean(
            {
                "name": self.name,
                "pass": bool(self.passed),
                "margin": self.margin,
                "tolerance": self.tolerance,
                "evidence_series": self.evidence,
            }
        )

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def aggregate(reports, header=None):
    out = {"checks": [r.to_dict() for r in reports], "pass": all(r.passed for r in reports)}
    if header is not None:
        out["claim"] = header
    return out
