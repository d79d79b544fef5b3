"""Report records shared by the norm-computing modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .config import ENUMERATION_ID


@dataclass
class IntegralResult:
    value: complex
    abs_error_estimate: float
    converged: bool
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be >= 0")


@dataclass
class NormReport:
    """A computed norm value with its truncation bookkeeping.

    tail_bound bounds the omitted part of an infinite sum (0 when the value
    is not a series); for sup-type norms it is heuristic and flagged.
    """

    value: float
    p: Optional[float] = None
    K: Optional[int] = None
    tail_bound: float = 0.0
    enumeration_id: str = ENUMERATION_ID
    tail_is_heuristic: bool = False
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < -1e-15:
            raise ValueError("norm value must be >= 0")
        self.value = max(self.value, 0.0)
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be >= 0")

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "p": self.p,
            "K": self.K,
            "tail_bound": self.tail_bound,
            "enumeration_id": self.enumeration_id,
        }
        if self.tail_is_heuristic:
            out["tail_is_heuristic"] = True
        out.update(self.extras)
        return out
