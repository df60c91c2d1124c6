"""Allocations and solver outcomes shared by all schemes."""

from dataclasses import dataclass
from typing import Optional, Tuple

from .fbl import ErrorProb


@dataclass(frozen=True)
class OmaAllocation:
    m1: int
    m2: int
    p1: float
    p2: float

    def energy(self):
        return self.m1 * self.p1 + self.m2 * self.p2


@dataclass(frozen=True)
class NomaAllocation:
    p1: float
    p2: float
    m: int

    def energy(self):
        return self.m * (self.p1 + self.p2)


@dataclass(frozen=True)
class RelayAllocation:
    m1: int
    m2: int
    ps: float
    pr: float

    def energy(self):
        return self.m1 * self.ps + self.m2 * self.pr


@dataclass(frozen=True)
class CnomaAllocation:
    m1: int
    m2: int
    p1: float
    p2: float
    pr: float

    def energy(self):
        return self.m1 * (self.p1 + self.p2) + self.m2 * self.pr


@dataclass(frozen=True)
class MultiAllocation:
    """Per-device blocklengths and powers; the last entry is the target device."""

    m: Tuple[int, ...]
    p: Tuple[float, ...]

    def energy(self):
        return sum(mk * pk for mk, pk in zip(self.m, self.p))


@dataclass(frozen=True)
class SchemeOutcome:
    scheme: str
    feasible: bool
    allocation: Optional[object] = None
    eps_target: ErrorProb = ErrorProb.one()
    eps_robot: Optional[ErrorProb] = None
    # False when a convexity condition the method relies on was violated
    certified: bool = True

    @classmethod
    def infeasible(cls, scheme):
        return cls(scheme, False)
