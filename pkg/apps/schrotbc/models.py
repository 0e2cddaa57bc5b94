# apps/schrotbc/models.py
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum, auto

import numpy as np

from apps.schrotbc.errors import ConfigError, ContractViolation


class Method(Enum):
    BDF1 = auto()
    TR = auto()


class Family(Enum):
    CQ = auto()
    NP = auto()
    CP = auto()
    HF = auto()


class Wall(Enum):
    LEFT = 0
    RIGHT = 1


class Direction(Enum):
    ANALYSIS = auto()
    SYNTHESIS = auto()


class Stagger(Enum):
    WHOLE_STEP = auto()
    STAGGERED = auto()


class ProfileFamily(Enum):
    FCG = auto()
    FHG = auto()


def parse_enum(cls, value):
    """Accept an enum member or its (case-insensitive) name."""
    if isinstance(value, cls):
        return value
    if isinstance(value, str):
        try:
            return cls[value.strip().upper()]
        except KeyError:
            pass
    raise ValueError(f"{value!r} is not a valid {cls.__name__} "
                     f"(expected one of {[m.name for m in cls]})")


@dataclass(slots=True, frozen=True)
class SchemeSpec:
    family: Family
    method: Method
    pade_order: int = 0

    def __post_init__(self):
        if self.family in (Family.NP, Family.CP) and self.pade_order < 1:
            raise ValueError(f"{self.family.name} needs a Padé order >= 1")

    @property
    def label(self) -> str:
        order = str(self.pade_order) if self.family in (Family.NP, Family.CP) else ""
        return f"{self.family.name}{order}-{self.method.name}"

    @classmethod
    def parse(cls, name: str, method: Method | str, pade_order: int | None = None) -> "SchemeSpec":
        """'NP50', 'CP20', 'CQ', 'HF' or a bare 'NP' plus an explicit order."""
        method = parse_enum(Method, method)
        name = name.strip().upper()
        family = parse_enum(Family, name[:2])
        digits = name[2:]
        if digits and not digits.isdigit():
            raise ValueError(f"unknown scheme {name!r}")
        if family in (Family.CQ, Family.HF):
            if digits:
                raise ValueError(f"{family.name} takes no Padé order")
            return cls(family, method, 0)
        if digits and pade_order is not None and pade_order != int(digits):
            raise ConfigError(f"scheme {name!r} conflicts with Padé order {pade_order}",
                              {"scheme": name, "pade_order": pade_order})
        order = pade_order or (int(digits) if digits else 50)
        return cls(family, method, order)


@dataclass(slots=True)
class RobinData:
    """
    Robin data for one step: left wall (∂ − κ)u = α₁·history[0],
    right wall (∂ + κ)u = −α₁·history[1], one entry per transverse mode.
    """
    kappa: np.ndarray
    history: np.ndarray
    stagger: Stagger

    def __post_init__(self):
        if self.history.ndim != 2 or self.history.shape[0] != 2:
            raise ContractViolation(f"history must be (2, nmodes), got {self.history.shape}")
        if self.kappa.shape != self.history.shape[1:]:
            raise ContractViolation(f"kappa shape {self.kappa.shape} != modes {self.history.shape[1:]}")
        if not np.all(np.isfinite(self.kappa)) or np.any(self.kappa == 0):
            raise ContractViolation("kappa must be finite and nonzero")

    @property
    def nmodes(self) -> int:
        return self.history.shape[1]

    def at(self, wall: Wall) -> np.ndarray:
        return self.history[wall.value]


@dataclass(slots=True, frozen=True)
class DomainSpec:
    """
    Ω_i = (x_l, x_r) × [−d, d) (× [−d₃, d₃)), mapped onto (−1, 1) × [−π, π)^{dim−1}
    by x₁ = J₁y₁ + x̄₁, x_p = J_p y_p.
    """
    x_l: float
    x_r: float
    d: tuple[float, ...]
    beta: int = 1

    def __post_init__(self):
        if not self.x_l < self.x_r:
            raise ContractViolation(f"need x_l < x_r, got ({self.x_l}, {self.x_r})")
        if len(self.d) not in (1, 2) or any(h <= 0 for h in self.d):
            raise ContractViolation(f"need one or two positive half-widths, got {self.d}")
        if self.beta not in (1, -1):
            raise ContractViolation(f"beta must be +1 or -1, got {self.beta}")

    @property
    def dim(self) -> int:
        return 1 + len(self.d)

    @property
    def J1(self) -> float:
        return 0.5 * (self.x_r - self.x_l)

    @property
    def center(self) -> float:
        return 0.5 * (self.x_l + self.x_r)

    @property
    def J_perp(self) -> tuple[float, ...]:
        return tuple(h / np.pi for h in self.d)

    @property
    def beta1(self) -> float:
        return self.J1 ** -2

    @property
    def beta_perp(self) -> tuple[float, ...]:
        return tuple(self.beta * J ** -2 for J in self.J_perp)

    @property
    def jacobian(self) -> float:
        return self.J1 * float(np.prod(self.J_perp))

    def to_physical(self, ref_points: list[np.ndarray]) -> list[np.ndarray]:
        y1, *perp = ref_points
        return [self.J1 * y1 + self.center, *[J * y for J, y in zip(self.J_perp, perp)]]


@dataclass(slots=True, frozen=True)
class TimeGrid:
    tmax: float
    nt: int
    method: Method

    def __post_init__(self):
        if self.tmax <= 0 or self.nt < 1:
            raise ContractViolation(f"need tmax > 0 and nt >= 1, got ({self.tmax}, {self.nt})")

    @property
    def dt(self) -> float:
        # nt == 1 is a zero-step run; dt only feeds constants there
        return self.tmax / (self.nt - 1) if self.nt > 1 else self.tmax

    @property
    def rho(self) -> float:
        return (1.0 if self.method is Method.BDF1 else 2.0) / self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.nt) * self.dt
