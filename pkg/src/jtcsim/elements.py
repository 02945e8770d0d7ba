"""Lumped equipment connected between the two rails."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import NonPositive, ParameterError, WrongKind, ZeroImpedance
from .netcore import ESTN, shunt_matrix

# Stand-in impedance for an open circuit; far above any impedance in a JTC.
OPEN_CIRCUIT_OHM = 1e12


class ShuntKind(enum.Enum):
    CAPACITOR = "capacitor"
    SVA = "sva"
    TUNING = "tuning"
    WHEELSET = "wheelset"


class CapacitorFault(enum.Enum):
    LINE_BREAKAGE = "break"
    DEGRADED_HALF = "half"


@dataclass(frozen=True)
class ShuntElement:
    kind: ShuntKind
    z: complex
    position: Optional[float] = None  # m from the receiving end of the main track

    def __post_init__(self):
        z = complex(self.z)
        if not np.isfinite(z) or z == 0:
            raise ZeroImpedance(f"shunt impedance must be finite and nonzero, got {z}")
        if self.kind is ShuntKind.CAPACITOR and not (z.real == 0 and z.imag < 0):
            raise ParameterError(f"capacitor impedance must be purely capacitive, got {z}")
        object.__setattr__(self, "z", z)

    @classmethod
    def capacitor(cls, c: float, f: float, position: float) -> "ShuntElement":
        return cls(ShuntKind.CAPACITOR, capacitor_impedance(c, f), position)

    @property
    def is_open(self) -> bool:
        return abs(self.z) >= OPEN_CIRCUIT_OHM


def shunt_estn(z: complex) -> ESTN:
    if z == 0:
        raise ZeroImpedance("a dead short between the rails is not representable")
    return ESTN(shunt_matrix(1 / complex(z)))


def capacitor_impedance(c: float, f: float) -> complex:
    if not c > 0 or not f > 0:
        raise NonPositive(f"capacitance and frequency must be positive (c={c}, f={f})")
    return 1 / (2j * np.pi * f * c)


def capacitor_fault(elem: ShuntElement, fault: CapacitorFault) -> ShuntElement:
    if elem.kind is not ShuntKind.CAPACITOR:
        raise WrongKind(f"fault applies to capacitors only, got {elem.kind.value}")
    fault = CapacitorFault(fault)
    if fault is CapacitorFault.LINE_BREAKAGE:
        return replace(elem, z=-1j * OPEN_CIRCUIT_OHM)
    if elem.is_open:
        return elem
    # half the capacitance doubles the reactance
    return replace(elem, z=elem.z * 2)
