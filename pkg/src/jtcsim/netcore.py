"""4x4 complex chain matrices relating the state of a two-rail line at two
cross-sections.

Block layout of every chain matrix (input state = N @ output state)::

    [[A (V/V), B (ohm)],
     [C (S),   D (A/A)]]

The state vector is ``(u1, u2, i1, i2)``: rail-to-ground voltages and rail
currents, with currents positive in the signal direction (input to output).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import SingularMatrix

RCOND_MIN = 1e-14


def _frozen(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ESTN:
    """Chain matrix of an equivalent six-terminal network."""

    m: np.ndarray

    def __post_init__(self):
        a = _frozen(self.m)
        if a.shape != (4, 4):
            raise ValueError(f"chain matrix must be 4x4, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("chain matrix has non-finite entries")
        object.__setattr__(self, "m", a)

    @classmethod
    def identity(cls) -> "ESTN":
        return cls(np.eye(4))

    def __matmul__(self, other: "ESTN") -> "ESTN":
        return compose(self, other)

    def __repr__(self):
        return f"ESTN({np.array2string(self.m, precision=4)})"


@dataclass(frozen=True)
class PortState:
    u1: complex
    u2: complex
    i1: complex
    i2: complex

    def __post_init__(self):
        for name in ("u1", "u2", "i1", "i2"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"port state {name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, v) -> "PortState":
        v = np.asarray(v, dtype=np.complex128).reshape(4)
        return cls(*v)

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.i1, self.i2], dtype=np.complex128)

    @property
    def differential_voltage(self) -> complex:
        return self.u1 - self.u2

    @property
    def loop_current(self) -> complex:
        return (self.i1 - self.i2) / 2


def compose(a: ESTN, b: ESTN) -> ESTN:
    """Cascade ``a`` followed by ``b`` (signal passes through ``a`` first)."""
    return ESTN(a.m @ b.m)


def rcond_estimate(m: np.ndarray) -> float:
    """LAPACK 1-norm reciprocal condition estimate of a square complex matrix."""
    m = np.asarray(m, dtype=np.complex128)
    anorm = np.abs(m).sum(axis=0).max()
    if anorm == 0.0:
        return 0.0
    lu, _piv, info = lapack.zgetrf(m)
    if info > 0:
        return 0.0
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    return float(rcond)


def invert(n: ESTN) -> tuple[ESTN, float]:
    """Inverse chain matrix and the reciprocal condition number of ``n``.

    Raises SingularMatrix when the estimate falls below 1e-14.
    """
    m = n.m
    rcond = rcond_estimate(m)
    if rcond < RCOND_MIN:
        raise SingularMatrix(rcond)
    lu, piv = lapack.zgetrf(m)[:2]
    inv, info = lapack.zgetri(lu, piv)
    if info != 0:
        raise SingularMatrix(rcond)
    return ESTN(inv), rcond


def apply(n: ESTN, s: PortState) -> PortState:
    return PortState.from_array(n.m @ s.as_array())


def shunt_matrix(y: complex) -> np.ndarray:
    """Raw chain matrix of an admittance ``y`` connected between the rails."""
    m = np.eye(4, dtype=np.complex128)
    m[2, 0] = m[3, 1] = y
    m[2, 1] = m[3, 0] = -y
    return m
