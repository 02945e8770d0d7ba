"""Two-rail-plus-ground transmission line: parameters, modal solution and
chain matrices.

Lengths are in km throughout this module. Per-unit-length impedances are in
ohm/km and admittances in S/km, evaluated at the carrier frequency.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import DegenerateModes, NonPositiveBallast, ParameterError
from .netcore import ESTN

DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True)
class RailUnitParams:
    z11: complex
    z22: complex
    z12: complex
    g11: complex
    g22: complex
    g12: complex
    frequency: float

    def __post_init__(self):
        for name in ("z11", "z22", "z12", "g11", "g22", "g12"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ParameterError(f"{name} is not finite")
            object.__setattr__(self, name, v)
        if self.z11.real < 0 or self.z22.real < 0:
            raise ParameterError("rail self resistance must be non-negative")
        if min(self.g11.real, self.g22.real, self.g12.real) < 0:
            raise ParameterError("leakage conductances must be non-negative")
        if not self.frequency > 0:
            raise ParameterError("frequency must be positive")

    @classmethod
    def symmetric(cls, z_self, z_mutual, g_ground, g_between, frequency):
        return cls(z_self, z_self, z_mutual, g_ground, g_ground, g_between, frequency)

    @property
    def is_symmetric(self) -> bool:
        return self.z11 == self.z22 and self.g11 == self.g22

    @property
    def z_series(self) -> np.ndarray:
        """Series impedance matrix (ohm/km), positive convention."""
        return np.array([[self.z11, self.z12], [self.z12, self.z22]])

    @property
    def y_shunt(self) -> np.ndarray:
        """Nodal leakage admittance matrix (S/km), positive convention."""
        return np.array(
            [[self.g11 + self.g12, -self.g12], [-self.g12, self.g22 + self.g12]]
        )

    @property
    def loop_impedance(self) -> complex:
        """Differential (rail-to-rail) series impedance per km."""
        return self.z11 + self.z22 - 2 * self.z12

    def scaled_impedance(self, factor: float) -> "RailUnitParams":
        return replace(
            self, z11=self.z11 * factor, z22=self.z22 * factor, z12=self.z12 * factor
        )


@dataclass(frozen=True, eq=False)
class LineEigen:
    lambda1: complex
    lambda2: complex
    h: np.ndarray
    zt: np.ndarray

    @cached_property
    def modal(self):
        """(T, T^-1, sqrt(lambda)) such that N_t(l) = T K(l) T^-1.

        K(l) = [[D1, -D2], [-D2, D1]] with D1 = diag cosh(sqrt(lambda) l) and
        D2 = diag sinh(sqrt(lambda) l).
        """
        s = np.sqrt(np.array([self.lambda1, self.lambda2]))
        hinv = np.linalg.inv(self.h)
        zt_inv = np.linalg.inv(self.zt)
        t = np.zeros((4, 4), dtype=np.complex128)
        tinv = np.zeros((4, 4), dtype=np.complex128)
        t[:2, :2] = self.h
        t[2:, 2:] = zt_inv @ self.h @ np.diag(s)
        tinv[:2, :2] = hinv
        tinv[2:, 2:] = np.diag(1 / s) @ hinv @ self.zt
        return t, tinv, s


def impedance_matrix(p: RailUnitParams) -> np.ndarray:
    """z_t with the negated sign convention of the telegrapher system."""
    return -p.z_series


def admittance_matrix(p: RailUnitParams) -> np.ndarray:
    """g_t with the negated sign convention of the telegrapher system."""
    return -p.y_shunt


def line_eigen(p: RailUnitParams) -> LineEigen:
    zt = impedance_matrix(p)
    gt = admittance_matrix(p)
    lam, h = np.linalg.eig(zt @ gt)
    scale = max(abs(lam[0]), abs(lam[1]))
    if scale == 0 or abs(lam[0] - lam[1]) <= DEGENERACY_RTOL * scale:
        raise DegenerateModes(
            "propagation modes coincide (uncoupled symmetric line); "
            "add rail coupling or use the lumped oracle"
        )
    h = h / np.linalg.norm(h, axis=0)
    h.setflags(write=False)
    zt.setflags(write=False)
    return LineEigen(complex(lam[0]), complex(lam[1]), h, zt)


def modal_propagator(s: np.ndarray, l: float) -> np.ndarray:
    k = np.zeros((4, 4), dtype=np.complex128)
    c = np.cosh(s * l)
    sh = np.sinh(s * l)
    k[0, 0], k[1, 1], k[2, 2], k[3, 3] = c[0], c[1], c[0], c[1]
    k[0, 2], k[1, 3], k[2, 0], k[3, 1] = -sh[0], -sh[1], -sh[0], -sh[1]
    return k


def rail_estn(e: LineEigen, l: float) -> ESTN:
    """Chain matrix of a uniform rail line of length ``l`` km.

    Evaluated as the forward transfer at ``-l``, which is the exact inverse of
    the forward transfer matrix; see :func:`forward_transfer`.
    """
    if l < 0:
        raise ParameterError(f"line length must be non-negative, got {l}")
    t, tinv, s = e.modal
    return ESTN(t @ modal_propagator(s, l) @ tinv)


def forward_transfer(e: LineEigen, l: float) -> np.ndarray:
    """Matrix mapping the state at x=0 to the state at x=l (block D-form)."""
    s = np.array([e.lambda1, e.lambda2]) ** 0.5
    h, zt = e.h, e.zt
    hinv = np.linalg.inv(h)
    zt_inv = np.linalg.inv(zt)
    d1 = np.diag(np.cosh(s * l))
    d2 = np.diag(np.sinh(s * l))
    d3 = np.diag(s)
    d3inv = np.diag(1 / s)
    return np.block(
        [
            [h @ d1 @ hinv, h @ d2 @ d3inv @ hinv @ zt],
            [zt_inv @ h @ d3 @ d2 @ hinv, zt_inv @ h @ d3 @ d1 @ d3inv @ hinv @ zt],
        ]
    )


def pi_section(p: RailUnitParams, dx: float) -> np.ndarray:
    """Symmetric Pi section: half leakage, coupled series impedance, half leakage."""
    half = np.eye(4, dtype=np.complex128)
    half[2:, :2] = p.y_shunt * (dx / 2)
    series = np.eye(4, dtype=np.complex128)
    series[:2, 2:] = p.z_series * dx
    return half @ series @ half


def lumped_pi_oracle(p: RailUnitParams, l: float, n_seg: int) -> ESTN:
    """Chain of ``n_seg`` identical lumped Pi sections approximating length ``l``."""
    if n_seg < 1:
        raise ParameterError("n_seg must be >= 1")
    seg = pi_section(p, l / n_seg)
    return ESTN(np.linalg.matrix_power(seg, n_seg))


def ballast_to_params(
    r_b: float, base: RailUnitParams, ground_fraction: float = 0.1
) -> RailUnitParams:
    """Leakage admittances for ballast resistance ``r_b`` (ohm km).

    The rail-to-rail leakage is g12 = 1/r_b; the rail-to-ground leakage per
    rail is chosen so that it forms ``ground_fraction`` of g11 + g12.
    """
    if not r_b > 0:
        raise NonPositiveBallast(f"ballast resistance must be positive, got {r_b}")
    if not 0 <= ground_fraction < 1:
        raise ParameterError("ground_fraction must lie in [0, 1)")
    g12 = 1.0 / r_b
    g_ground = g12 * ground_fraction / (1 - ground_fraction)
    return replace(base, g11=g_ground, g22=g_ground, g12=g12)
