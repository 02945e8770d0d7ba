"""Occupied jointless track circuit: network assembly and the boundary solve
for the state under the first wheel set.

Geometry (positions in metres from the receiving-end boundary of the main
track)::

    BA2   SVA   BA1 |<------------- main track ------------->| BA1   SVA   BA2
    z_rz  z_SVA z_rm|0   train (head at x_f) ->   capacitors  L|U_es,z_es z_SVA z_rs
    -l_st  -l_st/2                                           L+l_st/2   L+l_st

The signal enters at the sending end (x = L) and travels towards x = 0, so
every chain matrix here maps a state at larger x (input) to one at smaller x
(output).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.linalg import null_space

from . import _kernels
from ._kernels import RAIL, SHUNT
from .elements import (
    CapacitorFault,
    ShuntElement,
    ShuntKind,
    capacitor_fault,
    capacitor_impedance,
)
from .errors import (
    NoShuntingPoint,
    OutOfSection,
    ParameterError,
    SingularSystem,
    ZeroImpedance,
)
from .netcore import ESTN, RCOND_MIN, PortState, invert, shunt_matrix
from .railline import RailUnitParams, ballast_to_params, line_eigen, rail_estn
from .train import TrainFormation

# Calibration placeholders. The rail loop impedance is the common ZPW-2000
# value for 2300 Hz (1.435 ohm/km, 1.4 mH/km); the self/mutual split and all
# tuning-area impedances are illustrative.
DEFAULT_LENGTH_M = 789.0
DEFAULT_CARRIER_HZ = 2300.0
DEFAULT_BALLAST_OHM_KM = 6.0
DEFAULT_GROUND_FRACTION = 0.1
DEFAULT_CAPACITOR_F = 46e-6
DEFAULT_N_CAPACITORS = 9
DEFAULT_TUNING_LEN_M = 29.0
LOOP_R_OHM_KM = 1.435
LOOP_L_H_KM = 1.4e-3
MUTUAL_Z_OHM_KM = 0.25 + 6.0j
DEFAULT_Z_SVA = 0.02 + 0.477j
DEFAULT_Z_RZ = 0.03 + 0.33j
DEFAULT_Z_RM = 0.6 + 1.2j
DEFAULT_Z_RS = 0.03 + 0.33j
DEFAULT_Z_ES = 0.4 + 0.3j
DEFAULT_U_ES = 100.0
DEFAULT_TCR_GAINS = (1.0, 1.0)


def default_rail(carrier=DEFAULT_CARRIER_HZ) -> RailUnitParams:
    loop = LOOP_R_OHM_KM + 2j * np.pi * carrier * LOOP_L_H_KM
    z_self = MUTUAL_Z_OHM_KM + loop / 2
    return RailUnitParams.symmetric(z_self, MUTUAL_Z_OHM_KM, 0, 0, carrier)


def uniform_positions(length: float, n: int) -> tuple:
    """n equally spaced points with half spacing at both ends."""
    step = length / n
    return tuple(step * (i + 0.5) for i in range(n))


def default_capacitors(
    length=DEFAULT_LENGTH_M, n=DEFAULT_N_CAPACITORS, c=DEFAULT_CAPACITOR_F, f=DEFAULT_CARRIER_HZ
):
    return tuple(ShuntElement.capacitor(c, f, x) for x in uniform_positions(length, n))


@dataclass(frozen=True, eq=False)
class JTCScenario:
    length: float = DEFAULT_LENGTH_M
    carrier: float = DEFAULT_CARRIER_HZ
    rail: RailUnitParams = None
    ballast: float = DEFAULT_BALLAST_OHM_KM
    ground_fraction: float = DEFAULT_GROUND_FRACTION
    capacitors: tuple = None
    tuning_len: float = DEFAULT_TUNING_LEN_M
    z_sva: complex = DEFAULT_Z_SVA
    z_rz: complex = DEFAULT_Z_RZ
    z_rm: complex = DEFAULT_Z_RM
    z_rs: complex = DEFAULT_Z_RS
    z_es: complex = DEFAULT_Z_ES
    u_es: complex = DEFAULT_U_ES
    train: TrainFormation = field(default_factory=TrainFormation)
    tcr_gains: tuple = DEFAULT_TCR_GAINS

    def __post_init__(self):
        if not self.length > 0:
            raise ParameterError("section length must be positive")
        if not self.carrier > 0:
            raise ParameterError("carrier frequency must be positive")
        if not self.tuning_len >= 0:
            raise ParameterError("tuning area length must be non-negative")
        rail = self.rail if self.rail is not None else default_rail(self.carrier)
        if self.ballast is not None:
            rail = ballast_to_params(self.ballast, rail, self.ground_fraction)
        caps = self.capacitors
        if caps is None:
            caps = default_capacitors(self.length, f=self.carrier)
        caps = tuple(caps)
        pos = [c.position for c in caps]
        if any(p is None or not 0 < p < self.length for p in pos):
            raise ParameterError("capacitor positions must lie strictly inside the section")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ParameterError("capacitor positions must be strictly increasing")
        for name in ("z_sva", "z_rz", "z_rm", "z_rs", "z_es"):
            z = complex(getattr(self, name))
            if z == 0 or not np.isfinite(z):
                raise ZeroImpedance(f"{name} must be finite and nonzero")
            object.__setattr__(self, name, z)
        object.__setattr__(self, "u_es", complex(self.u_es))
        object.__setattr__(self, "rail", rail)
        object.__setattr__(self, "capacitors", caps)
        object.__setattr__(self, "tcr_gains", tuple(float(g) for g in self.tcr_gains))

    @classmethod
    def default(cls) -> "JTCScenario":
        return cls()

    @cached_property
    def eigen(self):
        return line_eigen(self.rail)

    @property
    def capacitor_positions(self) -> np.ndarray:
        return np.array([c.position for c in self.capacitors])

    def with_ballast(self, r_b: float) -> "JTCScenario":
        return replace(self, ballast=r_b)

    def with_rail_scale(self, factor: float) -> "JTCScenario":
        return replace(self, rail=self.rail.scaled_impedance(factor))

    def with_train(self, train: TrainFormation) -> "JTCScenario":
        return replace(self, train=train)

    def with_capacitor_fault(self, index: int, fault) -> "JTCScenario":
        """``index`` counts capacitors from the receiving end, starting at 1."""
        if not 1 <= index <= len(self.capacitors):
            raise ParameterError(f"capacitor index {index} out of range 1..{len(self.capacitors)}")
        caps = list(self.capacitors)
        caps[index - 1] = capacitor_fault(caps[index - 1], CapacitorFault(fault))
        return replace(self, capacitors=tuple(caps))

    def with_capacitance(self, c: float) -> "JTCScenario":
        caps = tuple(
            ShuntElement(ShuntKind.CAPACITOR, capacitor_impedance(c, self.carrier), x.position)
            for x in self.capacitors
        )
        return replace(self, capacitors=caps)


@dataclass(frozen=True)
class ShuntingSolution:
    x_f: float
    state: PortState
    z_f: complex
    condition_report: float

    def __post_init__(self):
        object.__setattr__(self, "z_f", complex(self.z_f))


@dataclass(frozen=True)
class SendingTuning:
    n_st: ESTN
    n2: np.ndarray
    n3: np.ndarray
    n4: np.ndarray
    u_es: np.ndarray


def shunting_impedance(state) -> complex:
    u1, u2, i1, i2 = np.asarray(state).reshape(4)
    return (u1 - u2) / ((i1 - i2) / 2)


def termination_rows(z: complex) -> np.ndarray:
    """Constraint rows of a load ``z`` across the rails at the end of a chain."""
    return np.array([[1, -1, -z / 2, z / 2], [0, 0, 1, 1]], dtype=np.complex128)


def _tuning_sequence(s: JTCScenario):
    half = s.tuning_len / 2000.0
    return [RAIL, SHUNT, RAIL], [half, 1 / s.z_sva, half]


def _chain(s, kinds, values) -> np.ndarray:
    k, v, o = _kernels.pack([(kinds, values)])
    return _kernels.chain_product_batch(k, v, o, s.eigen.modal)[0]


def receiving_tuning(s: JTCScenario):
    """Chain matrix of the receiving tuning area (half line, SVA, half line)
    and the BA2 termination rows."""
    k, v = _tuning_sequence(s)
    return ESTN(_chain(s, k, v)), termination_rows(s.z_rz)


def sending_tuning(s: JTCScenario) -> SendingTuning:
    k, v = _tuning_sequence(s)
    z = s.z_es
    n2 = np.zeros((4, 4), dtype=np.complex128)
    n2[:2, :2] = np.eye(2)
    n2[2, 2:] = [1, 1]
    n2[3] = [1, -1, z / 2, -z / 2]
    n3 = np.zeros((4, 4), dtype=np.complex128)
    n3[:2, :2] = -np.eye(2)
    n3[2, 2:] = [1, 1]
    n3[3, 2:] = [z / 2, -z / 2]
    u = np.array([0, 0, 0, s.u_es], dtype=np.complex128)
    return SendingTuning(ESTN(_chain(s, k, v)), n2, n3, termination_rows(s.z_rs), u)


def _check_xf(s: JTCScenario, x_f: float):
    if not 0 < x_f < s.length:
        raise OutOfSection(f"shunting point {x_f} m outside (0, {s.length}) m")


def _wheels(s: JTCScenario, x_f: float):
    """In-section wheel positions and admittances with the head at ``x_f``."""
    off = np.asarray(s.train.axle_offsets)
    y = 1 / np.asarray(s.train.wheel_resistance, dtype=np.complex128)
    pos = x_f - off
    keep = pos >= 0
    return pos[keep], y[keep]


def after_elements(s: JTCScenario, x_f: float, wheels=True):
    """Signal-ordered elements from x_f down to the receiving boundary x = 0.

    At equal positions a wheel set precedes a capacitor.
    """
    cap_x = s.capacitor_positions
    cap_y = np.array([1 / c.z for c in s.capacitors])
    sel = cap_x <= x_f
    if wheels:
        wx, wy = _wheels(s, x_f)
    else:
        wx, wy = np.zeros(0), np.zeros(0, dtype=np.complex128)
    x = np.concatenate([wx, cap_x[sel]])
    y = np.concatenate([wy, cap_y[sel]])
    order = np.concatenate([np.zeros(len(wx)), np.ones(sel.sum())])
    idx = np.lexsort((order, -x))
    x, y = x[idx], y[idx]
    gaps = -np.diff(np.concatenate([[x_f], x, [0.0]])) / 1000.0
    n = len(x)
    kinds = np.empty(2 * n + 1, dtype=np.int8)
    values = np.empty(2 * n + 1, dtype=np.complex128)
    kinds[0::2] = RAIL
    kinds[1::2] = SHUNT
    values[0::2] = gaps
    values[1::2] = y
    return kinds, values


def before_elements(s: JTCScenario, x_f: float):
    """Signal-ordered elements from the sending boundary x = L down to x_f."""
    cap_x = s.capacitor_positions
    cap_y = np.array([1 / c.z for c in s.capacitors])
    sel = cap_x > x_f
    x = cap_x[sel][::-1]
    y = cap_y[sel][::-1]
    gaps = -np.diff(np.concatenate([[s.length], x, [x_f]])) / 1000.0
    n = len(x)
    kinds = np.empty(2 * n + 1, dtype=np.int8)
    values = np.empty(2 * n + 1, dtype=np.complex128)
    kinds[0::2] = RAIL
    kinds[1::2] = SHUNT
    values[0::2] = gaps
    values[1::2] = y
    return kinds, values


def after_network(s: JTCScenario, x_f: float) -> ESTN:
    """Main track from the shunting point (train included) to the receiving end."""
    _check_xf(s, x_f)
    return ESTN(_chain(s, *after_elements(s, x_f)))


def before_network(s: JTCScenario, x_f: float) -> ESTN:
    """Wheel-free main track from the sending end to the shunting point
    (the identity at x_f = L)."""
    if not 0 < x_f <= s.length:
        raise OutOfSection(f"shunting point {x_f} m outside (0, {s.length}] m")
    return ESTN(_chain(s, *before_elements(s, x_f)))


@dataclass(frozen=True, eq=False)
class ProfileSolution:
    """Batch of shunting-point solutions (arrays indexed by sample)."""

    x: np.ndarray
    states: np.ndarray  # (n, 4): u1, u2, i1, i2 at the shunting point
    rcond: np.ndarray

    @property
    def z_f(self) -> np.ndarray:
        u = self.states
        return (u[:, 0] - u[:, 1]) / ((u[:, 2] - u[:, 3]) / 2)

    def solution(self, i: int) -> ShuntingSolution:
        st = self.states[i]
        return ShuntingSolution(
            float(self.x[i]), PortState.from_array(st), shunting_impedance(st), float(self.rcond[i])
        )


def _rcond_batch(a: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        c = np.linalg.cond(a, p=1).real
    return np.where(np.isfinite(c), 1 / c, 0.0)


def solve_many(s: JTCScenario, xs, method: str = "subspace", backend=None) -> ProfileSolution:
    """Solve the boundary system for every shunting point in ``xs``.

    ``method="subspace"`` propagates the receiving-end admissible states to
    x_f and couples them with the sending-side constraints in a 4x4 system.
    ``method="chained"`` stacks the constraints through explicit chain
    inverses (cross-check path).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if s.train.n_wheelsets == 0:
        raise NoShuntingPoint("scenario has no train, so there is no shunting point")
    for x in xs:
        _check_xf(s, x)
    modal = s.eigen.modal
    tk, tv = _tuning_sequence(s)
    after = [after_elements(s, x) for x in xs]
    before = [before_elements(s, x) for x in xs]
    n_bf = _kernels.chain_product_batch(*_kernels.pack(before), modal, backend=backend)
    st = sending_tuning(s)
    if method == "subspace":
        w0 = null_space(termination_rows(s.z_rz))
        recv = [
            (np.concatenate([k, [SHUNT], tk]), np.concatenate([v, [1 / s.z_rm], tv]))
            for k, v in after
        ]
        w = _kernels.propagate_batch(w0, *_kernels.pack(recv), modal, backend=backend)
        vst = st.n_st.m @ null_space(st.n4)
        vst = vst / np.linalg.norm(vst, axis=0)
        a = np.empty((len(xs), 4, 4), dtype=np.complex128)
        a[:, :, :2] = st.n2 @ n_bf @ w
        a[:, :, 2:] = st.n3 @ vst
        rcond = _rcond_batch(a)
        _raise_if_singular(xs, rcond)
        coef = np.linalg.solve(a, np.broadcast_to(st.u_es, (len(xs), 4))[..., None])[..., 0]
        states = np.einsum("bij,bj->bi", w, coef[:, :2])
    elif method == "chained":
        inv_after = [(k[::-1], -v[::-1]) for k, v in after]
        n_af_inv = _kernels.chain_product_batch(*_kernels.pack(inv_after), modal, backend=backend)
        n_rt, n1 = receiving_tuning(s)
        n_rt_inv, rc1 = invert(n_rt)
        n_rm_inv, rc2 = invert(ESTN(shunt_matrix(1 / s.z_rm)))
        n_st_inv, rc3 = invert(st.n_st)
        n3_inv, rc4 = invert(ESTN(st.n3))
        send = st.n4 @ n_st_inv.m @ n3_inv.m
        a = np.empty((len(xs), 4, 4), dtype=np.complex128)
        a[:, :2] = send @ st.n2 @ n_bf
        a[:, 2:] = n1 @ n_rt_inv.m @ n_rm_inv.m @ n_af_inv
        b = np.zeros((len(xs), 4), dtype=np.complex128)
        b[:, :2] = send @ st.u_es
        scale = np.linalg.norm(a, axis=2)
        a = a / scale[..., None]
        b = b / scale
        rcond = np.minimum(_rcond_batch(a), min(rc1, rc2, rc3, rc4))
        _raise_if_singular(xs, rcond)
        states = np.linalg.solve(a, b[..., None])[..., 0]
    else:
        raise ValueError(f"unknown method {method!r}")
    return ProfileSolution(xs, states, rcond)


def _raise_if_singular(xs, rcond):
    bad = np.flatnonzero(~(rcond >= RCOND_MIN))
    if len(bad):
        i = bad[0]
        raise SingularSystem(float(rcond[i]), float(xs[i]))


def solve_shunting_point(s: JTCScenario, x_f: float, method: str = "subspace") -> ShuntingSolution:
    return solve_many(s, [x_f], method=method).solution(0)


def tcr_amplitude(sol: ShuntingSolution, a1: float, a2: float) -> float:
    """Amplitude of the voltage induced in the on-board reader antenna."""
    if sol.z_f == 0:
        raise ZeroImpedance("shunting impedance is zero")
    return abs(a1 * a2 * sol.state.differential_voltage / sol.z_f)


def tcr_amplitudes(p: ProfileSolution, a1: float, a2: float) -> np.ndarray:
    u = p.states
    return np.abs(a1 * a2 * (u[:, 0] - u[:, 1]) / p.z_f)


def unoccupied_main_track(s: JTCScenario) -> ESTN:
    """Whole main track without a train, sending end to receiving end."""
    k, v = after_elements(s, s.length, wheels=False)
    return ESTN(_chain(s, k, v))


def rail(s: JTCScenario, l_m: float) -> ESTN:
    return rail_estn(s.eigen, l_m / 1000.0)


def as_items(kinds, values) -> list:
    """Element arrays as ("rail", km) / ("shunt", impedance) pairs."""
    return [
        ("rail", float(v.real)) if k == RAIL else ("shunt", 1 / v)
        for k, v in zip(kinds, values)
    ]
