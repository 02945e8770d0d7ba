"""Train formation geometry and rail-wheel units.

Positions are metres measured from the receiving-end boundary of the main
track. The signal travels towards decreasing position; a train occupying the
section has its head (first wheel set) at the largest position and its other
wheel sets trailing towards the receiving end.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .netcore import ESTN, shunt_matrix
from .railline import LineEigen, rail_estn

DEFAULT_WHEEL_OHM = 0.15

# Placeholder CRH380B-like geometry: eight 25 m cars, 17.5 m bogie centres,
# 2.5 m bogie wheelbase.
CAR_LENGTH_M = 25.0
BOGIE_CENTRES_M = 17.5
WHEELBASE_M = 2.5
N_CARS = 8


def default_axle_offsets(
    n_cars=N_CARS, car_length=CAR_LENGTH_M, bogie_centres=BOGIE_CENTRES_M, wheelbase=WHEELBASE_M
):
    offsets = []
    for c in range(n_cars):
        base = c * car_length
        offsets += [base, base + wheelbase, base + bogie_centres, base + bogie_centres + wheelbase]
    return tuple(offsets)


@dataclass(frozen=True)
class TrainFormation:
    axle_offsets: tuple = field(default_factory=default_axle_offsets)
    wheel_resistance: tuple = None

    def __post_init__(self):
        offsets = tuple(float(x) for x in self.axle_offsets)
        if self.wheel_resistance is None:
            res = (complex(DEFAULT_WHEEL_OHM),) * len(offsets)
        else:
            res = tuple(complex(r) for r in self.wheel_resistance)
        if len(res) != len(offsets):
            raise ParameterError("axle_offsets and wheel_resistance lengths differ")
        if offsets and offsets[0] != 0:
            raise ParameterError("first axle offset must be 0")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ParameterError("axle offsets must be strictly increasing")
        if any(not r.real > 0 for r in res):
            raise ParameterError("wheel set resistances must have positive real part")
        object.__setattr__(self, "axle_offsets", offsets)
        object.__setattr__(self, "wheel_resistance", res)

    def __len__(self):
        return len(self.axle_offsets)

    @property
    def n_wheelsets(self) -> int:
        return len(self.axle_offsets)

    def with_resistance(self, r) -> "TrainFormation":
        """All wheel sets set to the same resistance ``r``."""
        return TrainFormation(self.axle_offsets, (r,) * len(self))

    def with_wheel(self, index: int, r) -> "TrainFormation":
        res = list(self.wheel_resistance)
        res[index] = r
        return TrainFormation(self.axle_offsets, tuple(res))

    def truncated(self, n: int) -> "TrainFormation":
        return TrainFormation(self.axle_offsets[:n], self.wheel_resistance[:n])


@dataclass(frozen=True)
class WheelPositions:
    positions: tuple  # in-section positions, head first
    indices: tuple  # formation index of each in-section wheel set
    excluded: tuple  # formation indices that fall outside the section


def wheel_positions(f: TrainFormation, head: float, length: float = None) -> WheelPositions:
    """Positions of the wheel sets with the first one at ``head``.

    Wheel sets behind the receiving end (negative position) or, when
    ``length`` is given, beyond it are excluded.
    """
    pos, idx, out = [], [], []
    for i, off in enumerate(f.axle_offsets):
        x = head - off
        if x < 0 or (length is not None and x > length):
            out.append(i)
        else:
            pos.append(x)
            idx.append(i)
    return WheelPositions(tuple(pos), tuple(idx), tuple(out))


@dataclass(frozen=True)
class RailWheelUnit:
    """Rail between two adjacent fixed shunts plus the wheel sets on it.

    ``x_start < x_end``; ``wheels`` holds (position, resistance) pairs in
    ascending position, i.e. from the rear-most wheel set towards the head.
    """

    x_start: float
    x_end: float
    wheels: tuple = ()

    def __post_init__(self):
        if self.x_end < self.x_start:
            raise ParameterError("unit end precedes its start")
        wheels = tuple(sorted((float(x), complex(r)) for x, r in self.wheels))
        for x, _ in wheels:
            if not self.x_start <= x <= self.x_end:
                raise ParameterError(f"wheel at {x} m lies outside the unit")
        object.__setattr__(self, "wheels", wheels)

    @property
    def length(self) -> float:
        return self.x_end - self.x_start

    def split(self, x: float) -> tuple["RailWheelUnit", "RailWheelUnit"]:
        """Split at ``x`` into the receiving-side and sending-side parts."""
        lo = tuple(w for w in self.wheels if w[0] < x)
        hi = tuple(w for w in self.wheels if w[0] >= x)
        return RailWheelUnit(self.x_start, x, lo), RailWheelUnit(x, self.x_end, hi)


def partition_units(wheels, fixed_points) -> list[RailWheelUnit]:
    """Distribute wheel sets over the spans between consecutive fixed points.

    A wheel set exactly on an interior fixed point goes to the span on its
    sending side, so its shunt precedes the fixed element in signal order.
    """
    fp = [float(x) for x in fixed_points]
    if any(b < a for a, b in zip(fp, fp[1:])):
        raise ParameterError("fixed points must be sorted")
    buckets = [[] for _ in range(len(fp) - 1)]
    for x, r in wheels:
        if x < fp[0] or x > fp[-1]:
            raise ParameterError(f"wheel at {x} m lies outside the fixed points")
        j = int(np.searchsorted(fp, x, side="right")) - 1
        j = min(j, len(buckets) - 1)
        buckets[j].append((x, r))
    return [RailWheelUnit(fp[j], fp[j + 1], tuple(b)) for j, b in enumerate(buckets)]


def unit_elements(u: RailWheelUnit):
    """Signal-ordered (kind, value) list: ("rail", km) and ("shunt", z)."""
    seq = []
    x = u.x_end
    for pos, r in reversed(u.wheels):
        seq.append(("rail", (x - pos) / 1000.0))
        seq.append(("shunt", r))
        x = pos
    seq.append(("rail", (x - u.x_start) / 1000.0))
    return seq


def rail_wheel_estn(u: RailWheelUnit, e: LineEigen) -> ESTN:
    """Chain matrix of the unit traversed from ``x_end`` down to ``x_start``:
    rail, wheel shunt, rail, ..., wheel shunt, rail."""
    m = np.eye(4, dtype=np.complex128)
    for kind, v in unit_elements(u):
        if kind == "rail":
            m = m @ rail_estn(e, v).m
        else:
            m = m @ shunt_matrix(1 / v)
    return ESTN(m)
