"""Helpers shared by several test modules."""
import numpy as np

from jtcsim.railline import RailUnitParams

NEGLIGIBLE = 1e-9


def random_rail(rng, base: RailUnitParams, spread=0.5) -> RailUnitParams:
    """Independent +-spread perturbation of every per-unit parameter."""

    def k():
        return 1 + spread * rng.uniform(-1, 1)

    return RailUnitParams(
        base.z11.real * k() + 1j * base.z11.imag * k(),
        base.z22.real * k() + 1j * base.z22.imag * k(),
        base.z12.real * k() + 1j * base.z12.imag * k(),
        base.g11 * k(),
        base.g22 * k(),
        base.g12 * k(),
        base.frequency,
    )


def entry_rel_error(got, want) -> float:
    """Worst relative error over entries that are not negligible against the
    largest entry; negligible entries are compared absolutely against it."""
    got, want = np.asarray(got), np.asarray(want)
    scale = np.abs(want).max()
    big = np.abs(want) > NEGLIGIBLE * scale
    rel = np.abs(got - want)[big] / np.abs(want)[big]
    small = np.abs(got - want)[~big] / scale if (~big).any() else np.zeros(1)
    return float(max(rel.max(), small.max()))
