"""Backend selection for the cascade kernels.

The compiled extension is used when it imports; setting ``JTC_PURE_PYTHON=1``
forces the NumPy implementation.
"""
import os

import numpy as np

from . import _pykernels
from ._pykernels import RAIL, SHUNT

_native = None
if os.environ.get("JTC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _native
    except ImportError:  # extension not built
        _native = None

BACKENDS = {"python": _pykernels}
if _native is not None:
    BACKENDS["native"] = _native

_active = "native" if _native is not None else "python"


def backend_name() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}")
    _active = name


def _prep(kinds, values, offsets):
    return (
        np.ascontiguousarray(kinds, dtype=np.int8),
        np.ascontiguousarray(values, dtype=np.complex128),
        np.ascontiguousarray(offsets, dtype=np.int64),
    )


def chain_product_batch(kinds, values, offsets, modal, backend=None):
    t, tinv, s = modal
    k, v, o = _prep(kinds, values, offsets)
    return BACKENDS[backend or _active].chain_product_batch(k, v, o, t, tinv, s)


def propagate_batch(w0, kinds, values, offsets, modal, backend=None):
    t, tinv, s = modal
    k, v, o = _prep(kinds, values, offsets)
    return BACKENDS[backend or _active].propagate_batch(w0, k, v, o, t, tinv, s)


def pack(sequences):
    """Concatenate (kinds, values) sequences into flat arrays plus offsets."""
    offsets = np.zeros(len(sequences) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(k) for k, _ in sequences])
    if sequences and offsets[-1]:
        kinds = np.concatenate([np.asarray(k, dtype=np.int8) for k, _ in sequences])
        values = np.concatenate([np.asarray(v, dtype=np.complex128) for _, v in sequences])
    else:
        kinds = np.zeros(0, dtype=np.int8)
        values = np.zeros(0, dtype=np.complex128)
    return kinds, values, offsets
