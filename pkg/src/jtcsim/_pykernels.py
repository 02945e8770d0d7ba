"""Pure NumPy implementation of the cascade kernels.

Each batch item is a ragged sequence of elements stored back to back in
``kinds``/``values`` and delimited by ``offsets``. Element kinds:

* ``RAIL``  -- value is the line length in km (negative gives the inverse)
* ``SHUNT`` -- value is the admittance between the rails in S

Sequences are padded with zero-length rail (the identity) and evaluated
column by column, vectorised across the batch.
"""
import numpy as np

RAIL = 0
SHUNT = 1


def _pad(kinds, values, offsets):
    offsets = np.asarray(offsets, dtype=np.int64)
    lens = np.diff(offsets)
    b = len(lens)
    width = int(lens.max()) if b else 0
    k = np.zeros((b, width), dtype=np.int8)
    v = np.zeros((b, width), dtype=np.complex128)
    row = np.repeat(np.arange(b), lens)
    col = np.arange(offsets[-1] - offsets[0]) - np.repeat(offsets[:-1] - offsets[0], lens)
    k[row, col] = kinds[offsets[0]:offsets[-1]]
    v[row, col] = values[offsets[0]:offsets[-1]]
    return k, v


def _elements(kind, value, t, tinv, s):
    b = len(kind)
    lengths = np.where(kind == RAIL, value, 0)
    c = np.cosh(np.outer(lengths, s))
    sh = np.sinh(np.outer(lengths, s))
    km = np.zeros((b, 4, 4), dtype=np.complex128)
    km[:, 0, 0] = km[:, 2, 2] = c[:, 0]
    km[:, 1, 1] = km[:, 3, 3] = c[:, 1]
    km[:, 0, 2] = km[:, 2, 0] = -sh[:, 0]
    km[:, 1, 3] = km[:, 3, 1] = -sh[:, 1]
    e = t @ km @ tinv
    shunt = kind == SHUNT
    if shunt.any():
        y = value[shunt]
        es = np.broadcast_to(np.eye(4, dtype=np.complex128), (len(y), 4, 4)).copy()
        es[:, 2, 0] = es[:, 3, 1] = y
        es[:, 2, 1] = es[:, 3, 0] = -y
        e[shunt] = es
    return e


def chain_product_batch(kinds, values, offsets, t, tinv, s):
    k, v = _pad(kinds, values, offsets)
    p = np.broadcast_to(np.eye(4, dtype=np.complex128), (k.shape[0], 4, 4)).copy()
    for j in range(k.shape[1]):
        p = p @ _elements(k[:, j], v[:, j], t, tinv, s)
    return p


def _orthonormalize(w):
    a = w[:, :, 0]
    a = a / np.linalg.norm(a, axis=1, keepdims=True)
    b = w[:, :, 1]
    b = b - np.sum(a.conj() * b, axis=1, keepdims=True) * a
    b = b / np.linalg.norm(b, axis=1, keepdims=True)
    return np.stack([a, b], axis=2)


def propagate_batch(w0, kinds, values, offsets, t, tinv, s):
    k, v = _pad(kinds, values, offsets)
    w = np.broadcast_to(np.asarray(w0, dtype=np.complex128), (k.shape[0], 4, 2)).copy()
    w = _orthonormalize(w)
    for j in range(k.shape[1] - 1, -1, -1):
        w = _orthonormalize(_elements(k[:, j], v[:, j], t, tinv, s) @ w)
    return w
