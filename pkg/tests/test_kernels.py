import os
import subprocess
import sys

import numpy as np
import pytest

from jtcsim import _kernels
from jtcsim.jtc import JTCScenario, after_elements, before_elements
from jtcsim.netcore import shunt_matrix
from jtcsim.railline import rail_estn

BACKENDS = sorted(_kernels.BACKENDS)


@pytest.fixture(scope="module")
def s():
    return JTCScenario.default()


def direct_product(s, kinds, values):
    m = np.eye(4, dtype=complex)
    for k, v in zip(kinds, values):
        m = m @ (rail_estn(s.eigen, v.real).m if k == _kernels.RAIL else shunt_matrix(v))
    return m


def sequences(s):
    xs = [3.0, 43.8333333333, 131.5, 400.25, 788.0]
    return [after_elements(s, x) for x in xs] + [before_elements(s, x) for x in xs]


@pytest.mark.skipif(os.environ.get("JTC_PURE_PYTHON") == "1", reason="fallback forced")
def test_native_backend_built():
    # the compiled extension ships with the package; the fallback is for
    # platforms without a compiler
    assert "native" in _kernels.BACKENDS
    assert _kernels.backend_name() in _kernels.BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
def test_chain_product_matches_direct(s, backend):
    seqs = sequences(s)
    got = _kernels.chain_product_batch(*_kernels.pack(seqs), s.eigen.modal, backend=backend)
    for g, (k, v) in zip(got, seqs):
        want = direct_product(s, k, v)
        assert np.max(np.abs(g - want)) <= 1e-12 * np.max(np.abs(want))


@pytest.mark.parametrize("backend", BACKENDS)
def test_empty_sequence_is_identity(s, backend):
    k, v, o = _kernels.pack([([], []), ([_kernels.RAIL], [0.0])])
    got = _kernels.chain_product_batch(k, v, o, s.eigen.modal, backend=backend)
    assert np.allclose(got, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("backend", BACKENDS)
def test_propagate_spans_image(s, backend, rng):
    seqs = sequences(s)
    w0 = np.linalg.qr(rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)))[0]
    w = _kernels.propagate_batch(w0, *_kernels.pack(seqs), s.eigen.modal, backend=backend)
    for wi, (k, v) in zip(w, seqs):
        assert np.allclose(wi.conj().T @ wi, np.eye(2), atol=1e-12)
        img = direct_product(s, k, v) @ w0
        q = np.linalg.qr(img)[0]
        # same column space: projecting onto the reference span changes nothing;
        # the direct reference itself is only accurate to cond(img) * eps
        tol = 1e-14 * (1 + np.linalg.cond(img))
        assert np.max(np.abs(wi - q @ (q.conj().T @ wi))) < tol


def test_backends_agree(s):
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    packed = _kernels.pack(sequences(s))
    a = _kernels.chain_product_batch(*packed, s.eigen.modal, backend="python")
    b = _kernels.chain_product_batch(*packed, s.eigen.modal, backend="native")
    assert np.max(np.abs(a - b) / np.abs(a).max(axis=(1, 2), keepdims=True)) < 1e-13


@pytest.mark.parametrize("x_f", [20.0, 100.0, 400.0])
def test_reversed_negated_sequence_is_inverse(s, x_f):
    for k, v in (after_elements(s, x_f), before_elements(s, x_f)):
        n = _kernels.chain_product_batch(*_kernels.pack([(k, v)]), s.eigen.modal)[0]
        inv = _kernels.chain_product_batch(*_kernels.pack([(k[::-1], -v[::-1])]), s.eigen.modal)[0]
        bound = 1e-13 * np.linalg.norm(n) * np.linalg.norm(inv)
        assert np.max(np.abs(n @ inv - np.eye(4))) < bound


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")


def test_set_backend_round_trip():
    before = _kernels.backend_name()
    try:
        _kernels.set_backend("python")
        assert _kernels.backend_name() == "python"
    finally:
        _kernels.set_backend(before)


def test_pure_python_env_switch():
    env = dict(os.environ, JTC_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from jtcsim import _kernels; print(_kernels.backend_name(), sorted(_kernels.BACKENDS))"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.split()[0] == "python"
    assert "native" not in out.stdout
