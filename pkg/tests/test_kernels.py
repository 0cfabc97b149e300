import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridlink import kernels
from hybridlink.kernels import available_backends

BACKENDS = sorted(available_backends())


@pytest.fixture(params=BACKENDS)
def mod(request):
    return available_backends()[request.param]


def test_compiled_backend_selected_when_built():
    import os
    if "cython" in BACKENDS and os.environ.get("HYBRIDLINK_PURE_PYTHON") != "1":
        assert kernels.BACKEND == "cython"
    else:
        assert kernels.BACKEND == "python"


def test_payload_deterministic_and_sized(mod):
    a = mod.synth_payload(4, 1001)
    assert len(a) == 1001 and a == mod.synth_payload(4, 1001)
    assert a != mod.synth_payload(5, 1001)
    assert mod.synth_payload(0, 0) == b""


def test_digest_detects_single_flip(mod):
    data = bytearray(mod.synth_payload(1, 4096))
    d0 = mod.digest64(bytes(data))
    data[1234] ^= 1
    assert mod.digest64(bytes(data)) != d0


def test_digest_position_sensitive(mod):
    a = b"\x01" + b"\x00" * 15
    b = b"\x00" * 8 + b"\x01" + b"\x00" * 7
    assert mod.digest64(a) != mod.digest64(b)


def test_integrate_hold_known_value(mod):
    t = np.array([0, 10, 30], dtype=np.int64)
    p = np.array([100, 200, 50], dtype=np.int64)
    assert mod.integrate_hold(t, p, 0, 40) == 100 * 10 + 200 * 20 + 50 * 10
    assert mod.integrate_hold(t, p, 5, 15) == 100 * 5 + 200 * 5
    assert mod.integrate_hold(t, p, 7, 7) == 0


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@given(st.integers(0, 2**40), st.integers(0, 3000))
def test_backends_bit_identical(frame_id, size):
    py, cy = available_backends()["python"], available_backends()["cython"]
    payload = py.synth_payload(frame_id, size)
    assert cy.synth_payload(frame_id, size) == payload
    assert cy.digest64(payload) == py.digest64(payload)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@given(st.lists(st.tuples(st.integers(1, 1000), st.integers(0, 10**6)), min_size=1,
                max_size=50), st.integers(0, 5000), st.integers(0, 60000))
def test_integrate_backends_agree(steps, t0, width):
    t = np.cumsum([0] + [s for s, _ in steps[1:]]).astype(np.int64)
    p = np.array([v for _, v in steps], dtype=np.int64)
    py, cy = available_backends()["python"], available_backends()["cython"]
    assert py.integrate_hold(t, p, t0, t0 + width) == cy.integrate_hold(t, p, t0, t0 + width)


def test_env_var_forces_fallback():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-c",
                          "import hybridlink.kernels as k; print(k.BACKEND)"],
                         env={"HYBRIDLINK_PURE_PYTHON": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
