"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is used. Set ``HYBRIDLINK_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("HYBRIDLINK_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

synth_payload = _impl.synth_payload
digest64 = _impl.digest64
integrate_hold = _impl.integrate_hold


def available_backends():
    """Map backend name to module for every backend importable right now."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
