"""Backend selection for the inner-loop kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the numpy fallback in ``_kernels_py`` is used.  Setting the environment
variable ``DICTPR_PURE_PYTHON=1`` forces the fallback at import time, and
:func:`use_backend` switches at runtime (used by tests and the benchmark).

All kernels take C-contiguous ``complex128``/``float64`` arrays; the
wrappers below make the inputs conform before dispatch.
"""
import os

import numpy as np

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("DICTPR_PURE_PYTHON", "") in ("", "0"):
    _impl = _ckernels
    BACKEND = "cython"
else:
    _impl = _kernels_py
    BACKEND = "python"


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name):
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global _impl, BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous = BACKEND
    _impl, BACKEND = _BACKENDS[name], name
    return previous


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _r(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def intensities(A, x):
    return _impl.intensities(_c(A), _c(x))


def quartic_loss(A, x, y):
    return float(_impl.quartic_loss(_c(A), _c(x), _r(y)))


def quartic_loss_grad(A, x, y):
    loss, grad = _impl.quartic_loss_grad(_c(A), _c(x), _r(y))
    return float(loss), grad


def lifted_lowrank(A, H, signs):
    return _impl.lifted_lowrank(_c(A), _c(H), _r(signs))
