"""Backend selection for the variance integrands.

The compiled extension is used when it imports; otherwise, or when
``CASIMIR_FLUCT_PURE=1`` is set, the numpy implementation is used.  Both
expose ``single_eval``, ``double_eval``, ``single_samples`` and
``double_samples`` with identical signatures.
"""
import os

import numpy as np

from . import _kernels_py

READINGS = _kernels_py.READINGS
WEIGHTS = _kernels_py.WEIGHTS


def _load_compiled():
    if os.environ.get("CASIMIR_FLUCT_PURE") == "1":
        return None
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
BACKEND = "cython" if _compiled is not None else "numpy"


def get_backend(name=None):
    """Return the kernel module for ``name`` ('cython', 'numpy' or None = active)."""
    if name is None:
        name = BACKEND
    if name == "numpy":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def _c(a, dim):
    a = np.ascontiguousarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] != dim:
        raise ValueError(f"expected an (N, {dim}) array, got shape {a.shape}")
    return a


def single_eval(x, z, backend=None):
    return get_backend(backend).single_eval(_c(x, 7), float(z))


def double_eval(x, z, reading=0, weights=0, backend=None):
    return get_backend(backend).double_eval(_c(x, 9), float(z), int(reading), int(weights))


def single_samples(u, z, mu_xi, mu_q, backend=None):
    return get_backend(backend).single_samples(_c(u, 7), float(z), float(mu_xi), float(mu_q))


def double_samples(u, z, mu_xi, mu_q, reading=0, weights=0, backend=None):
    return get_backend(backend).double_samples(
        _c(u, 9), float(z), float(mu_xi), float(mu_q), int(reading), int(weights)
    )
