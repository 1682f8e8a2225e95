"""Backend dispatch for the hot numeric kernels.

The compiled extension (``_core``, built from ``_core.pyx``) is preferred
when importable; otherwise the NumPy reference in ``ref`` is used.  Set
``OCCUPATH_BACKEND=python`` or ``OCCUPATH_BACKEND=compiled`` to force a
choice (``compiled`` raises if the extension is missing).

All wrappers coerce inputs to float64 C-contiguous arrays so both
backends see identical data layouts.
"""

import os

import numpy as np

from . import ref as _ref

_choice = os.environ.get("OCCUPATH_BACKEND", "auto").lower()
if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(f"OCCUPATH_BACKEND must be auto|compiled|python, got {_choice!r}")

_impl = _ref
BACKEND = "python"
if _choice in ("auto", "compiled"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _ref


def _c1(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _c2(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected 2-d array, got shape {a.shape}")
    return a


def time_features(omega, phase, ts, order):
    return _impl.time_features(_c1(omega), _c1(phase), _c1(ts), int(order))


def spatial_design(omega, phase, points):
    return _impl.spatial_design(_c2(omega), _c1(phase), _c2(points))


def map_query(omega, phase, weights, bias, points):
    return _impl.map_query(_c2(omega), _c1(phase), _c1(weights), float(bias), _c2(points))


def map_query_grad(omega, phase, weights, bias, points):
    return _impl.map_query_grad(_c2(omega), _c1(phase), _c1(weights), float(bias), _c2(points))


def rank1_updates(weights, grads, feats, eta):
    if not (weights.dtype == np.float64 and weights.flags.c_contiguous):
        raise ValueError("weight matrix must be float64 C-contiguous for in-place update")
    _impl.rank1_updates(weights, _c2(grads), _c2(feats), float(eta))
