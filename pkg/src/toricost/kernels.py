"""Backend selection for the hot kernels.

The environment variable ``TORICOST_BACKEND`` picks the implementation:

    auto   (default) use numba when importable, else pure numpy
    numba  require the compiled kernels, raise if numba is missing
    numpy  force the pure-numpy fallback

``TORICOST_THREADS`` caps the number of threads the compiled kernels may use.
The two backends agree within solver tolerances but are not bitwise
identical; a fixed backend plus fixed seeds gives fully reproducible runs.
"""

from __future__ import annotations

import os

import numpy as np

from . import _numpy_impl
from .errors import ValidationError

_numba_impl = None
_numba_failed = False
_forced: str | None = None


def resolve_backend(env_value: str | None, numba_available: bool) -> str:
    """Pure selection rule, exposed for testing."""
    name = (env_value or "auto").strip().lower()
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not numba_available:
            raise ValidationError(
                "TORICOST_BACKEND=numba but numba is not importable")
        return "numba"
    if name == "auto":
        return "numba" if numba_available else "numpy"
    raise ValidationError(f"unknown TORICOST_BACKEND value: {env_value!r}")


def _try_load_numba():
    global _numba_impl, _numba_failed
    if _numba_impl is not None or _numba_failed:
        return _numba_impl
    try:
        import numba

        threads = os.environ.get("TORICOST_THREADS", "").strip()
        if threads:
            cap = max(1, int(threads))
            numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
        from . import _numba_impl as impl

        _numba_impl = impl
    except ImportError:
        _numba_failed = True
    return _numba_impl


def active_backend() -> str:
    """Name of the backend the package will use for the next kernel call."""
    if _forced is not None:
        return _forced
    env = os.environ.get("TORICOST_BACKEND")
    name = (env or "auto").strip().lower()
    if name == "numpy":
        return "numpy"
    available = _try_load_numba() is not None
    return resolve_backend(env, available)


def force_backend(name: str | None) -> None:
    """Override the environment selection (``None`` restores it). Test hook."""
    global _forced
    if name is not None:
        resolve_backend(name, True)  # validate the spelling
    _forced = name


def use_numba() -> bool:
    return active_backend() == "numba"


def numba_impl():
    impl = _try_load_numba()
    if impl is None:
        raise ValidationError("numba backend requested but numba is not importable")
    return impl


def numpy_impl():
    return _numpy_impl


def monge_bruteforce(cost_matrix):
    impl = numba_impl() if use_numba() else _numpy_impl
    best, perm = impl.monge_bruteforce(np.ascontiguousarray(cost_matrix, dtype=float))
    return float(best), perm


def sinkhorn_scaling(kernel, a, b, tol, max_iter):
    impl = numba_impl() if use_numba() else _numpy_impl
    plan, n_iter, defect = impl.sinkhorn_scaling(kernel, a, b, tol, max_iter)
    return plan, int(n_iter), float(defect)


def sinkhorn_log(cost, a, b, epsilon, tol, max_iter):
    impl = numba_impl() if use_numba() else _numpy_impl
    plan, n_iter, defect = impl.sinkhorn_log(cost, a, b, epsilon, tol, max_iter)
    return plan, int(n_iter), float(defect)
