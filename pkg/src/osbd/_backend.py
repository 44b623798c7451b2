"""Backend selection: numba-jitted kernels with a pure-numpy fallback.

The environment variable ``OSBD_BACKEND`` pins the choice ("numba" or
"numpy"); unset, numba is used when importable.  Both backends draw from
identical Philox streams, so fixed-input integer results (heights, chain
lengths, DP sweeps) agree exactly; float pipelines may differ in the last
ulp because ``math.log`` and ``np.log`` are not bit-identical on every
input (documented determinism contract: byte-stable per backend).
"""
from __future__ import annotations

import os

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in the dev env
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def _initial_choice() -> str:
    env = os.environ.get("OSBD_BACKEND", "").strip().lower()
    if env:
        if env not in _VALID:
            raise ValueError(
                f"OSBD_BACKEND must be one of {_VALID}, got {env!r}")
        if env == "numba" and not HAVE_NUMBA:
            raise ImportError("OSBD_BACKEND=numba but numba is not importable")
        return env
    return "numba" if HAVE_NUMBA else "numpy"


_active = _initial_choice()
_modules: dict[str, object] = {}


def active_backend() -> str:
    return _active


def set_backend(name: str) -> str:
    """Switch backends (mainly for tests/benchmarks); returns the old name."""
    global _active
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not importable")
    old, _active = _active, name
    return old


def kernels():
    """Import (lazily) and return the active kernel module."""
    mod = _modules.get(_active)
    if mod is None:
        if _active == "numba":
            from . import _kernels_nb as mod
        else:
            from . import _kernels_np as mod
        _modules[_active] = mod
    return mod


def set_threads(n: int) -> None:
    """Record the worker-thread budget (numba batch kernels are nogil)."""
    global _threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = n


_threads = 1


def threads() -> int:
    return _threads
