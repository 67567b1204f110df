"""Kernel backend selection.

Two interchangeable implementations exist: a numba-compiled one (``jit``) and
a pure-numpy one (``reference``).  The active backend is picked once, lazily:

* ``COMBKIT_BACKEND=numpy``  force the numpy path,
* ``COMBKIT_BACKEND=numba``  force the compiled path (error if numba missing),
* unset or ``auto``          use numba when importable, numpy otherwise.

:func:`set_backend` overrides the environment for the current process.
"""

import os

from .. import config
from . import reference

_active = None
_forced: str | None = None


def _load_jit():
    from . import jit  # deferred: importing numba is slow

    return jit


def _resolve():
    choice = _forced or os.environ.get(config.ENV_BACKEND, "auto").lower()
    if choice in ("numpy", "reference"):
        return reference
    if choice == "numba":
        return _load_jit()
    if choice == "auto":
        try:
            return _load_jit()
        except ImportError:
            return reference
    raise ValueError(
        f"unknown backend {choice!r}; expected 'auto', 'numba' or 'numpy'"
    )


def backend():
    global _active
    if _active is None:
        _active = _resolve()
    return _active


def active_name() -> str:
    return backend().NAME


def set_backend(name: str | None) -> None:
    """Force a backend ('numba'/'numpy') or restore auto-selection (None)."""
    global _forced, _active
    _forced = name
    _active = None
    if name is not None:
        backend()


def contract_sequence(upsilon, slot_dims, maps) -> complex:
    return backend().contract_sequence(upsilon, slot_dims, maps)


def restrict_slots(upsilon, out_dims, in_dims, removed):
    return backend().restrict_slots(upsilon, out_dims, in_dims, removed)


def partial_trace(matrix, leg_dims, keep):
    return backend().partial_trace(matrix, leg_dims, keep)


def warmup() -> str:
    """Run every kernel once on tiny inputs (triggers JIT compilation)."""
    import numpy as np

    ups = np.eye(4, dtype=np.complex128)
    contract_sequence(ups, [4], [np.eye(4, dtype=np.complex128)])
    restrict_slots(ups, [2], [2], [True])
    partial_trace(ups, [2, 2], [True, False])
    return active_name()
