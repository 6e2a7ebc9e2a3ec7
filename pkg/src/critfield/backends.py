"""Kernel backend selection.

Two interchangeable implementations of the cosine-superposition kernels
exist: a Cython/OpenMP extension (``critfield._kernels``) and a pure NumPy
module (``critfield._kernels_py``).  The compiled one is picked at import
time when it is importable; set ``CRITFIELD_BACKEND=numpy`` or
``CRITFIELD_BACKEND=compiled`` to force a choice.  Both produce the same
numbers to within floating-point summation order (agreement is tested to
1e-12); within one backend results are fully deterministic, including under
any OpenMP/worker thread count.
"""

import os

from . import _kernels_py

_FORCE = os.environ.get("CRITFIELD_BACKEND", "auto").strip().lower()

_compiled = None
if _FORCE in ("auto", "compiled"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None
        if _FORCE == "compiled":
            raise ImportError(
                "CRITFIELD_BACKEND=compiled but the critfield._kernels "
                "extension is not built; run `pip install -e . --no-build-isolation`"
            )

if _FORCE == "numpy" or _compiled is None:
    _active = _kernels_py
    _active_name = "numpy"
else:
    _active = _compiled
    _active_name = "compiled"


def backend_name():
    """Name of the kernel backend in use: 'compiled' or 'numpy'."""
    return _active_name


def get_backend(name=None):
    """Return the kernel module for `name` (default: the active backend)."""
    if name is None or name == _active_name:
        return _active
    if name == "numpy":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled backend not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def cosine_jets(freqs, amps, phases, points):
    return _active.cosine_jets(freqs, amps, phases, points)


def cosine_val_grad(freqs, amps, phases, points):
    return _active.cosine_val_grad(freqs, amps, phases, points)


def cosine_values(freqs, amps, phases, points):
    return _active.cosine_values(freqs, amps, phases, points)
