"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``QSHJE_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the pure-Python implementations are used. ``BACKEND`` names the
active choice.
"""

import os

from . import _pykernels

_force_python = os.environ.get("QSHJE_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_python:
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

numerov_sweep = _impl.numerov_sweep
hermite_eval = _impl.hermite_eval
rk4_tabulated = _impl.rk4_tabulated


def available_backends():
    """Return the kernel modules that can be imported, keyed by name."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["compiled"] = _ckernels
    except ImportError:
        pass
    return found
