"""Backend selection for the hot kernels.

The compiled extension ``mkdvlab._kernels`` is used when it imports
cleanly; otherwise the numpy fallback in ``mkdvlab._kernels_py`` is used.
Set ``MKDVLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("MKDVLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

phase_kernel = _impl.phase_kernel
triple_interaction = _impl.triple_interaction
box_energies = _impl.box_energies
bilinear_weighted_sum = _impl.bilinear_weighted_sum


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
