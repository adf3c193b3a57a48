"""Kernel backend selection.

Set DRYPORE_BACKEND=numpy to force the pure-numpy kernels; the default is
the numba backend when numba imports cleanly. Both backends implement the
same raw-array kernel API and agree to round-off; reductions use the same
naive C-order accumulation so they match bit for bit.
"""

import os

_REQUESTED = os.environ.get("DRYPORE_BACKEND", "").strip().lower()


def _select():
    if _REQUESTED not in ("", "numba", "numpy"):
        raise ValueError(
            f"DRYPORE_BACKEND={_REQUESTED!r}: expected 'numba' or 'numpy'"
        )
    if _REQUESTED != "numpy":
        try:
            from . import _kernels_numba as mod
            return mod, "numba"
        except ImportError:
            if _REQUESTED == "numba":
                raise
    from . import _kernels_numpy as mod
    return mod, "numpy"


kernels, BACKEND = _select()
