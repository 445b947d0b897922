"""Backend selection for the RAC trial loop.

The compiled extension is used when it imports; set ``FBOX_PURE_PYTHON=1``
to force the pure-Python loop. Both give identical results.
"""

import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py.rac_batch}

try:
    from . import _kernels
except ImportError:
    _kernels = None
else:
    BACKENDS["cython"] = _kernels.rac_batch

if _kernels is not None and os.environ.get("FBOX_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

rac_batch = BACKENDS[BACKEND]


def get_backend(name=None):
    if name is None:
        return rac_batch
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    return BACKENDS[name]
