"""Backend selection for the GF(2^L) hot loops.

The compiled module is used when importable; set ``PROCACHE_PURE=1`` to
force the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _purekernels as pure

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and not os.environ.get("PROCACHE_PURE"):
    impl = compiled
    BACKEND = "cython"
else:
    impl = pure
    BACKEND = "python"

mul = impl.mul
inv = impl.inv
poly_eval = impl.poly_eval
interpolate = impl.interpolate
count_consistent = impl.count_consistent


def available_backends() -> dict:
    out = {"python": pure}
    if compiled is not None:
        out["cython"] = compiled
    return out
