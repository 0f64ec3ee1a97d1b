"""Kernel backend selected at import.

The compiled ``_ccore`` extension is used when it was built; otherwise (or when
``HETCAST_PURE_PYTHON`` is set) the pure-Python ``_pycore`` twin is loaded.
Both produce identical streams and decode trajectories.
"""

import os

from . import _pycore

if os.environ.get("HETCAST_PURE_PYTHON"):
    _impl = _pycore
    BACKEND = "python"
else:
    try:
        from . import _ccore as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pycore
        BACKEND = "python"

splitmix64 = _impl.splitmix64
mix = _impl.mix
Xorshift64Star = _impl.Xorshift64Star
expand_indices = _impl.expand_indices
PeelingDecoder = _impl.PeelingDecoder
GF256RowReducer = _impl.GF256RowReducer


def backends():
    """Importable kernel modules keyed by name (for benchmarks and parity tests)."""
    out = {"python": _pycore}
    try:
        from . import _ccore

        out["compiled"] = _ccore
    except ImportError:
        pass
    return out
