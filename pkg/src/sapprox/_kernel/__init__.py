"""Counting-kernel selection.

Imports the compiled Cython kernel when the extension was built, otherwise
falls back to the pure-Python twin.  Set ``SAPPROX_KERNEL=pure`` to force
the fallback (used by the benchmark and the equivalence tests).
"""

import os

from . import _pure

_impl = _pure
if os.environ.get("SAPPROX_KERNEL", "").lower() not in ("pure", "py", "python"):
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

valuation = _impl.valuation
remove_factor = _impl.remove_factor
introot = _impl.introot
count_in_ap_int = _impl.count_in_ap_int
count_in_ap = _impl.count_in_ap
count_ap_abs_root = _impl.count_ap_abs_root


def implementation_name() -> str:
    """'fast' when the compiled extension is active, else 'pure'."""
    return "fast" if _impl.__name__.endswith("_fast") else "pure"


def implementations():
    """All available kernel modules, for cross-checking tests."""
    mods = [_pure]
    try:
        from . import _fast

        mods.append(_fast)
    except ImportError:
        pass
    return mods
