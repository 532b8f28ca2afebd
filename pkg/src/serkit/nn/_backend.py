"""Kernel backend selection.

The compiled extension (serkit.nn._kernels) is used when it imported
cleanly; otherwise the numpy fallback takes over. Set SERKIT_KERNELS to
"python" or "compiled" to force one side; forcing "compiled" raises if the
extension is unavailable.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("SERKIT_KERNELS", "").strip().lower()

_compiled = None
if _forced != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

if _forced == "compiled" and _compiled is None:
    raise ImportError("SERKIT_KERNELS=compiled but the extension is not built; "
                      "reinstall with a C compiler available")

kernels = _compiled if _compiled is not None else _kernels_py


def backend_name() -> str:
    """Either 'compiled' or 'python'."""
    return kernels.NAME


def available_backends() -> dict:
    """Importable kernel modules keyed by name."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
