"""Hot-kernel dispatch: compiled extension when available, numpy otherwise.

Set GROUNDLINE_KERNELS=python to force the fallback, or =native to make a
missing extension a hard error. The default (auto) prefers the extension.
"""

import os

from groundline._kernels import _python

_requested = os.environ.get("GROUNDLINE_KERNELS", "auto").lower()
if _requested not in {"auto", "native", "python"}:
    raise ValueError(
        f"GROUNDLINE_KERNELS must be auto, native or python, got {_requested!r}"
    )

if _requested == "python":
    _impl = _python
else:
    try:
        from groundline._kernels import _native as _impl
    except ImportError:
        if _requested == "native":
            raise
        _impl = _python

BACKEND = _impl.BACKEND
so3_exp = _impl.so3_exp
so3_log = _impl.so3_log
iekf_update = _impl.iekf_update


def available_backends():
    """Names of importable kernel backends ('python' is always present)."""
    names = ["python"]
    try:
        from groundline._kernels import _native  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("native")
    return names
