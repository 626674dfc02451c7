"""Kernel backend selection.

The compiled extension is preferred; the pure-Python module is used when the
extension was not built or when ``HYBRID_UNITING_BACKEND=python``.
"""

import os

from . import _kernels_py

kernels = _kernels_py

if os.environ.get("HYBRID_UNITING_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as kernels  # noqa: F811
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.NAME


def compiled():
    """Return the compiled kernel module, or None if it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
